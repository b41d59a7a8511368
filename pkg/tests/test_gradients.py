import numpy as np
import pytest

from smoothtm.code import encode, random_code
from smoothtm.machines import build_detectA_solution
from smoothtm.utm import (
    cycles_gradient, delta_step_t, logp_grad_batch, work_config,
)


def perturbed(code, tuple_idx, block, col, h):
    """Move free coordinate col of one simplex by h, compensating on the
    last coordinate so the point stays on the affine simplex hull."""
    c = code.copy()
    arr = {"s": c.sprime, "q": c.qprime, "d": c.dmat}[block]
    arr[tuple_idx, col] += h
    arr[tuple_idx, -1] -= h
    return c


def free_coords(code):
    for i in range(code.num_tuples):
        for col in range(len(code.sigma) - 1):
            yield i, "s", col
        for col in range(len(code.states) - 1):
            yield i, "q", col
        for col in range(2):
            yield i, "d", col


def logp_of(code, x, t, y_idx):
    dist = delta_step_t(x, code, t)
    return float(np.log(max(dist[y_idx], 1e-300)))


def test_logp_gradient_matches_central_differences():
    table = build_detectA_solution()
    rng = np.random.default_rng(41)
    t = 10
    h = 1e-5
    for trial in range(6):
        code = random_code(table.sigma, table.states, table.initial_state, rng)
        n = int(rng.integers(1, 5))
        x = "".join(rng.choice(["A", "B"], size=n))
        y_idx = int(rng.integers(2))
        conf = work_config(code, x, t)
        total, grad, p_y, clamped = logp_grad_batch(
            conf.tape, conf.state, code, t,
            np.array([y_idx]), np.array([1.0]), conf.center)
        assert not clamped
        g_free = grad.free_vector()
        fd = np.empty_like(g_free)
        for k, (i, block, col) in enumerate(free_coords(code)):
            # Stay strictly inside the simplex for the central stencil.
            arr = {"s": code.sprime, "q": code.qprime, "d": code.dmat}[block]
            if arr[i, col] < 2 * h or arr[i, -1] < 2 * h:
                fd[k] = g_free[k]
                continue
            up = logp_of(perturbed(code, i, block, col, h), x, t, y_idx)
            dn = logp_of(perturbed(code, i, block, col, -h), x, t, y_idx)
            fd[k] = (up - dn) / (2 * h)
        scale = max(np.abs(fd).max(), 1.0)
        assert np.abs(g_free - fd).max() / scale <= 1e-5, trial


def test_gradient_finite_at_vertex_code():
    table = build_detectA_solution()
    code = encode(table)
    conf = work_config(code, "BAB", 10)
    total, grad, p_y, clamped = logp_grad_batch(
        conf.tape, conf.state, code, 10,
        np.array([table.states.index("accept")]), np.array([1.0]), conf.center)
    assert np.isfinite(total)
    for arr in (grad.sprime, grad.qprime, grad.dmat):
        assert np.all(np.isfinite(arr))


def test_dead_tuple_gradient_zero():
    # detectA vertex code on an all-B input: tuples matching symbol A are
    # never reached, so their coordinates get zero gradient.
    table = build_detectA_solution()
    code = encode(table)
    conf = work_config(code, "BBB", 10)
    _, grad, _, _ = logp_grad_batch(
        conf.tape, conf.state, code, 10,
        np.array([table.states.index("reject")]), np.array([1.0]), conf.center)
    tsig, tst = code.tuple_indices()
    for i in range(code.num_tuples):
        if table.sigma.symbols[tsig[i]] == "A":
            assert np.allclose(grad.sprime[i], 0.0, atol=1e-12)
            assert np.allclose(grad.qprime[i], 0.0, atol=1e-12)
            assert np.allclose(grad.dmat[i], 0.0, atol=1e-12)


def test_single_cycle_vjp_matches_fd():
    table = build_detectA_solution()
    rng = np.random.default_rng(43)
    code = random_code(table.sigma, table.states, table.initial_state, rng)
    conf = work_config(code, "AB", 4)
    bar_tape = rng.normal(size=conf.tape.shape)
    bar_state = rng.normal(size=conf.state.shape)

    def scalar(c):
        from smoothtm.utm import run_cycles
        out = run_cycles(work_config(c, "AB", 4), c, 1)
        return float((bar_tape * out.tape).sum() + (bar_state * out.state).sum())

    grad, _, _ = cycles_gradient(conf, code, 1, bar_tape, bar_state)
    h = 1e-6
    for i, block, col in list(free_coords(code))[::7]:
        arr = {"s": code.sprime, "q": code.qprime, "d": code.dmat}[block]
        if arr[i, col] < 2 * h or arr[i, -1] < 2 * h:
            continue
        fd = (scalar(perturbed(code, i, block, col, h))
              - scalar(perturbed(code, i, block, col, -h))) / (2 * h)
        garr = {"s": grad.sprime, "q": grad.qprime, "d": grad.dmat}[block]
        want = garr[i, col] - garr[i, -1]
        assert abs(fd - want) <= 1e-5 * max(1.0, abs(fd)), (i, block, col)


def test_batch_gradient_consistent_with_singletons():
    table = build_detectA_solution()
    rng = np.random.default_rng(47)
    code = random_code(table.sigma, table.states, table.initial_state, rng)
    xs = ["AB", "BA"]
    t = 6
    margin = t + 1
    width = 2 + 2 * margin
    tape = np.zeros((2, width, 3))
    tape[:, :, 0] = 1.0
    for p, x in enumerate(xs):
        for k, ch in enumerate(x):
            tape[p, margin + k, :] = 0.0
            tape[p, margin + k, table.sigma.index(ch)] = 1.0
    state = np.zeros((2, 2))
    state[:, table.states.index("reject")] = 1.0
    y = np.array([1, 1])
    counts = np.array([2.0, 3.0])
    total, grad, _, _ = logp_grad_batch(tape, state, code, t, y, counts, margin)
    singles = 0.0
    acc = np.zeros_like(grad.free_vector())
    for p, x in enumerate(xs):
        conf = work_config(code, x, t)
        tot, g, _, _ = logp_grad_batch(conf.tape, conf.state, code, t,
                                       y[p:p + 1], counts[p:p + 1], conf.center)
        singles += tot
        acc += g.free_vector()
    assert total == pytest.approx(singles, rel=1e-12)
    assert np.allclose(grad.free_vector(), acc, atol=1e-10)
