import itertools
import os

import numpy as np
import pytest

from smoothtm import kernels
from smoothtm.code import (
    CodeParameter, code_from_json, code_to_json, decode, encode, is_vertex,
    random_code, tuple_indices, uniform_code,
)
from smoothtm.machines import (
    BLANK, MachineError, build_detectA_solution, build_parityCheck_solution,
    run_on_input,
)
from smoothtm.simplex import Alphabet
from smoothtm.utm import (
    UtmHyper, UtmTrace, delta_step_t, direct_cycle, utm_reference_run,
    work_config, run_cycles,
)


def test_dimensions_match_paper_counts():
    detect = encode(build_detectA_solution())
    assert detect.dim == 30
    parity = encode(build_parityCheck_solution())
    assert parity.dim == 240


def test_encode_decode_round_trip():
    for build in (build_detectA_solution, build_parityCheck_solution):
        table = build()
        back = decode(encode(table))
        assert (back.sigma, back.states, back.delta, back.initial_state) == (
            table.sigma, table.states, table.delta, table.initial_state)


def test_code_checkpoint_bit_exact():
    rng = np.random.default_rng(5)
    table = build_detectA_solution()
    code = random_code(table.sigma, table.states, table.initial_state, rng)
    back = code_from_json(code_to_json(code))
    assert np.array_equal(back.sprime, code.sprime)
    assert np.array_equal(back.qprime, code.qprime)
    assert np.array_equal(back.dmat, code.dmat)


def test_utm_hyper_period():
    assert UtmHyper(t=10, num_tuples=6).period == 65


def test_utm_reference_matches_classical_and_period():
    table = build_detectA_solution()
    for x, t in [("AB", 10), ("BBB", 10), ("BAB", 7), ("", 4)]:
        trace = UtmTrace()
        got = utm_reference_run(table, x, t, trace=trace)
        assert got == run_on_input(table, x, t).state
        assert trace.assert_periodic(6, t) == 65
        # The state tape probed at offset 4 into each period equals the
        # classically simulated state after that many steps.
        from smoothtm.machines import initial_config, run
        for c in range(t):
            probe = trace.state_tape[4 + 65 * c]
            assert probe == run(table, initial_config(table, x, t), c).state


def test_utm_reference_parity():
    table = build_parityCheck_solution()
    for x in ("AB", "A", "BABA"):
        assert utm_reference_run(table, x, 42) == run_on_input(table, x, 42).state


def test_utm_reference_rejects_non_vertex():
    table = build_detectA_solution()
    code = uniform_code(table.sigma, table.states, table.initial_state)
    with pytest.raises(MachineError):
        utm_reference_run(code, "AB", 3)


def test_utm_reference_t0():
    table = build_parityCheck_solution()
    assert utm_reference_run(table, "AB", 0) == "getNextAB"


# ---------------------------------------------------------------------------
# Direct simulation


def test_vertex_direct_cycle_equals_classical_step():
    rng = np.random.default_rng(17)
    table = build_detectA_solution()
    code = encode(table)
    for _ in range(20):
        n = int(rng.integers(0, 5))
        x = "".join(rng.choice(["A", "B"], size=n))
        t = int(rng.integers(1, 11))
        dist = delta_step_t(x, code, t)
        want = run_on_input(table, x, t).state
        assert dist[table.states.index(want)] >= 1 - 1e-9


def test_stay_machine_state_marginal_fixed():
    sigma = Alphabet((BLANK, "A"))
    states = Alphabet(("p", "q"))
    delta = {(s, st): (s, st, "S") for s in sigma for st in states}
    from smoothtm.machines import TransitionTable
    code = encode(TransitionTable(sigma, states, delta, initial_state="p"))
    for t in (0, 1, 5):
        dist = delta_step_t("A", code, t)
        assert np.allclose(dist, [1.0, 0.0], atol=1e-12)


def test_uniform_code_output_valid_and_entropic():
    from smoothtm.simplex import entropy
    table = build_detectA_solution()
    code = uniform_code(table.sigma, table.states, table.initial_state)
    dist = delta_step_t("AB", code, 10)
    assert abs(dist.sum() - 1.0) <= 1e-10
    assert np.all(dist >= 0)
    assert entropy(dist) > 0


def test_single_tuple_degenerate_machine():
    # |Sigma|=1, |Q|=1: lambda_1 = 1, staging closed form reduces to the
    # tuple's own entries with the empty product equal to 1.
    sigma = Alphabet((BLANK,))
    states = Alphabet(("q",))
    sp = np.array([[1.0]])
    qp = np.array([[1.0]])
    dm = np.array([[0.0, 1.0, 0.0]])
    code = CodeParameter(sigma, states, sp, qp, dm, "q")
    conf = work_config(code, "", 3)
    out = direct_cycle(conf, code)
    assert np.allclose(out.state, [[1.0]])


def test_lambda_sums_to_one():
    rng = np.random.default_rng(23)
    table = build_detectA_solution()
    for _ in range(50):
        code = random_code(table.sigma, table.states, table.initial_state, rng)
        conf = work_config(code, "AB", 5)
        conf.tape[0, conf.center] = rng.dirichlet(np.ones(3))
        conf.state[0] = rng.dirichlet(np.ones(2))
        tsig, tst = tuple_indices(table.sigma, table.states)
        lam = conf.tape[0, conf.center, tsig] * conf.state[0, tst]
        assert abs(lam.sum() - 1.0) <= 1e-10


def test_staging_closed_form_equals_recursion():
    rng = np.random.default_rng(29)
    for _ in range(100):
        n_sym = int(rng.integers(2, 5))
        n_st = int(rng.integers(1, 4))
        n = n_sym * n_st
        lam = rng.uniform(0, 1, size=n)
        sp = rng.dirichlet(np.ones(n_sym), size=n)
        qp = rng.dirichlet(np.ones(n_st), size=n)
        dm = rng.dirichlet(np.ones(3), size=n)
        a = kernels.staging_recursive(lam, sp, qp, dm)
        b = kernels.staging_closed_form(lam, sp, qp, dm)
        for x, y in zip(a, b):
            assert np.allclose(x, y, atol=1e-12)


def test_normalization_along_trajectory():
    rng = np.random.default_rng(31)
    table = build_detectA_solution()
    for _ in range(50):
        code = random_code(table.sigma, table.states, table.initial_state, rng)
        n = int(rng.integers(1, 6))
        x = "".join(rng.choice(["A", "B"], size=n))
        conf = work_config(code, x, 10)
        _, tapes, states = run_cycles(conf, code, 10, return_trajectory=True)
        assert np.abs(tapes.sum(axis=3) - 1.0).max() <= 1e-10
        assert np.abs(states.sum(axis=2) - 1.0).max() <= 1e-10


def test_backends_agree():
    if kernels.backend_name() != "numba":
        pytest.skip("numba backend unavailable")
    rng = np.random.default_rng(37)
    table = build_detectA_solution()
    code = random_code(table.sigma, table.states, table.initial_state, rng)
    conf = work_config(code, "ABBA", 8, batch=3)
    conf.tape[1, conf.center] = rng.dirichlet(np.ones(3))
    conf.state[2] = rng.dirichlet(np.ones(2))
    sp, qp, dm = code.sprime, code.qprime, code.dmat
    tsig, tst = code.tuple_indices()
    blank = code.sigma.index(BLANK)
    t_nb = kernels._forward_nb(conf.tape, conf.state, sp, qp, dm, tsig, tst,
                               conf.center, blank, 8)
    t_np = kernels._forward_np(conf.tape, conf.state, sp, qp, dm, tsig, tst,
                               conf.center, blank, 8)
    assert np.allclose(t_nb[0], t_np[0], atol=1e-12)
    assert np.allclose(t_nb[1], t_np[1], atol=1e-12)
    bar_t = rng.normal(size=conf.tape.shape)
    bar_s = rng.normal(size=conf.state.shape)
    v_nb = kernels._vjp_nb(t_nb[0], t_nb[1], sp, qp, dm, tsig, tst,
                           conf.center, blank, bar_t, bar_s)
    v_np = kernels._vjp_np(t_np[0], t_np[1], sp, qp, dm, tsig, tst,
                           conf.center, blank, bar_t, bar_s)
    for a, b in zip(v_nb, v_np):
        assert np.allclose(a, b, atol=1e-10)


# ---------------------------------------------------------------------------
# A non-classical detectA solution: entropic write/move entries whose
# variation never changes the predicted state. The accept rows' writes and
# moves plus the (A, reject) write are free; next-state entries stay pinned.


def build_entropic_detectA() -> CodeParameter:
    table = build_detectA_solution()
    code = encode(table)
    sigma, states = table.sigma, table.states
    tsig, tst = code.tuple_indices()
    rng = np.random.default_rng(99)
    for i in range(code.num_tuples):
        s = sigma.symbols[tsig[i]]
        q = states.symbols[tst[i]]
        if q == "accept":
            code.sprime[i] = rng.dirichlet(np.ones(3))
            code.dmat[i] = rng.dirichlet(np.ones(3))
        if q == "reject" and s == "A":
            code.sprime[i] = rng.dirichlet(np.ones(3))
    return code


def test_entropic_solution_reproduces_target_exactly():
    table = build_detectA_solution()
    code = build_entropic_detectA()
    assert not is_vertex(code)
    for l in range(0, 8):
        for tup in itertools.product("AB", repeat=l):
            x = "".join(tup)
            dist = delta_step_t(x, code, 10)
            want = "accept" if "A" in x else "reject"
            assert dist[table.states.index(want)] >= 1 - 1e-9, x
