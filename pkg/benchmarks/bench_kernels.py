"""Benchmark the direct-simulation kernels: numba @njit loops against the
vectorized numpy fallback (the path selected by SMOOTHTM_DISABLE_NUMBA=1).

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from smoothtm import kernels
from smoothtm.code import encode, random_code
from smoothtm.machines import build_detectA_solution, build_parityCheck_solution
from smoothtm.problems import (
    dataset_from_seed, detectA_problem, parityCheck_problem,
)
from smoothtm.problems import _batched_tapes


def workload(problem, n):
    rng = np.random.default_rng(0)
    code = random_code(problem.sigma, problem.states, problem.initial_state, rng)
    ds = dataset_from_seed(problem, n, 1)
    groups = ds.grouped()
    tape, state, y_idx, counts, center = _batched_tapes(problem, code, groups)
    blank = code.sigma.index("□")
    tsig, tst = code.tuple_indices()
    return (tape, state, code.sprime, code.qprime, code.dmat, tsig, tst,
            center, blank, problem.t, y_idx, counts)


def run_backend(fwd, vjp, w, reps):
    (tape, state, sp, qp, dm, tsig, tst, center, blank, t, y_idx, counts) = w
    # warm-up (numba compilation)
    tapes, states = fwd(tape, state, sp, qp, dm, tsig, tst, center, blank, t)
    bar_t = np.zeros_like(tape)
    bar_s = np.zeros_like(state)
    bar_s[np.arange(len(y_idx)), y_idx] = 1.0
    vjp(tapes, states, sp, qp, dm, tsig, tst, center, blank, bar_t, bar_s)
    t0 = time.perf_counter()
    for _ in range(reps):
        tapes, states = fwd(tape, state, sp, qp, dm, tsig, tst, center, blank, t)
    t1 = time.perf_counter()
    for _ in range(reps):
        vjp(tapes, states, sp, qp, dm, tsig, tst, center, blank, bar_t, bar_s)
    t2 = time.perf_counter()
    return (t1 - t0) / reps, (t2 - t1) / reps


def main():
    if not kernels._HAVE_NUMBA:
        print("numba unavailable (or disabled); nothing to compare")
        return
    cases = [
        ("detectA  n=200 t=10", detectA_problem(), 200, 50),
        ("parity   n=100 t=42", parityCheck_problem(), 100, 10),
    ]
    print(f"{'case':<22} {'fwd numba':>10} {'fwd numpy':>10} {'speedup':>8}"
          f" {'vjp numba':>10} {'vjp numpy':>10} {'speedup':>8}")
    for label, problem, n, reps in cases:
        w = workload(problem, n)
        f_nb, v_nb = run_backend(kernels._forward_nb, kernels._vjp_nb, w, reps)
        f_np, v_np = run_backend(kernels._forward_np, kernels._vjp_np, w, reps)
        print(f"{label:<22} {f_nb * 1e3:>8.2f}ms {f_np * 1e3:>8.2f}ms "
              f"{f_np / f_nb:>7.1f}x {v_nb * 1e3:>8.2f}ms {v_np * 1e3:>8.2f}ms "
              f"{v_np / v_nb:>7.1f}x")


if __name__ == "__main__":
    main()
