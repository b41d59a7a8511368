"""Hot numeric kernels: direct simulation of the staged pseudo-UTM.

One `cycle` collapses a full UTM period (T = 10N+5 machine steps) into a
single update of the simulated work tape and state. Everything here is
batched over a set of work tapes (shape (P, U, S)) so a whole dataset is
one kernel call.

Cycle outputs are renormalized: the exact dynamics preserve the product of
simplices, but round-off perturbations off the probability manifold grow
multiplicatively cycle over cycle, so the drift is killed every cycle and
the reverse pass differentiates through the renormalization.

Two interchangeable backends: a vectorized numpy reference and numba @njit
loops. The numba path is selected by default when numba imports; set
SMOOTHTM_DISABLE_NUMBA=1 to force the numpy fallback. Both must agree to
1e-12 (tests enforce this; benchmarks/bench_kernels.py compares speed).

Array conventions
-----------------
tape      (P, U, S)  work-tape cell marginals, head fixed at column `center`
state     (P, Q)     simulated state marginal
sprime    (N, S)     per-tuple write distribution P(s'_i)
qprime    (N, Q)     per-tuple next-state distribution P(q'_i)
dmat      (N, 3)     per-tuple move distribution, columns (L, S, R)
tsig, tst (N,)       the (symbol, state) indices each tuple matches
blank_idx            index of the blank symbol (edge cells pull it in)
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("SMOOTHTM_DISABLE_NUMBA", "0") not in ("0", "", "false")
_HAVE_NUMBA = False
if not _DISABLE:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        _HAVE_NUMBA = False

if not _HAVE_NUMBA:

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


def backend_name() -> str:
    return "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference backend


def _cycle_raw_np(tape, state, sprime, qprime, dmat, tsig, tst, center, blank_idx):
    """One cycle before renormalization, vectorized over the batch."""
    P, U, S = tape.shape
    N = sprime.shape[0]
    y0 = tape[:, center, :]
    lam = y0[:, tsig] * state[:, tst]                    # (P, N)
    suf = np.empty((P, N + 1))
    suf[:, N] = 1.0
    for j in range(N - 1, -1, -1):
        suf[:, j] = suf[:, j + 1] * (1.0 - lam[:, j])
    coeff = lam * suf[:, 1:]
    p_x = suf[:, 0]
    shat = coeff @ sprime
    qhat = coeff @ qprime
    dhat = coeff @ dmat
    a_vec = p_x[:, None] * y0 + shat
    new_state = p_x[:, None] * state + qhat
    p_l = dhat[:, 0]
    p_s = dhat[:, 1] + p_x                               # X direction acts as stay
    p_r = dhat[:, 2]
    written = tape.copy()
    written[:, center, :] = a_vec
    new_tape = p_s[:, None, None] * written
    new_tape[:, 1:, :] += p_l[:, None, None] * written[:, :-1, :]
    new_tape[:, :-1, :] += p_r[:, None, None] * written[:, 1:, :]
    new_tape[:, 0, blank_idx] += p_l
    new_tape[:, -1, blank_idx] += p_r
    return new_tape, new_state


def _forward_np(tape0, state0, sprime, qprime, dmat, tsig, tst, center, blank_idx, t):
    P, U, S = tape0.shape
    Q = state0.shape[1]
    tapes = np.empty((t + 1, P, U, S))
    states = np.empty((t + 1, P, Q))
    tapes[0] = tape0
    states[0] = state0
    for c in range(t):
        raw_tape, raw_state = _cycle_raw_np(
            tapes[c], states[c], sprime, qprime, dmat, tsig, tst, center, blank_idx
        )
        tapes[c + 1] = raw_tape / raw_tape.sum(axis=2, keepdims=True)
        states[c + 1] = raw_state / raw_state.sum(axis=1, keepdims=True)
    return tapes, states


def _vjp_np(tapes, states, sprime, qprime, dmat, tsig, tst, center, blank_idx,
            bar_tape, bar_state):
    t = tapes.shape[0] - 1
    P, U, S = tapes.shape[1:]
    N = sprime.shape[0]
    g_s = np.zeros_like(sprime)
    g_q = np.zeros_like(qprime)
    g_d = np.zeros_like(dmat)
    bar_tape = bar_tape.copy()
    bar_state = bar_state.copy()
    rows = np.arange(P)[:, None]
    for c in range(t - 1, -1, -1):
        tape, state = tapes[c], states[c]
        raw_tape, raw_state = _cycle_raw_np(
            tape, state, sprime, qprime, dmat, tsig, tst, center, blank_idx
        )
        # Adjoint of the renormalization v -> v / sum(v), using the stored
        # normalized outputs tapes[c+1], states[c+1].
        ssum = raw_state.sum(axis=1)
        dot = (bar_state * states[c + 1]).sum(axis=1, keepdims=True)
        bar_state = (bar_state - dot) / ssum[:, None]
        tsum = raw_tape.sum(axis=2)
        dott = (bar_tape * tapes[c + 1]).sum(axis=2, keepdims=True)
        bar_tape = (bar_tape - dott) / tsum[:, :, None]

        y0 = tape[:, center, :]
        lam = y0[:, tsig] * state[:, tst]
        suf = np.empty((P, N + 1))
        suf[:, N] = 1.0
        for j in range(N - 1, -1, -1):
            suf[:, j] = suf[:, j + 1] * (1.0 - lam[:, j])
        coeff = lam * suf[:, 1:]
        p_x = suf[:, 0]
        shat = coeff @ sprime
        dhat = coeff @ dmat
        a_vec = p_x[:, None] * y0 + shat
        p_l = dhat[:, 0]
        p_s = dhat[:, 1] + p_x
        p_r = dhat[:, 2]
        written = tape.copy()
        written[:, center, :] = a_vec

        bar_pl = np.einsum("pus,pus->p", bar_tape[:, 1:, :], written[:, :-1, :])
        bar_pl += bar_tape[:, 0, blank_idx]
        bar_ps = np.einsum("pus,pus->p", bar_tape, written)
        bar_pr = np.einsum("pus,pus->p", bar_tape[:, :-1, :], written[:, 1:, :])
        bar_pr += bar_tape[:, -1, blank_idx]
        bar_written = p_s[:, None, None] * bar_tape
        bar_written[:, :-1, :] += p_l[:, None, None] * bar_tape[:, 1:, :]
        bar_written[:, 1:, :] += p_r[:, None, None] * bar_tape[:, :-1, :]
        bar_a = bar_written[:, center, :].copy()
        bar_tape_in = bar_written
        bar_tape_in[:, center, :] = 0.0

        bar_px = (bar_state * state).sum(axis=1)
        bar_state_in = p_x[:, None] * bar_state
        bar_qhat = bar_state
        bar_px += (bar_a * y0).sum(axis=1) + bar_ps
        bar_y0 = p_x[:, None] * bar_a
        bar_shat = bar_a
        bar_dhat = np.stack([bar_pl, bar_ps, bar_pr], axis=1)

        bar_coeff = bar_shat @ sprime.T + bar_qhat @ qprime.T + bar_dhat @ dmat.T
        g_s += coeff.T @ bar_shat
        g_q += coeff.T @ bar_qhat
        g_d += coeff.T @ bar_dhat

        bar_lam = bar_coeff * suf[:, 1:]
        bar_suf = np.zeros((P, N + 1))
        bar_suf[:, 1:] += bar_coeff * lam
        bar_suf[:, 0] += bar_px
        for j in range(N):
            bar_suf[:, j + 1] += bar_suf[:, j] * (1.0 - lam[:, j])
            bar_lam[:, j] -= bar_suf[:, j] * suf[:, j + 1]

        np.add.at(bar_y0, (rows, tsig[None, :]), bar_lam * state[:, tst])
        np.add.at(bar_state_in, (rows, tst[None, :]), bar_lam * y0[:, tsig])
        bar_tape_in[:, center, :] += bar_y0
        bar_tape, bar_state = bar_tape_in, bar_state_in
    return bar_tape, bar_state, g_s, g_q, g_d


# ---------------------------------------------------------------------------
# numba backend (same math, explicit loops)


@njit(cache=True)
def _cycle_nb(tape, state, sprime, qprime, dmat, tsig, tst, center, blank_idx,
              new_tape, new_state):
    P, U, S = tape.shape
    Q = state.shape[1]
    N = sprime.shape[0]
    lam = np.empty(N)
    suf = np.empty(N + 1)
    a_vec = np.empty(S)
    qhat = np.empty(Q)
    for p in range(P):
        for i in range(N):
            lam[i] = tape[p, center, tsig[i]] * state[p, tst[i]]
        suf[N] = 1.0
        for j in range(N - 1, -1, -1):
            suf[j] = suf[j + 1] * (1.0 - lam[j])
        p_x = suf[0]
        for s in range(S):
            a_vec[s] = p_x * tape[p, center, s]
        for q in range(Q):
            qhat[q] = 0.0
        dh0 = 0.0
        dh1 = 0.0
        dh2 = 0.0
        for j in range(N):
            cj = lam[j] * suf[j + 1]
            if cj != 0.0:
                for s in range(S):
                    a_vec[s] += cj * sprime[j, s]
                for q in range(Q):
                    qhat[q] += cj * qprime[j, q]
                dh0 += cj * dmat[j, 0]
                dh1 += cj * dmat[j, 1]
                dh2 += cj * dmat[j, 2]
        ssum = 0.0
        for q in range(Q):
            v = p_x * state[p, q] + qhat[q]
            new_state[p, q] = v
            ssum += v
        for q in range(Q):
            new_state[p, q] /= ssum
        p_l = dh0
        p_s = dh1 + p_x
        p_r = dh2
        for u in range(U):
            rowsum = 0.0
            for s in range(S):
                wc = a_vec[s] if u == center else tape[p, u, s]
                acc = p_s * wc
                if u - 1 >= 0:
                    wl = a_vec[s] if u - 1 == center else tape[p, u - 1, s]
                    acc += p_l * wl
                elif s == blank_idx:
                    acc += p_l
                if u + 1 < U:
                    wr = a_vec[s] if u + 1 == center else tape[p, u + 1, s]
                    acc += p_r * wr
                elif s == blank_idx:
                    acc += p_r
                new_tape[p, u, s] = acc
                rowsum += acc
            for s in range(S):
                new_tape[p, u, s] /= rowsum


@njit(cache=True)
def _forward_nb(tape0, state0, sprime, qprime, dmat, tsig, tst, center,
                blank_idx, t):
    P, U, S = tape0.shape
    Q = state0.shape[1]
    tapes = np.empty((t + 1, P, U, S))
    states = np.empty((t + 1, P, Q))
    tapes[0] = tape0
    states[0] = state0
    for c in range(t):
        _cycle_nb(tapes[c], states[c], sprime, qprime, dmat, tsig, tst,
                  center, blank_idx, tapes[c + 1], states[c + 1])
    return tapes, states


@njit(cache=True)
def _vjp_nb(tapes, states, sprime, qprime, dmat, tsig, tst, center, blank_idx,
            bar_tape_in0, bar_state_in0):
    t = tapes.shape[0] - 1
    P = tapes.shape[1]
    U = tapes.shape[2]
    S = tapes.shape[3]
    Q = states.shape[2]
    N = sprime.shape[0]
    g_s = np.zeros((N, S))
    g_q = np.zeros((N, Q))
    g_d = np.zeros((N, 3))
    bar_tape = bar_tape_in0.copy()
    bar_state = bar_state_in0.copy()
    nxt_tape = np.empty((P, U, S))
    nxt_state = np.empty((P, Q))
    lam = np.empty(N)
    suf = np.empty(N + 1)
    bar_lam = np.empty(N)
    bar_suf = np.empty(N + 1)
    a_vec = np.empty(S)
    qhat = np.empty(Q)
    bar_a = np.empty(S)
    bar_y0 = np.empty(S)
    bar_dhat = np.empty(3)
    bt = np.empty((U, S))       # cotangent of the raw (pre-renorm) tape
    bs = np.empty(Q)            # cotangent of the raw state
    rowsum = np.empty(U)
    for c in range(t - 1, -1, -1):
        for p in range(P):
            # Recompute the forward pieces of cycle c for this batch row.
            for i in range(N):
                lam[i] = tapes[c, p, center, tsig[i]] * states[c, p, tst[i]]
            suf[N] = 1.0
            for j in range(N - 1, -1, -1):
                suf[j] = suf[j + 1] * (1.0 - lam[j])
            p_x = suf[0]
            for s in range(S):
                a_vec[s] = p_x * tapes[c, p, center, s]
            for q in range(Q):
                qhat[q] = 0.0
            dh0 = 0.0
            dh1 = 0.0
            dh2 = 0.0
            for j in range(N):
                cj = lam[j] * suf[j + 1]
                if cj != 0.0:
                    for s in range(S):
                        a_vec[s] += cj * sprime[j, s]
                    for q in range(Q):
                        qhat[q] += cj * qprime[j, q]
                    dh0 += cj * dmat[j, 0]
                    dh1 += cj * dmat[j, 1]
                    dh2 += cj * dmat[j, 2]
            p_l = dh0
            p_s = dh1 + p_x
            p_r = dh2
            ssum = 0.0
            for q in range(Q):
                ssum += p_x * states[c, p, q] + qhat[q]
            for u in range(U):
                acc_row = 0.0
                for s in range(S):
                    wc = a_vec[s] if u == center else tapes[c, p, u, s]
                    acc = p_s * wc
                    if u - 1 >= 0:
                        wl = a_vec[s] if u - 1 == center else tapes[c, p, u - 1, s]
                        acc += p_l * wl
                    elif s == blank_idx:
                        acc += p_l
                    if u + 1 < U:
                        wr = a_vec[s] if u + 1 == center else tapes[c, p, u + 1, s]
                        acc += p_r * wr
                    elif s == blank_idx:
                        acc += p_r
                    acc_row += acc
                rowsum[u] = acc_row

            # Renormalization adjoint using the stored normalized outputs.
            dot = 0.0
            for q in range(Q):
                dot += bar_state[p, q] * states[c + 1, p, q]
            for q in range(Q):
                bs[q] = (bar_state[p, q] - dot) / ssum
            for u in range(U):
                dotu = 0.0
                for s in range(S):
                    dotu += bar_tape[p, u, s] * tapes[c + 1, p, u, s]
                for s in range(S):
                    bt[u, s] = (bar_tape[p, u, s] - dotu) / rowsum[u]

            # Mixing backward: bar of (p_l, p_s, p_r) and of the written tape.
            bar_pl = bt[0, blank_idx]
            bar_ps = 0.0
            bar_pr = bt[U - 1, blank_idx]
            for u in range(U):
                for s in range(S):
                    w_u = a_vec[s] if u == center else tapes[c, p, u, s]
                    bar_ps += bt[u, s] * w_u
                    if u + 1 < U:
                        w_next = a_vec[s] if u + 1 == center else tapes[c, p, u + 1, s]
                        bar_pl += bt[u + 1, s] * w_u
                        bar_pr += bt[u, s] * w_next
            for s in range(S):
                bar_a[s] = 0.0
            for u in range(U):
                for s in range(S):
                    acc = p_s * bt[u, s]
                    if u + 1 < U:
                        acc += p_l * bt[u + 1, s]
                    if u - 1 >= 0:
                        acc += p_r * bt[u - 1, s]
                    if u == center:
                        bar_a[s] = acc
                        nxt_tape[p, u, s] = 0.0
                    else:
                        nxt_tape[p, u, s] = acc

            bar_px = bar_ps
            for q in range(Q):
                bar_px += bs[q] * states[c, p, q]
            for s in range(S):
                bar_px += bar_a[s] * tapes[c, p, center, s]
                bar_y0[s] = p_x * bar_a[s]
            for q in range(Q):
                nxt_state[p, q] = p_x * bs[q]
            bar_dhat[0] = bar_pl
            bar_dhat[1] = bar_ps
            bar_dhat[2] = bar_pr

            for j in range(N):
                bc = 0.0
                for s in range(S):
                    bc += bar_a[s] * sprime[j, s]
                for q in range(Q):
                    bc += bs[q] * qprime[j, q]
                for d in range(3):
                    bc += bar_dhat[d] * dmat[j, d]
                cj = lam[j] * suf[j + 1]
                for s in range(S):
                    g_s[j, s] += cj * bar_a[s]
                for q in range(Q):
                    g_q[j, q] += cj * bs[q]
                for d in range(3):
                    g_d[j, d] += cj * bar_dhat[d]
                bar_lam[j] = bc * suf[j + 1]
                bar_suf[j + 1] = bc * lam[j]
            bar_suf[0] = bar_px
            for j in range(N):
                bar_suf[j + 1] += bar_suf[j] * (1.0 - lam[j])
                bar_lam[j] -= bar_suf[j] * suf[j + 1]
            for i in range(N):
                bar_y0[tsig[i]] += bar_lam[i] * states[c, p, tst[i]]
                nxt_state[p, tst[i]] += bar_lam[i] * tapes[c, p, center, tsig[i]]
            for s in range(S):
                nxt_tape[p, center, s] += bar_y0[s]
        bar_tape[:, :, :] = nxt_tape
        bar_state[:, :] = nxt_state
    return bar_tape, bar_state, g_s, g_q, g_d


# ---------------------------------------------------------------------------
# dispatch


def forward_cycles(tape0, state0, sprime, qprime, dmat, tsig, tst, center,
                   blank_idx, t):
    """Run t cycles; returns the full (t+1)-long tape and state trajectories."""
    args = (np.ascontiguousarray(tape0), np.ascontiguousarray(state0),
            sprime, qprime, dmat, tsig, tst, center, blank_idx, t)
    if _HAVE_NUMBA:
        return _forward_nb(*args)
    return _forward_np(*args)


def vjp_cycles(tapes, states, sprime, qprime, dmat, tsig, tst, center,
               blank_idx, bar_tape, bar_state):
    """Reverse pass over a stored trajectory.

    Given cotangents for the final (renormalized) tape and state, returns
    cotangents for the initial tape and state plus gradients with respect
    to the raw code coordinates (sprime, qprime, dmat).
    """
    if _HAVE_NUMBA:
        return _vjp_nb(tapes, states, sprime, qprime, dmat, tsig, tst, center,
                       blank_idx, np.ascontiguousarray(bar_tape),
                       np.ascontiguousarray(bar_state))
    return _vjp_np(tapes, states, sprime, qprime, dmat, tsig, tst, center,
                   blank_idx, bar_tape, bar_state)


def staging_recursive(lam, sprime, qprime, dmat):
    """Staging distributions by the step-by-step recursion (test oracle).

    Processes tuples one at a time: with probability lam_i the tuple's
    entries replace the staged values, otherwise the previous staging state
    survives. Returns (shat, shat_X, qhat, qhat_X, dhat, dhat_X) after all
    N tuples, starting from the pure-X staging state.
    """
    N, S = sprime.shape
    Q = qprime.shape[1]
    shat = np.zeros(S)
    qhat = np.zeros(Q)
    dhat = np.zeros(3)
    sx = qx = dx = 1.0
    for i in range(N):
        li = lam[i]
        shat = li * sprime[i] + (1.0 - li) * shat
        sx = (1.0 - li) * sx
        qhat = li * qprime[i] + (1.0 - li) * qhat
        qx = (1.0 - li) * qx
        dhat = li * dmat[i] + (1.0 - li) * dhat
        dx = (1.0 - li) * dx
    return shat, sx, qhat, qx, dhat, dx


def staging_closed_form(lam, sprime, qprime, dmat):
    """Staging distributions by the closed-form suffix products."""
    N = lam.shape[0]
    suf = np.empty(N + 1)
    suf[N] = 1.0
    for j in range(N - 1, -1, -1):
        suf[j] = suf[j + 1] * (1.0 - lam[j])
    coeff = lam * suf[1:]
    return (coeff @ sprime, suf[0], coeff @ qprime, suf[0], coeff @ dmat, suf[0])
