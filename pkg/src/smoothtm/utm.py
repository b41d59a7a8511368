"""The staged pseudo-UTM: a classical four-tape reference simulator and the
direct simulation that collapses one full UTM period into a single smooth
update of the simulated work tape and state.

The pseudo-UTM's tape alphabet is the disjoint union of the simulated
machine's symbols, its states, the three directions, the marker X and the
UTM blank; atoms are tagged tuples so that, e.g., a simulated symbol "X"
(parityCheck) never collides with the marker.

The direct simulation is the production path for the model p(y|x,w): the
full smooth UTM is never stepped, only the per-cycle closed forms (see
kernels). Gradients are reverse accumulated through the cycle recurrences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .code import CodeParameter, decode, encode, is_vertex
from .machines import BLANK, MachineError, TransitionTable, run, initial_config
from .smooth import SmoothConfig
from .simplex import Alphabet

_MOVE = {"L": -1, "S": 0, "R": 1}

LOGP_CLAMP = 1e-300


@dataclass(frozen=True)
class UtmHyper:
    """Cycle bookkeeping: N description tuples give a UTM period of 10N+5."""

    t: int
    num_tuples: int

    @property
    def period(self) -> int:
        return 10 * self.num_tuples + 5


# ---------------------------------------------------------------------------
# Classical reference: step-accurate staged four-tape machine.
#
# Tapes: description (0), staging (1), state (2), working (3). One period:
# a scan phase of one step per description square (5N steps, branching on
# the work/state comparisons and copying the matched tuple's last three
# entries to the staging tape), the final-X detection step, three update
# steps (write symbol, update state, move the work head), and the reset
# sweep of the description head back to the initial X.

_MARKER = ("X",)
_UBLANK = ("blank",)


def _desc_tape(table: TransitionTable):
    from .code import tuple_indices

    tsig, tst = tuple_indices(table.sigma, table.states)
    cells = [_MARKER]
    for a, b in zip(tsig, tst):
        s = table.sigma.symbols[a]
        q = table.states.symbols[b]
        w, nq, d = table.delta[(s, q)]
        cells += [("sym", s), ("state", q), ("sym", w), ("state", nq), ("dir", d)]
    cells.append(_MARKER)
    return cells


class UtmTrace:
    """Diagnostics collected by utm_reference_run."""

    def __init__(self):
        self.desc_head = []
        self.utm_state = []
        self.state_tape = []

    def assert_periodic(self, num_tuples: int, cycles: int):
        T = 10 * num_tuples + 5
        for c in range(cycles + 1):
            if c * T < len(self.desc_head):
                assert self.desc_head[c * T] == 1, "description head off period"
                assert self.utm_state[c * T] == "compSymbol", "phase off period"
        for c in range(cycles):
            step = c * T + (T - 1)
            if step < len(self.desc_head):
                assert self.desc_head[step] == 0, "initial X not revisited"
        return T


def utm_reference_run(table_or_code, x, t: int, trace: UtmTrace | None = None):
    """Classically simulate the staged pseudo-UTM for t full periods.

    Returns the simulated machine's state atom. Only vertex codes make
    sense here; CodeParameter inputs are decoded (and rejected when they
    are not vertices).
    """
    if isinstance(table_or_code, CodeParameter):
        if not is_vertex(table_or_code):
            raise MachineError("reference UTM simulates vertex codes only")
        table = decode(table_or_code)
    else:
        table = table_or_code
    desc = _desc_tape(table)
    staging = {0: _MARKER, 1: _MARKER, 2: _MARKER}
    work = {}
    pos = 0
    for ch in x:
        if ch == BLANK:
            continue
        work[pos] = ch
        pos += 1
    hd, hg, hw = 1, 1, 0
    sim_state = table.initial_state
    utm_state = "compSymbol"
    total = t * (10 * table_kernel_size(table) + 5)

    def record():
        if trace is not None:
            trace.desc_head.append(hd)
            trace.utm_state.append(utm_state)
            trace.state_tape.append(sim_state)

    record()
    for _ in range(total):
        if utm_state == "compSymbol":
            a = desc[hd]
            if a == _MARKER:
                staged = staging.get(hg, _UBLANK)
                assert staged[0] == "state", "no tuple matched during the scan"
                utm_state, hg = "updateSymbol", hg - 1
            else:
                w = work.get(hw, BLANK)
                utm_state = "compState" if a == ("sym", w) else "NcompState"
                hd += 1
        elif utm_state == "compState":
            b = desc[hd]
            utm_state = "copySymbol" if b == ("state", sim_state) else "NcopySymbol"
            hd += 1
        elif utm_state == "NcompState":
            utm_state, hd = "NcopySymbol", hd + 1
        elif utm_state == "copySymbol":
            staging[hg] = desc[hd]
            utm_state, hg, hd = "copyState", hg + 1, hd + 1
        elif utm_state == "copyState":
            staging[hg] = desc[hd]
            utm_state, hg, hd = "copyDir", hg + 1, hd + 1
        elif utm_state == "copyDir":
            staging[hg] = desc[hd]
            utm_state, hg, hd = "compSymbol", hg - 1, hd + 1
        elif utm_state == "NcopySymbol":
            utm_state, hd = "NcopyState", hd + 1
        elif utm_state == "NcopyState":
            utm_state, hd = "NcopyDir", hd + 1
        elif utm_state == "NcopyDir":
            utm_state, hd = "compSymbol", hd + 1
        elif utm_state == "updateSymbol":
            v = staging[hg]
            assert v[0] == "sym"
            work[hw] = v[1]
            staging[hg] = _MARKER
            utm_state, hg = "updateState", hg + 1
        elif utm_state == "updateState":
            v = staging[hg]
            assert v[0] == "state"
            sim_state = v[1]
            staging[hg] = _MARKER
            utm_state, hg = "updateDir", hg + 1
        elif utm_state == "updateDir":
            v = staging[hg]
            assert v[0] == "dir"
            hw += _MOVE[v[1]]
            staging[hg] = _UBLANK
            utm_state, hg, hd = "resetDescr", hg - 1, hd - 1
        elif utm_state == "resetDescr":
            if desc[hd] == _MARKER:
                utm_state, hd, hg = "compSymbol", hd + 1, hg - 1
            else:
                hd -= 1
        record()
    assert staging == {0: _MARKER, 1: _MARKER, 2: _MARKER, 3: _UBLANK} or t == 0
    if trace is not None:
        trace.assert_periodic(table_kernel_size(table), t)
    return sim_state


def table_kernel_size(table: TransitionTable) -> int:
    return len(table.sigma) * len(table.states)


# ---------------------------------------------------------------------------
# Direct simulation


def _code_arrays(code: CodeParameter):
    tsig, tst = code.tuple_indices()
    return (np.ascontiguousarray(code.sprime), np.ascontiguousarray(code.qprime),
            np.ascontiguousarray(code.dmat), tsig, tst)


def work_config(code: CodeParameter, x, t: int, batch: int = 1) -> SmoothConfig:
    """Initial work tape for input x with a window able to absorb t cycles."""
    xs = [c for c in x if c != BLANK]
    for c in xs:
        if c not in code.sigma:
            raise MachineError(f"input symbol {c!r} not in tape alphabet")
    margin = t + 1
    width = len(xs) + 2 * margin
    ns = len(code.sigma)
    tape = np.zeros((batch, width, ns))
    tape[:, :, code.sigma.index(BLANK)] = 1.0
    for k, c in enumerate(xs):
        tape[:, margin + k, :] = 0.0
        tape[:, margin + k, code.sigma.index(c)] = 1.0
    state = np.zeros((batch, len(code.states)))
    state[:, code.states.index(code.initial_state)] = 1.0
    return SmoothConfig(tape, state, margin, code.sigma, code.states, t)


def direct_cycle(config: SmoothConfig, code: CodeParameter) -> SmoothConfig:
    """One full simulated step (one UTM period) on a smooth configuration."""
    out = run_cycles(config, code, 1)
    return out


def run_cycles(config: SmoothConfig, code: CodeParameter, t: int,
               return_trajectory: bool = False):
    if t > config.steps_left:
        raise MachineError(
            f"window supports {config.steps_left} more cycles, asked for {t}"
        )
    sp, qp, dm, tsig, tst = _code_arrays(code)
    blank_idx = code.sigma.index(BLANK)
    tapes, states = kernels.forward_cycles(
        config.tape, config.state, sp, qp, dm, tsig, tst, config.center,
        blank_idx, t,
    )
    final = SmoothConfig(tapes[t], states[t], config.center, config.sigma,
                         config.states, config.steps_left - t)
    if return_trajectory:
        return final, tapes, states
    return final


def delta_step_t(x, code: CodeParameter, t: int) -> np.ndarray:
    """The model p(y|x,w): state marginal after t direct cycles."""
    config = work_config(code, x, t)
    return run_cycles(config, code, t).state[0]


def direct_cycle_gradient(config: SmoothConfig, code: CodeParameter,
                          bar_tape: np.ndarray, bar_state: np.ndarray):
    """VJP of one cycle: cotangents on the output tape/state give gradients
    with respect to the raw code coordinates plus cotangents on the inputs."""
    return cycles_gradient(config, code, 1, bar_tape, bar_state)


def cycles_gradient(config: SmoothConfig, code: CodeParameter, t: int,
                    bar_tape: np.ndarray, bar_state: np.ndarray):
    sp, qp, dm, tsig, tst = _code_arrays(code)
    blank_idx = code.sigma.index(BLANK)
    tapes, states = kernels.forward_cycles(
        config.tape, config.state, sp, qp, dm, tsig, tst, config.center,
        blank_idx, t,
    )
    if bar_tape is None:
        bar_tape = np.zeros_like(config.tape)
    bar_tape0, bar_state0, g_s, g_q, g_d = kernels.vjp_cycles(
        tapes, states, sp, qp, dm, tsig, tst, config.center, blank_idx,
        bar_tape, bar_state,
    )
    return CodeGradient(g_s, g_q, g_d), bar_tape0, bar_state0


@dataclass
class CodeGradient:
    """Gradient with respect to the raw (redundant) code coordinates."""

    sprime: np.ndarray
    qprime: np.ndarray
    dmat: np.ndarray

    def free_vector(self) -> np.ndarray:
        """Gradient with respect to the free coordinates.

        Each size-k simplex is parameterized by its first k-1 weights with
        the last weight dependent; the free gradient of weight j is the raw
        gradient at j minus the raw gradient at the dependent coordinate.
        Layout: per tuple, sprime then qprime then move, tuples in order.
        """
        s_free = self.sprime[:, :-1] - self.sprime[:, -1:]
        q_free = self.qprime[:, :-1] - self.qprime[:, -1:]
        d_free = self.dmat[:, :-1] - self.dmat[:, -1:]
        return np.concatenate([s_free, q_free, d_free], axis=1).ravel()


def logp_state(x, code: CodeParameter, t: int, y_state) -> float:
    """log p(y|x,w) with the documented clamp at 1e-300."""
    dist = delta_step_t(x, code, t)
    p = dist[code.states.index(y_state)]
    return float(np.log(max(p, LOGP_CLAMP)))


def logp_grad_batch(tape0, state0, code: CodeParameter, t: int,
                    y_idx: np.ndarray, counts: np.ndarray, center: int):
    """Sum of counts * log p over a batch, and its raw-coordinate gradient.

    The cotangent seeding uses 1/max(p, clamp) so boundary-adjacent codes
    keep a finite, uphill-pointing gradient.
    """
    sp, qp, dm, tsig, tst = _code_arrays(code)
    blank_idx = code.sigma.index(BLANK)
    tapes, states = kernels.forward_cycles(
        tape0, state0, sp, qp, dm, tsig, tst, center, blank_idx, t)
    P = tape0.shape[0]
    p_y = states[t][np.arange(P), y_idx]
    p_safe = np.maximum(p_y, LOGP_CLAMP)
    total = float(np.dot(counts, np.log(p_safe)))
    bar_state = np.zeros_like(states[t])
    bar_state[np.arange(P), y_idx] = counts / p_safe
    bar_tape = np.zeros_like(tape0)
    _, _, g_s, g_q, g_d = kernels.vjp_cycles(
        tapes, states, sp, qp, dm, tsig, tst, center, blank_idx,
        bar_tape, bar_state,
    )
    clamped = bool(np.any(p_y < LOGP_CLAMP))
    return total, CodeGradient(g_s, g_q, g_d), p_y, clamped
