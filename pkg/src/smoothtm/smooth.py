"""Smooth relaxation of a single-tape Turing machine.

State of the system is a tape of distributions over the tape alphabet plus a
distribution over machine states. One smooth step pushes the pair forward
under the naive conditional-independence update: the move, write and
next-state marginals are bilinear in (cell under the head, state), and each
tape cell is the L/S/R mixture of its shifted neighbours with the write
marginal inserted next to the head.

The tape is stored head-relative: the head is always the `center` column and
movement re-indexes the window instead of moving a head pointer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .machines import BLANK, TransitionTable, WindowError, _MOVE
from .simplex import Alphabet, embed


@dataclass
class SmoothConfig:
    """Batched smooth configuration: tape (B, U, S), state (B, Q).

    Cells outside the window are the blank vertex. `steps_left` tracks how
    many more steps the window can absorb before content could reach an
    edge; smooth_step refuses to run past that.
    """

    tape: np.ndarray
    state: np.ndarray
    center: int
    sigma: Alphabet
    states: Alphabet
    steps_left: int

    @property
    def batch(self) -> int:
        return self.tape.shape[0]

    def cell(self, u: int, b: int = 0) -> np.ndarray:
        """Marginal of the cell at head-relative position u."""
        return self.tape[b, self.center + u, :]

    def copy(self) -> "SmoothConfig":
        return SmoothConfig(
            self.tape.copy(), self.state.copy(), self.center,
            self.sigma, self.states, self.steps_left,
        )


def table_tensors(table: TransitionTable):
    """One-hot (S, Q, ·) tensors for write symbol, next state and move."""
    ns, nq = len(table.sigma), len(table.states)
    m_write = np.zeros((ns, nq, ns))
    m_next = np.zeros((ns, nq, nq))
    m_move = np.zeros((ns, nq, 3))
    for i, s in enumerate(table.sigma):
        for j, q in enumerate(table.states):
            w, nxt, d = table.delta[(s, q)]
            m_write[i, j, table.sigma.index(w)] = 1.0
            m_next[i, j, table.states.index(nxt)] = 1.0
            m_move[i, j, {"L": 0, "S": 1, "R": 2}[d]] = 1.0
    return m_write, m_next, m_move


def smooth_config(table: TransitionTable, input_str, t_budget: int,
                  batch: int = 1) -> SmoothConfig:
    """Vertex configuration for a classical input string."""
    x = [c for c in input_str if c != BLANK]
    ns = len(table.sigma)
    margin = t_budget + 1
    width = len(x) + 2 * margin
    tape = np.zeros((batch, width, ns))
    tape[:, :, table.sigma.index(BLANK)] = 1.0
    for k, c in enumerate(x):
        tape[:, margin + k, :] = 0.0
        tape[:, margin + k, table.sigma.index(c)] = 1.0
    state = np.zeros((batch, len(table.states)))
    state[:, table.states.index(table.initial_state)] = 1.0
    return SmoothConfig(tape, state, margin, table.sigma, table.states, t_budget)


def smooth_step(table: TransitionTable, c: SmoothConfig) -> SmoothConfig:
    """One step of the smooth dynamical system."""
    if c.steps_left <= 0:
        raise WindowError("smooth window exhausted; allocate a larger t budget")
    m_write, m_next, m_move = table_tensors(table)
    tape, state = c.tape, c.state
    y0 = tape[:, c.center, :]                       # (B, S)
    joint = np.einsum("bs,bq->bsq", y0, state)      # (B, S, Q)
    mv = np.einsum("bsq,sqd->bd", joint, m_move)    # (B, 3)
    wr = np.einsum("bsq,sqt->bt", joint, m_write)   # (B, S)
    new_state = np.einsum("bsq,sqr->br", joint, m_next)

    written = tape.copy()
    written[:, c.center, :] = wr
    blank = embed(BLANK, table.sigma)
    # Head moves left => contents shift right relative to the head; edge
    # cells pull in the blank vertex.
    left = np.empty_like(written)
    left[:, 1:, :] = written[:, :-1, :]
    left[:, 0, :] = blank
    right = np.empty_like(written)
    right[:, :-1, :] = written[:, 1:, :]
    right[:, -1, :] = blank
    new_tape = (
        mv[:, 0:1, None] * left + mv[:, 1:2, None] * written + mv[:, 2:3, None] * right
    )
    # Renormalize: the exact dynamics preserve the simplices, but round-off
    # perturbations off the probability manifold are amplified step over
    # step, so long runs need the drift killed every step.
    new_tape /= new_tape.sum(axis=2, keepdims=True)
    new_state /= new_state.sum(axis=1, keepdims=True)
    return SmoothConfig(
        new_tape, new_state, c.center, c.sigma, c.states, c.steps_left - 1
    )


def smooth_run(table: TransitionTable, c: SmoothConfig, t: int) -> SmoothConfig:
    for _ in range(t):
        c = smooth_step(table, c)
    return c


def classical_to_smooth(table: TransitionTable, config) -> SmoothConfig:
    """Embed a classical TapeConfig at the vertices of the simplices."""
    ns = len(table.sigma)
    width = len(config.cells)
    tape = np.zeros((1, width, ns))
    for k, s in enumerate(config.cells):
        tape[0, k, table.sigma.index(s)] = 1.0
    # Re-index so the head is the center column: pad so both layouts agree.
    state = np.zeros((1, len(table.states)))
    state[0, table.states.index(config.state)] = 1.0
    return SmoothConfig(
        tape, state, config.head, table.sigma, table.states,
        min(config.head, width - 1 - config.head),
    )
