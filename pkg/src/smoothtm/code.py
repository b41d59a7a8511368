"""Machine codes as points of a product of simplices.

A code assigns to every description tuple i (one per (symbol, state) match
pair) three distributions: the written symbol P(s'_i), the next state
P(q'_i) and the move P(d_i). Tuple order is lexicographic in the declared
(sigma, state) orders; the order is part of the serialized artifact since
the staging formulas consume tuples in sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .machines import TransitionTable, MachineError
from .simplex import Alphabet, check_dist

_DIR_COL = {"L": 0, "S": 1, "R": 2}
_DIRS = ("L", "S", "R")


@dataclass
class CodeParameter:
    """Point of W: per-tuple (write, next-state, move) distributions.

    tsig/tst give the matched (symbol, state) index pair of each tuple;
    together they enumerate Sigma x Q exactly once.
    """

    sigma: Alphabet
    states: Alphabet
    sprime: np.ndarray  # (N, |Sigma|)
    qprime: np.ndarray  # (N, |Q|)
    dmat: np.ndarray    # (N, 3)
    initial_state: str

    def __post_init__(self):
        n = self.num_tuples
        if self.sprime.shape != (n, len(self.sigma)):
            raise MachineError("sprime shape mismatch")
        if self.qprime.shape != (n, len(self.states)):
            raise MachineError("qprime shape mismatch")
        if self.dmat.shape != (n, 3):
            raise MachineError("dmat shape mismatch")

    @property
    def num_tuples(self) -> int:
        return len(self.sigma) * len(self.states)

    @property
    def dim(self) -> int:
        """Dimension of the free parameter space."""
        return self.num_tuples * ((len(self.sigma) - 1) + (len(self.states) - 1) + 2)

    def tuple_indices(self):
        return tuple_indices(self.sigma, self.states)

    def validate(self):
        for i in range(self.num_tuples):
            check_dist(self.sprime[i], self.sigma)
            check_dist(self.qprime[i], self.states)
            check_dist(self.dmat[i])
        return self

    def copy(self) -> "CodeParameter":
        return CodeParameter(self.sigma, self.states, self.sprime.copy(),
                             self.qprime.copy(), self.dmat.copy(),
                             self.initial_state)


def tuple_indices(sigma: Alphabet, states: Alphabet):
    """Lexicographic (symbol, state) match pair per description tuple."""
    n_st = len(states)
    count = len(sigma) * n_st
    tsig = np.array([i // n_st for i in range(count)], dtype=np.int64)
    tst = np.array([i % n_st for i in range(count)], dtype=np.int64)
    return tsig, tst


def encode(table: TransitionTable) -> CodeParameter:
    """Vertex code of a classical transition table."""
    tsig, tst = tuple_indices(table.sigma, table.states)
    n = len(tsig)
    sprime = np.zeros((n, len(table.sigma)))
    qprime = np.zeros((n, len(table.states)))
    dmat = np.zeros((n, 3))
    for i in range(n):
        s = table.sigma.symbols[tsig[i]]
        q = table.states.symbols[tst[i]]
        w, nq, d = table.delta[(s, q)]
        sprime[i, table.sigma.index(w)] = 1.0
        qprime[i, table.states.index(nq)] = 1.0
        dmat[i, _DIR_COL[d]] = 1.0
    return CodeParameter(table.sigma, table.states, sprime, qprime, dmat,
                         table.initial_state)


def decode(code: CodeParameter) -> TransitionTable:
    """Inverse of encode; requires a vertex code."""
    tsig, tst = code.tuple_indices()
    delta = {}
    for i in range(code.num_tuples):
        for arr, name in ((code.sprime[i], "sprime"), (code.qprime[i], "qprime"),
                          (code.dmat[i], "dmat")):
            if not np.all(np.isin(arr, (0.0, 1.0))):
                raise MachineError(f"non-vertex code ({name} of tuple {i})")
        s = code.sigma.symbols[tsig[i]]
        q = code.states.symbols[tst[i]]
        delta[(s, q)] = (
            code.sigma.symbols[int(np.argmax(code.sprime[i]))],
            code.states.symbols[int(np.argmax(code.qprime[i]))],
            _DIRS[int(np.argmax(code.dmat[i]))],
        )
    return TransitionTable(code.sigma, code.states, delta, code.initial_state)


def is_vertex(code: CodeParameter) -> bool:
    return (np.all(np.isin(code.sprime, (0.0, 1.0)))
            and np.all(np.isin(code.qprime, (0.0, 1.0)))
            and np.all(np.isin(code.dmat, (0.0, 1.0))))


def random_code(sigma: Alphabet, states: Alphabet, initial_state, rng,
                alpha: float = 1.0) -> CodeParameter:
    """Dirichlet(alpha) draw for every tuple distribution."""
    n = len(sigma) * len(states)
    return CodeParameter(
        sigma, states,
        rng.dirichlet(alpha * np.ones(len(sigma)), size=n),
        rng.dirichlet(alpha * np.ones(len(states)), size=n),
        rng.dirichlet(alpha * np.ones(3), size=n),
        initial_state,
    )


def uniform_code(sigma: Alphabet, states: Alphabet, initial_state) -> CodeParameter:
    n = len(sigma) * len(states)
    return CodeParameter(
        sigma, states,
        np.full((n, len(sigma)), 1.0 / len(sigma)),
        np.full((n, len(states)), 1.0 / len(states)),
        np.full((n, 3), 1.0 / 3.0),
        initial_state,
    )


# ---------------------------------------------------------------------------
# Checkpoint format: JSON header with alphabets and tuple order, flat float
# arrays per tuple. json round-trips Python floats through repr, so the
# round trip is bit-exact.


def code_to_json(code: CodeParameter) -> str:
    tsig, tst = code.tuple_indices()
    doc = {
        "sigma": list(code.sigma.symbols),
        "states": list(code.states.symbols),
        "initial_state": code.initial_state,
        "tuple_order": [[code.sigma.symbols[a], code.states.symbols[b]]
                        for a, b in zip(tsig, tst)],
        "sprime": code.sprime.tolist(),
        "qprime": code.qprime.tolist(),
        "dmat": code.dmat.tolist(),
    }
    return json.dumps(doc, indent=1)


def code_from_json(text: str) -> CodeParameter:
    doc = json.loads(text)
    sigma = Alphabet(tuple(doc["sigma"]))
    states = Alphabet(tuple(doc["states"]))
    code = CodeParameter(
        sigma, states,
        np.array(doc["sprime"], dtype=np.float64),
        np.array(doc["qprime"], dtype=np.float64),
        np.array(doc["dmat"], dtype=np.float64),
        doc["initial_state"],
    )
    tsig, tst = code.tuple_indices()
    expected = [[sigma.symbols[a], states.symbols[b]] for a, b in zip(tsig, tst)]
    if doc.get("tuple_order") != expected:
        raise MachineError("checkpoint tuple order does not match lexicographic order")
    return code


def save_code(code: CodeParameter, path):
    with open(path, "w") as f:
        f.write(code_to_json(code))


def load_code(path) -> CodeParameter:
    with open(path) as f:
        return code_from_json(f.read())
