"""Finite alphabets and probability vectors over them.

Distributions are plain float64 numpy arrays indexed by an Alphabet's symbol
order. Everything downstream (machine codes, tape cells, state marginals)
is built out of these.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Weights are renormalized after mixing; drift beyond these bounds is a bug,
# not round-off.
SUM_TOL = 1e-12
NEG_TOL = 1e-15

DIRECTIONS = ("L", "S", "R")


class SimplexError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct atoms (tape symbols, states or directions).

    The order is part of the identity: indices into distributions and the
    tuple order of machine codes are derived from it and serialized with
    any artifact that references them.
    """

    symbols: tuple
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        syms = tuple(self.symbols)
        if len(syms) == 0:
            raise SimplexError("alphabet must be nonempty")
        if len(set(syms)) != len(syms):
            raise SimplexError(f"duplicate symbols in alphabet {syms!r}")
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(syms)})

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def __iter__(self):
        return iter(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise SimplexError(
                f"symbol {symbol!r} not in alphabet {self.symbols!r}"
            ) from None


DIRECTION_ALPHABET = Alphabet(DIRECTIONS)


def embed(symbol, alphabet: Alphabet) -> np.ndarray:
    """Vertex distribution: all mass on one symbol."""
    d = np.zeros(len(alphabet))
    d[alphabet.index(symbol)] = 1.0
    return d


def check_dist(weights, alphabet: Alphabet | None = None) -> np.ndarray:
    """Validate a weight vector as a distribution; returns it as float64.

    Negative round-off above -NEG_TOL is clamped to zero; anything more
    negative is treated as a logic error.
    """
    w = np.asarray(weights, dtype=np.float64)
    if alphabet is not None and w.shape != (len(alphabet),):
        raise SimplexError(
            f"dimension {w.shape} does not match alphabet size {len(alphabet)}"
        )
    if np.any(w < -NEG_TOL):
        raise SimplexError(f"negative weight in {w!r}")
    w = np.where(w < 0.0, 0.0, w)
    s = w.sum()
    if abs(s - 1.0) > SUM_TOL:
        raise SimplexError(f"weights sum to {s!r}, not 1")
    return w


def mix(pairs) -> np.ndarray:
    """Convex combination of distributions sharing one alphabet.

    Distributions are positional arrays, so only dimension mismatches are
    detectable here. Contributions are accumulated in a canonical sort
    order, which makes the result bit-exactly invariant under permutation
    of the argument list; the final renormalization kills residual drift.
    """
    if not pairs:
        raise SimplexError("mix of nothing")
    coefs = np.array([c for c, _ in pairs], dtype=np.float64)
    if np.any(coefs < 0):
        raise SimplexError("negative mixing weight")
    if abs(coefs.sum() - 1.0) > 1e-9:
        raise SimplexError(f"mixing weights sum to {coefs.sum()!r}, not 1")
    dists = [np.asarray(d, dtype=np.float64) for _, d in pairs]
    dim = dists[0].shape
    for d in dists[1:]:
        if d.shape != dim:
            raise SimplexError("mixed distributions live on different alphabets")
    order = sorted(range(len(dists)),
                   key=lambda i: (coefs[i],) + tuple(dists[i]))
    out = np.zeros(dim)
    for i in order:
        out += coefs[i] * dists[i]
    out = np.where(out < 0.0, 0.0, out)
    return out / out.sum()


def entropy(dist) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    w = np.asarray(dist, dtype=np.float64)
    nz = w[w > 0.0]
    return float(-(nz * np.log(nz)).sum())
