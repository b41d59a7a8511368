"""Stick-breaking bijection between R^(K-1) and the open interior of the
K-simplex, with log-Jacobian and a hand-rolled VJP.

The breaking fractions carry the usual offset log(K-k) so that z = 0 maps
to the uniform point. Pushing a uniform density on the simplex to z-space
multiplies it by exp(log_jacobian), which is what the sampler adds to the
log-target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .code import CodeParameter
from .simplex import Alphabet


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def to_simplex(z: np.ndarray):
    """Map z in R^(K-1) to an interior simplex point; returns (w, logdet)."""
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite unconstrained coordinates")
    k = z.shape[0] + 1
    offs = -np.log(np.arange(k - 1, 0, -1, dtype=np.float64))
    v = _sigmoid(z + offs)
    w = np.empty(k)
    stick = 1.0
    logdet = 0.0
    # Extreme coordinates can underflow a stick to zero; the -inf logdet
    # then zeroes the density, which the sampler treats as a rejection.
    with np.errstate(divide="ignore"):
        for i in range(k - 1):
            w[i] = stick * v[i]
            logdet += np.log(v[i]) + np.log1p(-v[i]) + np.log(stick)
            stick *= 1.0 - v[i]
    w[k - 1] = stick
    return w, float(logdet)


def from_simplex(w: np.ndarray) -> np.ndarray:
    """Inverse of to_simplex; requires an interior point."""
    w = np.asarray(w, dtype=np.float64)
    k = w.shape[0]
    if np.any(w <= 0):
        raise ValueError("from_simplex needs a strictly interior point")
    z = np.empty(k - 1)
    stick = 1.0
    for i in range(k - 1):
        v = w[i] / stick
        z[i] = np.log(v) - np.log1p(-v) + np.log(k - 1 - i)
        stick -= w[i]
    return z


def vjp_to_simplex(z: np.ndarray, bar_w: np.ndarray, bar_logdet: float) -> np.ndarray:
    """Backward pass of to_simplex for cotangents on (w, logdet)."""
    z = np.asarray(z, dtype=np.float64)
    k = z.shape[0] + 1
    offs = -np.log(np.arange(k - 1, 0, -1, dtype=np.float64))
    v = _sigmoid(z + offs)
    sticks = np.empty(k)  # stick before break i; sticks[k-1] = final w[k-1]
    sticks[0] = 1.0
    for i in range(k - 1):
        sticks[i + 1] = sticks[i] * (1.0 - v[i])
    bar_z = np.empty(k - 1)
    bar_stick = bar_w[k - 1]
    errstate = np.errstate(divide="ignore", over="ignore", invalid="ignore")
    with errstate:
        for i in range(k - 2, -1, -1):
            # The logdet term contracts to bar_logdet * (1 - 2v), which
            # stays finite where 1/v or 1/(1-v) would overflow; a zero
            # stick still yields non-finite output, rejected downstream.
            bar_z[i] = ((bar_w[i] - bar_stick) * sticks[i] * v[i] * (1.0 - v[i])
                        + bar_logdet * (1.0 - 2.0 * v[i]))
            bar_stick = (bar_w[i] * v[i] + bar_stick * (1.0 - v[i])
                         + bar_logdet / sticks[i])
    return bar_z


# ---------------------------------------------------------------------------
# The product space of one code: per description tuple a (write, state,
# move) triple of simplices, flattened in tuple order.


@dataclass(frozen=True)
class CodeSpace:
    sigma: Alphabet
    states: Alphabet
    initial_state: str

    @property
    def num_tuples(self) -> int:
        return len(self.sigma) * len(self.states)

    @property
    def block_sizes(self):
        return (len(self.sigma), len(self.states), 3)

    @property
    def dim(self) -> int:
        return self.num_tuples * sum(k - 1 for k in self.block_sizes)

    def log_volume(self) -> float:
        """log of the simplex-product volume in free (first k-1) coordinates:
        each k-simplex contributes 1/(k-1)!."""
        from math import lgamma
        per_tuple = sum(-lgamma(k) for k in self.block_sizes)
        return self.num_tuples * per_tuple

    def _blocks(self):
        for _ in range(self.num_tuples):
            for k in self.block_sizes:
                yield k

    def z_to_code(self, z: np.ndarray):
        """Unconstrained vector to (CodeParameter, total log-Jacobian)."""
        if z.shape != (self.dim,):
            raise ValueError(f"expected dim {self.dim}, got {z.shape}")
        n = self.num_tuples
        sprime = np.empty((n, len(self.sigma)))
        qprime = np.empty((n, len(self.states)))
        dmat = np.empty((n, 3))
        outs = (sprime, qprime, dmat)
        pos = 0
        logdet = 0.0
        for i in range(n):
            for arr, k in zip(outs, self.block_sizes):
                w, ld = to_simplex(z[pos:pos + k - 1])
                arr[i] = w
                logdet += ld
                pos += k - 1
        code = CodeParameter(self.sigma, self.states, sprime, qprime, dmat,
                             self.initial_state)
        return code, logdet

    def code_to_z(self, code: CodeParameter) -> np.ndarray:
        z = np.empty(self.dim)
        pos = 0
        arrs = (code.sprime, code.qprime, code.dmat)
        for i in range(self.num_tuples):
            for arr, k in zip(arrs, self.block_sizes):
                z[pos:pos + k - 1] = from_simplex(arr[i])
                pos += k - 1
        return z

    def chain_gradient(self, z: np.ndarray, code_grad, bar_logdet: float) -> np.ndarray:
        """Pull a raw-coordinate code gradient (plus a logdet cotangent)
        back to z-space."""
        bar_z = np.empty(self.dim)
        pos = 0
        arrs = (code_grad.sprime, code_grad.qprime, code_grad.dmat)
        for i in range(self.num_tuples):
            for arr, k in zip(arrs, self.block_sizes):
                bar_z[pos:pos + k - 1] = vjp_to_simplex(
                    z[pos:pos + k - 1], arr[i], bar_logdet)
                pos += k - 1
        return bar_z

    def dirichlet_point(self, alpha: float, rng) -> np.ndarray:
        """z-image of a symmetric Dirichlet(alpha) draw on every simplex."""
        n = self.num_tuples
        z = np.empty(self.dim)
        pos = 0
        for i in range(n):
            for k in self.block_sizes:
                w = rng.dirichlet(alpha * np.ones(k))
                # Clip away from the boundary so the logit map stays finite.
                w = np.clip(w, 1e-12, None)
                w = w / w.sum()
                z[pos:pos + k - 1] = from_simplex(w)
                pos += k - 1
        return z
