"""Tempered-posterior sampling over machine codes.

The posterior over the unconstrained stick-breaking coordinates is

    log pi_beta(z) = beta * sum_i log p(y_i | x_i, w(z)) + log |J(z)|

with a uniform prior on the simplex product (the Jacobian term is the
prior pushforward). Sampling is the No-U-Turn sampler with slice
termination and dual-averaging step-size adaptation during burn-in; the
step size is frozen afterwards. Divergent transitions (energy error beyond
DELTA_MAX) are counted and flag the chain when they exceed 10% of draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .problems import Dataset, SynthesisProblem, loglik_dataset
from .stickbreak import CodeSpace
from .utm import CodeGradient

DELTA_MAX = 1000.0
MAX_TREE_DEPTH = 10


@dataclass
class TemperedPosterior:
    """log-density and gradient of the tempered posterior in z-space."""

    problem: SynthesisProblem
    dataset: Dataset
    beta: float
    space: CodeSpace = None

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.space is None:
            self.space = CodeSpace(self.problem.sigma, self.problem.states,
                                   self.problem.initial_state)

    @property
    def dim(self) -> int:
        return self.space.dim

    def logp_grad(self, z):
        """Returns (log density, gradient, nL_n at the mapped code)."""
        code, logdet = self.space.z_to_code(z)
        if self.beta == 0.0:
            grad_z = self.space.chain_gradient(
                z, _zero_gradient(code), bar_logdet=1.0)
            return logdet, grad_z, 0.0
        loglik, grad, _ = loglik_dataset(code, self.dataset, self.problem)
        scaled = CodeGradient(self.beta * grad.sprime, self.beta * grad.qprime,
                              self.beta * grad.dmat)
        grad_z = self.space.chain_gradient(z, scaled, bar_logdet=1.0)
        return self.beta * loglik + logdet, grad_z, -loglik

    def nln(self, z) -> float:
        code, _ = self.space.z_to_code(z)
        loglik, _, _ = loglik_dataset(code, self.dataset, self.problem,
                                      with_grad=False)
        return -loglik


def _zero_gradient(code):
    return CodeGradient(np.zeros_like(code.sprime), np.zeros_like(code.qprime),
                        np.zeros_like(code.dmat))


def init_point(problem: SynthesisProblem, concentration: float, rng,
               space: CodeSpace | None = None):
    """Chain initialization: symmetric Dirichlet(alpha) on every simplex,
    mapped to the unconstrained coordinates."""
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    if space is None:
        space = CodeSpace(problem.sigma, problem.states, problem.initial_state)
    return space.dirichlet_point(concentration, rng)


@dataclass
class Chain:
    draws: np.ndarray          # (R, dim) post burn-in
    nlns: np.ndarray           # (R,)
    step_size: float
    accept_stat: float
    divergences: int
    seed: int
    beta: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.draws.shape[0]

    @property
    def flagged(self) -> bool:
        return self.divergences > 0.1 * max(self.size, 1)


def _leapfrog(target, z, r, grad, eps):
    r1 = r + 0.5 * eps * grad
    z1 = z + eps * r1
    logp1, grad1, nln1 = target.logp_grad(z1)
    r1 = r1 + 0.5 * eps * grad1
    return z1, r1, logp1, grad1, nln1


def _find_reasonable_epsilon(target, z, logp, grad, rng):
    eps = 1.0
    r = rng.standard_normal(z.shape[0])
    z1, r1, logp1, _, _ = _leapfrog(target, z, r, grad, eps)
    joint0 = logp - 0.5 * r @ r
    joint1 = logp1 - 0.5 * r1 @ r1
    if not np.isfinite(joint1):
        joint1 = -np.inf
    a = 1.0 if joint1 - joint0 > np.log(0.5) else -1.0
    while a * (joint1 - joint0) > -a * np.log(2.0):
        eps *= 2.0 ** a
        if eps > 1e7 or eps < 1e-7:
            break
        z1, r1, logp1, _, _ = _leapfrog(target, z, r, grad, eps)
        joint1 = logp1 - 0.5 * r1 @ r1
        if not np.isfinite(joint1):
            joint1 = -np.inf
    return eps


class _Tree:
    __slots__ = ("z_minus", "r_minus", "grad_minus", "z_plus", "r_plus",
                 "grad_plus", "z_prop", "grad_prop", "logp_prop", "nln_prop",
                 "n", "s", "alpha", "n_alpha", "divergent")


def _build_tree(target, z, r, grad, logu, v, j, eps, joint0, rng):
    t = _Tree()
    if j == 0:
        z1, r1, logp1, grad1, nln1 = _leapfrog(target, z, r, grad, v * eps)
        joint = logp1 - 0.5 * r1 @ r1
        if not np.isfinite(joint):
            joint = -np.inf
        t.z_minus = t.z_plus = t.z_prop = z1
        t.r_minus = t.r_plus = r1
        t.grad_minus = t.grad_plus = t.grad_prop = grad1
        t.logp_prop = logp1
        t.nln_prop = nln1
        t.n = 1 if logu <= joint else 0
        t.divergent = logu - DELTA_MAX >= joint
        t.s = 0 if t.divergent else 1
        t.alpha = min(1.0, np.exp(min(joint - joint0, 0.0)))
        t.n_alpha = 1
        return t
    left = _build_tree(target, z, r, grad, logu, v, j - 1, eps, joint0, rng)
    if left.s == 1:
        if v == -1:
            right = _build_tree(target, left.z_minus, left.r_minus,
                                left.grad_minus, logu, v, j - 1, eps, joint0, rng)
            left.z_minus, left.r_minus, left.grad_minus = (
                right.z_minus, right.r_minus, right.grad_minus)
        else:
            right = _build_tree(target, left.z_plus, left.r_plus,
                                left.grad_plus, logu, v, j - 1, eps, joint0, rng)
            left.z_plus, left.r_plus, left.grad_plus = (
                right.z_plus, right.r_plus, right.grad_plus)
        if right.n > 0 and rng.random() < right.n / max(left.n + right.n, 1):
            left.z_prop = right.z_prop
            left.grad_prop = right.grad_prop
            left.logp_prop = right.logp_prop
            left.nln_prop = right.nln_prop
        span = left.z_plus - left.z_minus
        left.s = (right.s
                  * (1 if span @ left.r_minus >= 0 else 0)
                  * (1 if span @ left.r_plus >= 0 else 0))
        left.n += right.n
        left.alpha += right.alpha
        left.n_alpha += right.n_alpha
        left.divergent = left.divergent or right.divergent
    return left


def nuts_sample(target, draws: int, burn_in: int, target_accept: float,
                rng, z0=None, max_tree_depth: int = MAX_TREE_DEPTH,
                seed_label: int = -1) -> Chain:
    """No-U-Turn sampling with dual-averaging adaptation during burn-in.

    `rng` both drives the chain and, when z0 is None, its initialization;
    a seeded generator makes the whole chain reproducible. `seed_label` is
    recorded in the Chain for provenance only.
    """
    dim = target.dim
    if z0 is None:
        z0 = rng.standard_normal(dim)
    z = np.asarray(z0, dtype=np.float64)
    logp, grad, nln = target.logp_grad(z)
    eps = _find_reasonable_epsilon(target, z, logp, grad, rng)
    mu = np.log(10.0 * eps)
    eps_bar, h_bar = 1.0, 0.0
    gamma, t0, kappa = 0.05, 10, 0.75
    out = np.empty((draws, dim))
    nlns = np.empty(draws)
    divergences = 0
    accept_sum = 0.0
    total = burn_in + draws
    for m in range(1, total + 1):
        r0 = rng.standard_normal(dim)
        joint0 = logp - 0.5 * r0 @ r0
        logu = joint0 + np.log(rng.random())
        z_minus = z_plus = z
        r_minus = r_plus = r0
        grad_minus = grad_plus = grad
        j, n, s = 0, 1, 1
        alpha, n_alpha = 0.0, 1
        divergent = False
        while s == 1 and j < max_tree_depth:
            v = -1 if rng.random() < 0.5 else 1
            if v == -1:
                t = _build_tree(target, z_minus, r_minus, grad_minus, logu, v,
                                j, eps, joint0, rng)
                z_minus, r_minus, grad_minus = t.z_minus, t.r_minus, t.grad_minus
            else:
                t = _build_tree(target, z_plus, r_plus, grad_plus, logu, v,
                                j, eps, joint0, rng)
                z_plus, r_plus, grad_plus = t.z_plus, t.r_plus, t.grad_plus
            if t.s == 1 and rng.random() < min(1.0, t.n / n):
                z, grad = t.z_prop, t.grad_prop
                logp, nln = t.logp_prop, t.nln_prop
            n += t.n
            span = z_plus - z_minus
            s = (t.s * (1 if span @ r_minus >= 0 else 0)
                 * (1 if span @ r_plus >= 0 else 0))
            alpha, n_alpha = alpha + t.alpha, n_alpha + t.n_alpha
            divergent = divergent or t.divergent
            j += 1
        if m <= burn_in:
            frac = 1.0 / (m + t0)
            h_bar = (1 - frac) * h_bar + frac * (target_accept - alpha / n_alpha)
            log_eps = mu - np.sqrt(m) / gamma * h_bar
            eta = m ** -kappa
            eps_bar = float(np.exp(eta * log_eps + (1 - eta) * np.log(eps_bar)))
            eps = float(np.exp(log_eps))
            if m == burn_in:
                eps = eps_bar
        else:
            k = m - burn_in - 1
            out[k] = z
            nlns[k] = nln
            accept_sum += alpha / n_alpha
            if divergent:
                divergences += 1
    return Chain(out, nlns, step_size=eps,
                 accept_stat=accept_sum / max(draws, 1),
                 divergences=divergences, seed=seed_label,
                 beta=getattr(target, "beta", float("nan")))


def seeded_rng(*key) -> np.random.Generator:
    """Deterministic generator from an integer key path."""
    return np.random.default_rng(np.random.SeedSequence(list(key)))


# ---------------------------------------------------------------------------
# Chain checkpoints: npz payload plus a json header; a cell is resumable in
# the sense that a completed chain file is loaded instead of re-sampled.


def save_chain(chain: Chain, path):
    header = dict(chain.meta)
    header.update({
        "step_size": chain.step_size, "accept_stat": chain.accept_stat,
        "divergences": chain.divergences, "seed": chain.seed,
        "beta": chain.beta,
    })
    np.savez(path, draws=chain.draws, nlns=chain.nlns,
             header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8))


def load_chain(path) -> Chain:
    with np.load(path) as z:
        header = json.loads(bytes(z["header"]).decode())
        return Chain(z["draws"], z["nlns"],
                     step_size=header.pop("step_size"),
                     accept_stat=header.pop("accept_stat"),
                     divergences=header.pop("divergences"),
                     seed=header.pop("seed"), beta=header.pop("beta"),
                     meta=header)
