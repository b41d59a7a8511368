"""Thermodynamic observables of a synthesis problem: the Hamiltonian of the
tempered posterior, its energy, the two-term free-energy approximation for
phase candidates, and the first-order phase-transition scan.

The uniform prior contributes only the constant -log phi = log vol(W),
with vol(W) the closed-form product of simplex volumes in free
coordinates, so Hamiltonians and energies are the empirical quantities
shifted by that constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import Dataset, SynthesisProblem, neg_log_likelihood
from .rlct import energy as chain_energy
from .stickbreak import CodeSpace


def log_volume(problem: SynthesisProblem) -> float:
    space = CodeSpace(problem.sigma, problem.states, problem.initial_state)
    return space.log_volume()


def hamiltonian(code, dataset: Dataset, problem: SynthesisProblem,
                beta: float) -> float:
    """H_n(w) = n K_n(w) - (1/beta) log phi(w); for the uniform prior the
    second term is the constant (1/beta) log vol(W)."""
    lik = neg_log_likelihood(code, dataset, problem)
    return dataset.n * lik.kn + log_volume(problem) / beta


def energy_estimate(chain, beta: float, problem: SynthesisProblem) -> float:
    """U = E[nL_n] - n S_n + (1/beta) E[-log phi]; deterministic problems
    have S_n = 0 and the prior term is constant."""
    return chain_energy(chain).e_nln + log_volume(problem) / beta


@dataclass(frozen=True)
class PhaseCandidate:
    """A machine (not necessarily a solution) viewed as a phase: its
    empirical negative log likelihood per sample L_i, the RLCT (bound or
    estimate) of its level set, and its code length (used states times
    used symbols). The RLCT input is supplied by the caller; this artifact
    does not compute level-set RLCTs."""

    label: str
    nll: float          # L_n([M_i])
    rlct: float         # lambda_i
    length: int = 1

    def __post_init__(self):
        if self.nll < 0 or self.rlct <= 0 or self.length < 1:
            raise ValueError(f"invalid phase candidate {self}")


def free_energy_approx(c: PhaseCandidate, n: int, beta: float) -> float:
    """Two-term approximation F_i ~ n beta L_i + lambda_i log n."""
    if n < 2:
        raise ValueError("free energy approximation needs n >= 2")
    return n * beta * c.nll + c.rlct * np.log(n)


def free_energy_bounds(c: PhaseCandidate, n: int, beta: float,
                       length_constant: float = 1.0):
    """The sandwich n beta L_i <= F_i <= n beta L_i + c l(M_i) log n."""
    lo = n * beta * c.nll
    hi = lo + length_constant * c.length * np.log(n)
    return lo, hi


def phase_transition_scan(candidates, n_range, beta: float):
    """All orderings changes of pairwise free-energy curves on an integer
    range of n. Returns a list of crossing records; ties (identical curves)
    are reported separately and never as crossings."""
    if len(candidates) < 2:
        return []
    ns = list(n_range)
    crossings = []
    for a_idx in range(len(candidates)):
        for b_idx in range(a_idx + 1, len(candidates)):
            ca, cb = candidates[a_idx], candidates[b_idx]
            if ca.nll == cb.nll and ca.rlct == cb.rlct:
                crossings.append({
                    "kind": "tie", "pair": (ca.label, cb.label), "n": None,
                    "direction": "equal curves",
                })
                continue
            prev = None
            for n in ns:
                diff = free_energy_approx(ca, n, beta) - free_energy_approx(cb, n, beta)
                sign = 0 if diff == 0 else (1 if diff > 0 else -1)
                if prev is not None and sign != 0 and prev != 0 and sign != prev:
                    direction = (f"{ca.label} overtakes {cb.label}"
                                 if sign > 0 else
                                 f"{cb.label} overtakes {ca.label}")
                    crossings.append({
                        "kind": "crossing", "pair": (ca.label, cb.label),
                        "n": n, "direction": direction,
                    })
                if sign != 0:
                    prev = sign
    return crossings


def scan_report_csv(candidates, n_range, beta: float, path):
    """Phase-scan report: F per (n, candidate) plus a crossings summary."""
    ns = list(n_range)
    crossings = phase_transition_scan(candidates, ns, beta)
    with open(path, "w") as f:
        f.write(f"# beta={beta!r}\n")
        f.write("n,candidate,free_energy\n")
        for n in ns:
            for c in candidates:
                f.write(f"{n},{c.label},{free_energy_approx(c, n, beta)!r}\n")
        f.write("# crossings\n")
        for rec in crossings:
            f.write(f"# {rec['kind']}: {rec['pair'][0]} vs {rec['pair'][1]}"
                    f" at n={rec['n']}: {rec['direction']}\n")
    return crossings
