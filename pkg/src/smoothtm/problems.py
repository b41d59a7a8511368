"""Synthesis problems, dataset sampling and likelihoods.

A deterministic synthesis problem fixes alphabets, a target function from
input strings to a state atom, the sequence-length range [a, b] and the
simulation timeout t. Inputs are sampled by drawing a length uniformly
from [a, b] and then a uniform string of that length, so the input weight
of a length-l string is q(x) = |input_alphabet|^-l / (b - a + 1).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .code import CodeParameter
from .machines import (
    BLANK, MachineError, build_detectA_solution, build_parityCheck_solution,
)
from .simplex import Alphabet
from .utm import LOGP_CLAMP, logp_grad_batch, work_config
from . import kernels


@dataclass(frozen=True)
class SynthesisProblem:
    name: str
    sigma: Alphabet
    states: Alphabet
    input_alphabet: tuple
    target: object  # str -> state atom
    a: int
    b: int
    t: int
    initial_state: str

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError("a must be <= b")
        for c in self.input_alphabet:
            if c not in self.sigma:
                raise ValueError(f"input symbol {c!r} outside tape alphabet")

    def with_max_length(self, b: int) -> "SynthesisProblem":
        return replace(self, b=b)

    def enumerate_inputs(self, max_len=None):
        hi = self.b if max_len is None else min(self.b, max_len)
        for l in range(self.a, hi + 1):
            for tup in itertools.product(self.input_alphabet, repeat=l):
                yield "".join(tup)

    def input_log_weight(self, x: str) -> float:
        """log q(x) under the length-stratified input distribution."""
        return -np.log(self.b - self.a + 1) - len(x) * np.log(len(self.input_alphabet))


def detectA_problem(a: int = 4, b: int = 7, t: int = 10) -> SynthesisProblem:
    table = build_detectA_solution()
    return SynthesisProblem(
        "detectA", table.sigma, table.states, ("A", "B"),
        lambda x: "accept" if "A" in x else "reject",
        a=a, b=b, t=t, initial_state=table.initial_state,
    )


def parityCheck_problem(a: int = 1, b: int = 5, t: int = 42) -> SynthesisProblem:
    table = build_parityCheck_solution()
    return SynthesisProblem(
        "parityCheck", table.sigma, table.states, ("A", "B"),
        lambda x: "accept" if x.count("A") == x.count("B") else "reject",
        a=a, b=b, t=t, initial_state=table.initial_state,
    )


BUILTIN_PROBLEMS = {
    "detectA": detectA_problem,
    "parityCheck": parityCheck_problem,
}


def sample_input(a: int, b: int, input_alphabet, rng) -> str:
    """Length uniform on [a, b]; string uniform conditional on length."""
    if not len(input_alphabet):
        raise ValueError("empty input alphabet")
    if a > b:
        raise ValueError("a must be <= b")
    l = int(rng.integers(a, b + 1))
    syms = list(input_alphabet)
    return "".join(syms[int(k)] for k in rng.integers(0, len(syms), size=l))


@dataclass
class Dataset:
    problem_name: str
    pairs: list
    a: int
    b: int
    t: int
    seed: int

    @property
    def n(self) -> int:
        return len(self.pairs)

    def grouped(self):
        """Distinct (x, y) pairs with multiplicities; identical math, fewer
        simulations. Order follows first appearance, so it is deterministic."""
        seen = {}
        order = []
        for x, y in self.pairs:
            if x not in seen:
                seen[x] = [y, 0]
                order.append(x)
            seen[x][1] += 1
        return [(x, seen[x][0], seen[x][1]) for x in order]


def make_dataset(problem: SynthesisProblem, n: int, rng, seed: int = -1) -> Dataset:
    if n < 1:
        raise ValueError("need n >= 1")
    pairs = []
    for _ in range(n):
        x = sample_input(problem.a, problem.b, problem.input_alphabet, rng)
        pairs.append((x, problem.target(x)))
    return Dataset(problem.name, pairs, problem.a, problem.b, problem.t, seed)


def dataset_from_seed(problem: SynthesisProblem, n: int, seed: int) -> Dataset:
    return make_dataset(problem, n, np.random.default_rng(seed), seed=seed)


# ---------------------------------------------------------------------------
# Likelihoods


@dataclass
class Likelihoods:
    """nL_n = -sum_i log p(y_i|x_i,w); for deterministic problems the
    empirical entropy S_n is 0 so K_n = L_n."""

    n: int
    nln: float
    sn: float = 0.0
    clamped: bool = False

    @property
    def ln(self) -> float:
        return self.nln / self.n

    @property
    def kn(self) -> float:
        return self.ln - self.sn


def _batched_tapes(problem: SynthesisProblem, code: CodeParameter, groups):
    t = problem.t
    margin = t + 1
    maxlen = max((len(x) for x, _, _ in groups), default=0)
    width = maxlen + 2 * margin
    P = len(groups)
    ns = len(code.sigma)
    tape = np.zeros((P, width, ns))
    tape[:, :, code.sigma.index(BLANK)] = 1.0
    state = np.zeros((P, len(code.states)))
    state[:, code.states.index(code.initial_state)] = 1.0
    y_idx = np.empty(P, dtype=np.int64)
    counts = np.empty(P)
    for p, (x, y, cnt) in enumerate(groups):
        for k, ch in enumerate(x):
            tape[p, margin + k, :] = 0.0
            tape[p, margin + k, code.sigma.index(ch)] = 1.0
        y_idx[p] = code.states.index(y)
        counts[p] = cnt
    return tape, state, y_idx, counts, margin


def neg_log_likelihood(code: CodeParameter, dataset: Dataset,
                       problem: SynthesisProblem) -> Likelihoods:
    total, _, clamped = loglik_dataset(code, dataset, problem, with_grad=False)
    return Likelihoods(dataset.n, -total, sn=0.0, clamped=clamped)


def loglik_dataset(code: CodeParameter, dataset: Dataset,
                   problem: SynthesisProblem, with_grad: bool = True):
    """Sum of log p over the dataset (and its raw-coordinate gradient)."""
    groups = dataset.grouped()
    tape, state, y_idx, counts, center = _batched_tapes(problem, code, groups)
    if with_grad:
        total, grad, _, clamped = logp_grad_batch(
            tape, state, code, problem.t, y_idx, counts, center)
        return total, grad, clamped
    sp, qp, dm = code.sprime, code.qprime, code.dmat
    tsig, tst = code.tuple_indices()
    blank = code.sigma.index(BLANK)
    _, states = kernels.forward_cycles(tape, state, sp, qp, dm, tsig, tst,
                                       center, blank, problem.t)
    p_y = states[problem.t][np.arange(len(groups)), y_idx]
    total = float(np.dot(counts, np.log(np.maximum(p_y, LOGP_CLAMP))))
    return total, None, bool(np.any(p_y < LOGP_CLAMP))


def exact_K(code: CodeParameter, problem: SynthesisProblem,
            max_len: int | None = None, support_cap: int = 100_000) -> float:
    """Exact KL divergence for the finitely supported input distribution:
    the q(x)-weighted expectation of -log p(f(x)|x,w)."""
    hi = problem.b if max_len is None else min(problem.b, max_len)
    k = len(problem.input_alphabet)
    count = sum(k ** l for l in range(problem.a, hi + 1))
    if count > support_cap:
        raise ValueError(f"support of {count} strings exceeds cap {support_cap}")
    groups = [(x, problem.target(x), 1.0) for x in problem.enumerate_inputs(hi)]
    tape, state, y_idx, _, center = _batched_tapes(problem, code, groups)
    sp, qp, dm = code.sprime, code.qprime, code.dmat
    tsig, tst = code.tuple_indices()
    blank = code.sigma.index(BLANK)
    _, states = kernels.forward_cycles(tape, state, sp, qp, dm, tsig, tst,
                                       center, blank, problem.t)
    p_y = states[problem.t][np.arange(len(groups)), y_idx]
    weights = np.array([np.exp(problem.input_log_weight(x)) for x, _, _ in groups])
    # Normalizing by the realized support (lengths a..hi) keeps this an
    # expectation when max_len truncates below b.
    weights /= weights.sum()
    return float(-(weights * np.log(np.maximum(p_y, LOGP_CLAMP))).sum())


# ---------------------------------------------------------------------------
# Dataset files: a comment header then one "x<TAB>y" record per line.


def save_dataset(dataset: Dataset, path):
    with open(path, "w") as f:
        f.write(f"# problem={dataset.problem_name} a={dataset.a} b={dataset.b} "
                f"t={dataset.t} seed={dataset.seed} n={dataset.n}\n")
        for x, y in dataset.pairs:
            f.write(f"{x}\t{y}\n")


def load_dataset(path) -> Dataset:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith("# problem="):
            raise MachineError(f"{path}: missing dataset header")
        fields = dict(kv.split("=") for kv in header[2:].split())
        pairs = []
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            x, y = line.split("\t") if "\t" in line else ("", line)
            pairs.append((x, y))
    return Dataset(fields["problem"], pairs, int(fields["a"]), int(fields["b"]),
                   int(fields["t"]), int(fields["seed"]))
