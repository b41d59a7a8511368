"""RLCT estimation: per-temperature expected energies from chains, weighted
least squares of E[nL_n] against 1/beta, aggregation across datasets, and
the two theoretical upper bounds (state-symbol count and codimension).

The estimator follows the tempered-posterior regression: for beta near
beta0/log n the expected energy is approximately linear in 1/beta with
slope lambda, so five inverse temperatures centered multiplicatively on
1/T give a slope estimate per dataset; estimates are averaged over
independent datasets.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .problems import (
    BUILTIN_PROBLEMS, SynthesisProblem, dataset_from_seed, exact_K,
)
from .sampler import Chain, TemperedPosterior, init_point, load_chain, nuts_sample, save_chain
from .stickbreak import CodeSpace

DEFAULT_BETA_RATIO = 1.1


@dataclass(frozen=True)
class BetaGrid:
    """Five inverse temperatures centered multiplicatively on 1/T."""

    center: float
    multipliers: tuple = (DEFAULT_BETA_RATIO ** -2, DEFAULT_BETA_RATIO ** -1,
                          1.0, DEFAULT_BETA_RATIO, DEFAULT_BETA_RATIO ** 2)

    def __post_init__(self):
        if len(self.multipliers) != 5:
            raise ValueError("exactly five inverse temperatures")
        if any(m <= 0 for m in self.multipliers) or self.center <= 0:
            raise ValueError("temperatures must be positive")
        if abs(np.prod(self.multipliers) - 1.0) > 1e-9:
            raise ValueError("multipliers must center multiplicatively on 1")

    @classmethod
    def geometric(cls, center: float, ratio: float = DEFAULT_BETA_RATIO):
        return cls(center, (ratio ** -2, ratio ** -1, 1.0, ratio, ratio ** 2))

    def betas(self):
        return [self.center * m for m in self.multipliers]


@dataclass
class EnergyPoint:
    beta: float
    e_nln: float
    stderr: float


def energy(chain: Chain, num_batches: int = 50) -> EnergyPoint:
    """Chain mean of nL_n with a batch-means Monte Carlo standard error."""
    x = np.asarray(chain.nlns, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty chain")
    mean = float(x.mean())
    b = min(num_batches, x.size)
    take = (x.size // b) * b
    if take == 0 or b < 2:
        return EnergyPoint(chain.beta, mean, 0.0)
    batches = x[:take].reshape(b, -1).mean(axis=1)
    stderr = float(batches.std(ddof=1) / np.sqrt(b))
    return EnergyPoint(chain.beta, mean, stderr)


def fit_lambda(points):
    """Weighted least squares of e_nln on 1/beta.

    Weights are 1/stderr^2 with the stderr floored; returns
    (lambda_hat, r_squared, intercept) where lambda_hat is the slope and
    r_squared the weighted coefficient of determination.
    """
    if len(points) < 3:
        raise ValueError("need at least three temperatures")
    betas = np.array([p.beta for p in points])
    if len(set(betas.tolist())) < 2:
        raise ValueError("singular design: all temperatures equal")
    x = 1.0 / betas
    y = np.array([p.e_nln for p in points])
    w = 1.0 / np.maximum(np.array([p.stderr for p in points]), 1e-12) ** 2
    sw = np.sqrt(w)
    design = np.stack([np.ones_like(x), x], axis=1) * sw[:, None]
    coef, *_ = np.linalg.lstsq(design, y * sw, rcond=None)
    intercept, lam = float(coef[0]), float(coef[1])
    resid = y - (intercept + lam * x)
    ybar = float((w * y).sum() / w.sum())
    ss_res = float((w * resid ** 2).sum())
    ss_tot = float((w * (y - ybar) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return lam, r2, intercept


# ---------------------------------------------------------------------------
# Experiment driver


@dataclass
class ExperimentConfig:
    problem: str
    n: int = 200
    a: int = 4
    b: int = 7
    t: int = 10
    samples: int = 2000          # R
    burn_in: int = 1000
    num_datasets: int = 2        # |T|
    target_accept: float = 0.8
    concentration: float = 1.0
    chain_temperature: float = float(np.log(1000))
    beta_ratio: float = DEFAULT_BETA_RATIO
    master_seed: int = 0

    def validate(self):
        checks = [self.n >= 1, self.a >= 0, self.a <= self.b, self.t >= 0,
                  self.samples >= 1, self.burn_in >= 0, self.num_datasets >= 1,
                  0 < self.target_accept < 1, self.concentration > 0,
                  self.chain_temperature > 0, self.beta_ratio > 0]
        if not all(checks):
            raise ValueError(f"invalid experiment config: {self}")
        if self.problem not in BUILTIN_PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        return self

    def make_problem(self) -> SynthesisProblem:
        return BUILTIN_PROBLEMS[self.problem](a=self.a, b=self.b, t=self.t)

    def beta_grid(self) -> BetaGrid:
        return BetaGrid.geometric(1.0 / self.chain_temperature, self.beta_ratio)


@dataclass
class RlctEstimate:
    lambda_hat: float
    std: float
    r_squared: float
    per_dataset: list
    energies: list               # rows: (dataset, beta, inv_beta, e_nln, stderr)
    divergences: int
    flagged: bool
    config: dict = field(default_factory=dict)


def _cell_seed(master: int, kind: int, *idx) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, kind, *idx])


def dataset_seed(master: int, ds_idx: int) -> int:
    return int(_cell_seed(master, 1, ds_idx).generate_state(1)[0])


def _run_cell(args):
    (cfg_dict, ds_idx, beta_idx, beta, out_dir) = args
    cfg = ExperimentConfig(**cfg_dict)
    problem = cfg.make_problem()
    path = None
    if out_dir:
        path = os.path.join(out_dir, f"chain_ds{ds_idx}_beta{beta_idx}.npz")
        if os.path.exists(path):
            chain = load_chain(path)
            return ds_idx, beta_idx, chain.nlns, chain.divergences, chain.accept_stat, chain.step_size, True
    dataset = dataset_from_seed(problem, cfg.n, dataset_seed(cfg.master_seed, ds_idx))
    post = TemperedPosterior(problem, dataset, beta)
    rng = np.random.default_rng(_cell_seed(cfg.master_seed, 2, ds_idx, beta_idx))
    z0 = init_point(problem, cfg.concentration, rng, post.space)
    chain = nuts_sample(post, cfg.samples, cfg.burn_in, cfg.target_accept,
                        rng, z0=z0, seed_label=cfg.master_seed)
    chain.meta.update({"problem": cfg.problem, "n": cfg.n, "dataset": ds_idx,
                       "beta_index": beta_idx})
    if path:
        save_chain(chain, path)
    return (ds_idx, beta_idx, chain.nlns, chain.divergences, chain.accept_stat,
            chain.step_size, False)


def rlct_experiment(cfg: ExperimentConfig, out_dir: str | None = None,
                    jobs: int = 1, progress=None) -> RlctEstimate:
    """Algorithm: for each dataset and each of five temperatures, sample the
    tempered posterior, estimate the expected energy, fit the slope per
    dataset, and average the slopes across datasets."""
    cfg.validate()
    grid = cfg.beta_grid()
    betas = grid.betas()
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    cells = [(asdict(cfg), i, j, betas[j], out_dir)
             for i in range(cfg.num_datasets) for j in range(len(betas))]
    results = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for out in pool.map(_run_cell, cells):
                results[(out[0], out[1])] = out
                if progress:
                    progress(out)
    else:
        for cell in cells:
            out = _run_cell(cell)
            results[(out[0], out[1])] = out
            if progress:
                progress(out)
    energies = []
    per_dataset = []
    total_div = 0
    flagged = False
    for i in range(cfg.num_datasets):
        points = []
        for j, beta in enumerate(betas):
            _, _, nlns, div, accept, step, _ = results[(i, j)]
            chain = Chain(np.empty((len(nlns), 0)), np.asarray(nlns),
                          step_size=step, accept_stat=accept,
                          divergences=div, seed=cfg.master_seed, beta=beta)
            pt = energy(chain)
            points.append(pt)
            energies.append((i, beta, 1.0 / beta, pt.e_nln, pt.stderr))
            total_div += div
            flagged = flagged or chain.flagged
        lam, r2, intercept = fit_lambda(points)
        per_dataset.append({"dataset": i, "lambda": lam, "r_squared": r2,
                            "intercept": intercept})
    lams = np.array([d["lambda"] for d in per_dataset])
    std = float(lams.std(ddof=1)) if len(lams) > 1 else 0.0
    est = RlctEstimate(
        lambda_hat=float(lams.mean()), std=std,
        r_squared=float(np.mean([d["r_squared"] for d in per_dataset])),
        per_dataset=per_dataset, energies=energies,
        divergences=total_div, flagged=flagged, config=asdict(cfg),
    )
    return est


# ---------------------------------------------------------------------------
# Theoretical bounds


def kolmogorov_bound(num_states: int, num_symbols: int,
                     states_used: int, symbols_used: int) -> float:
    """Upper bound (M+N)/2 * M'N' on the RLCT when a classical solution
    using M' states and N' symbols exists."""
    if states_used > num_states or symbols_used > num_symbols:
        raise ValueError("used counts exceed alphabet sizes")
    return 0.5 * (num_states + num_symbols) * states_used * symbols_used


class FreeSetError(ValueError):
    pass


def codim_bound(code, problem: SynthesisProblem, free_blocks, rng,
                trials: int = 100, tol: float = 1e-9) -> float:
    """Codimension bound: verify that randomizing the listed per-tuple
    blocks keeps the exact KL divergence at zero, then return
    (dim W - d) / 2 for d the number of freed coordinates.

    free_blocks is a list of (tuple_index, block) with block one of
    's' (write), 'q' (next state), 'd' (move).
    """
    sizes = {"s": len(code.sigma), "q": len(code.states), "d": 3}
    d = sum(sizes[b] - 1 for _, b in free_blocks)
    base = exact_K(code, problem)
    if base > tol:
        raise FreeSetError(f"base point is not a solution: K = {base}")
    for trial in range(trials):
        perturbed = code.copy()
        for i, b in free_blocks:
            draw = rng.dirichlet(np.ones(sizes[b]))
            if b == "s":
                perturbed.sprime[i] = draw
            elif b == "q":
                perturbed.qprime[i] = draw
            else:
                perturbed.dmat[i] = draw
        k = exact_K(perturbed, problem)
        if k > tol:
            raise FreeSetError(
                f"perturbation {trial} of blocks {free_blocks} breaks K=0 "
                f"(K = {k}); offending code sprime={perturbed.sprime!r}")
    return 0.5 * (code.dim - d)


def detectA_free_blocks(code):
    """The 14-dimensional free set around a detectA solution: the accept
    rows' write and move blocks plus the (A, reject) write block."""
    tsig, tst = code.tuple_indices()
    blocks = []
    for i in range(code.num_tuples):
        s = code.sigma.symbols[tsig[i]]
        q = code.states.symbols[tst[i]]
        if q == "accept":
            blocks.append((i, "s"))
            blocks.append((i, "d"))
        if q == "reject" and s == "A":
            blocks.append((i, "s"))
    return blocks


# ---------------------------------------------------------------------------
# Result files: one JSON document plus a CSV companion of the energies and
# a CSV of the per-dataset fits (consumed by the plot scripts).


def write_results(est: RlctEstimate, out_dir: str, version: str = ""):
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "version": version,
        "config": est.config,
        "lambda_hat": est.lambda_hat,
        "std": est.std,
        "r_squared": est.r_squared,
        "per_dataset": est.per_dataset,
        "divergences": est.divergences,
        "flagged": est.flagged,
        "energies": [
            {"dataset_id": i, "beta": b, "inv_beta": ib, "e_nln": e, "stderr": s}
            for (i, b, ib, e, s) in est.energies
        ],
    }
    with open(os.path.join(out_dir, "results.json"), "w") as f:
        json.dump(doc, f, indent=1)
    cfg_comment = " ".join(f"{k}={v}" for k, v in est.config.items())
    with open(os.path.join(out_dir, "energies.csv"), "w") as f:
        f.write(f"# smoothtm {version}\n# config: {cfg_comment}\n")
        f.write("dataset_id,beta,inv_beta,e_nln,stderr\n")
        for (i, b, ib, e, s) in est.energies:
            f.write(f"{i},{b!r},{ib!r},{e!r},{s!r}\n")
    with open(os.path.join(out_dir, "fits.csv"), "w") as f:
        f.write(f"# smoothtm {version}\n# config: {cfg_comment}\n")
        f.write("dataset_id,lambda,intercept,r_squared\n")
        for d in est.per_dataset:
            f.write(f"{d['dataset']},{d['lambda']!r},{d['intercept']!r},"
                    f"{d['r_squared']!r}\n")
