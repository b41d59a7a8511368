"""Command-line orchestration: classical/smooth simulation, RLCT
experiments from config files, K-surface rasters and phase scans.

Commands: simulate | rlct | geometry | phases. Config files are flat
key=value INI sections; every output embeds the resolved config and the
build version so runs are diffable. Exit codes: 0 success, 2 config
error, 3 runtime error (checkpoints are kept).
"""

from __future__ import annotations

import argparse
import configparser
import os
import subprocess
import sys

import numpy as np

from . import __version__
from .code import load_code
from .machines import (
    BUILTIN_MACHINES, MachineError, initial_config, load_table, run, step,
)
from .problems import BUILTIN_PROBLEMS, dataset_from_seed, save_dataset
from .rlct import ExperimentConfig, dataset_seed, rlct_experiment, write_results
from .shiftlab import (
    K_EXAMPLES, scan_zero_set, write_points_csv, write_raster_csv,
)
from .thermo import PhaseCandidate, scan_report_csv
from .utm import delta_step_t


class ConfigError(ValueError):
    pass


def build_version() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], cwd=here,
            capture_output=True, text=True, timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        rev = ""
    return f"smoothtm {__version__}" + (f" ({rev})" if rev else "")


def parse_temperature(text: str) -> float:
    text = text.strip()
    if text.startswith("log(") and text.endswith(")"):
        return float(np.log(float(text[4:-1])))
    return float(text)


def load_experiment_config(path: str, seed_override=None) -> ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    try:
        problem = parser.get("problem", "name")
        cfg = ExperimentConfig(
            problem=problem,
            n=parser.getint("data", "n"),
            a=parser.getint("data", "a"),
            b=parser.getint("data", "b"),
            t=parser.getint("data", "t"),
            num_datasets=parser.getint("data", "num_datasets"),
            samples=parser.getint("sampler", "samples"),
            burn_in=parser.getint("sampler", "burn_in"),
            target_accept=parser.getfloat("sampler", "target_accept", fallback=0.8),
            concentration=parser.getfloat("sampler", "concentration", fallback=1.0),
            chain_temperature=parse_temperature(
                parser.get("rlct", "chain_temperature")),
            beta_ratio=parser.getfloat("rlct", "beta_ratio", fallback=1.1),
            master_seed=parser.getint("run", "master_seed", fallback=0),
        )
    except (configparser.Error, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from None
    if seed_override is not None:
        cfg.master_seed = seed_override
    try:
        cfg.validate()
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


def _resolve_machine(name_or_path: str):
    if name_or_path in BUILTIN_MACHINES:
        return BUILTIN_MACHINES[name_or_path]()
    if not os.path.exists(name_or_path):
        raise ConfigError(f"no builtin machine or file named {name_or_path!r}")
    return load_table(name_or_path)


def cmd_simulate(args) -> int:
    table = _resolve_machine(args.machine)
    t = args.t
    if args.code:
        code = load_code(args.code)
        dist = delta_step_t(args.input, code, t)
        print(f"input: {args.input}  t={t}  (smooth code: {args.code})")
        for q, p in zip(code.states, dist):
            print(f"  P(state={q}) = {p:.12g}")
        return 0
    conf = initial_config(table, args.input, t)
    if args.trace:
        for k in range(t + 1):
            print(f"step {k:3d}  state={conf.state:<12} "
                  f"head={conf.head}  tape={''.join(conf.cells)}")
            if k < t:
                conf = step(table, conf)
    else:
        conf = run(table, conf, t)
    print(f"final state: {conf.state}")
    print(f"final tape:  {conf.content() or '(blank)'}")
    return 0


def cmd_rlct(args) -> int:
    cfg = load_experiment_config(args.config, args.seed)
    grid = cfg.beta_grid()
    cells = [(i, j, b) for i in range(cfg.num_datasets)
             for j, b in enumerate(grid.betas())]
    if args.dry_run:
        print(f"{build_version()}")
        print(f"experiment: {cfg}")
        print(f"work plan: {len(cells)} chains (dataset x beta)")
        for i, j, b in cells:
            print(f"  dataset {i}  beta[{j}] = {b:.6f}  (1/beta = {1 / b:.4f})")
        return 0
    out = args.out or "rlct_out"
    os.makedirs(out, exist_ok=True)
    problem = cfg.make_problem()
    for i in range(cfg.num_datasets):
        ds = dataset_from_seed(problem, cfg.n, dataset_seed(cfg.master_seed, i))
        save_dataset(ds, os.path.join(out, f"dataset_{i}.tsv"))

    def progress(cell):
        ds_idx, beta_idx, nlns, div, accept, _, resumed = cell
        tag = "resumed" if resumed else "sampled"
        print(f"[{tag}] dataset {ds_idx} beta[{beta_idx}]: "
              f"mean nL_n = {np.mean(nlns):.4f}, accept = {accept:.3f}, "
              f"divergences = {div}", flush=True)

    est = rlct_experiment(cfg, out_dir=out, jobs=args.jobs, progress=progress)
    write_results(est, out, version=build_version())
    print(f"lambda_hat = {est.lambda_hat:.6f} +/- {est.std:.6f} "
          f"(R^2 = {est.r_squared:.6f})")
    if est.flagged:
        print("warning: divergence fraction exceeded 10% on some chain")
    print(f"results written to {out}/results.json and {out}/energies.csv")
    return 0


def cmd_geometry(args) -> int:
    if args.example not in K_EXAMPLES:
        raise ConfigError(f"unknown example {args.example!r}; choose 1 or 2")
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    points, raster = scan_zero_set(K_EXAMPLES[args.example],
                                   resolution=args.resolution)
    raster_path = os.path.join(out, f"k_example{args.example}_raster.csv")
    points_path = os.path.join(out, f"k_example{args.example}_zeroset.csv")
    write_raster_csv(raster, raster_path)
    write_points_csv(points, points_path)
    print(f"{build_version()}")
    print(f"raster:   {raster_path} ({args.resolution}x{args.resolution})")
    print(f"zero set: {points_path} ({len(points)} points)")
    return 0


def _load_candidates(path):
    if not os.path.exists(path):
        raise ConfigError(f"candidates file not found: {path}")
    cands = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("label"):
                continue
            parts = line.split(",")
            if len(parts) not in (3, 4):
                raise ConfigError(f"{path}:{lineno}: expected "
                                  "label,nll,rlct[,length]")
            try:
                cands.append(PhaseCandidate(
                    parts[0], float(parts[1]), float(parts[2]),
                    int(parts[3]) if len(parts) == 4 else 1))
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: {e}") from None
    if not cands:
        raise ConfigError(f"{path}: no candidates")
    return cands


def cmd_phases(args) -> int:
    cands = _load_candidates(args.candidates)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "phase_scan.csv")
    # The per-candidate RLCT is caller-supplied (bound or estimate); this
    # scan does not compute level-set RLCTs itself.
    crossings = scan_report_csv(cands, range(args.n_min, args.n_max + 1),
                                args.beta, path)
    print(f"{build_version()}")
    print(f"scan over n in [{args.n_min}, {args.n_max}] at beta={args.beta}")
    for rec in crossings:
        print(f"  {rec['kind']}: {rec['pair'][0]} vs {rec['pair'][1]} "
              f"at n={rec['n']}: {rec['direction']}")
    if not crossings:
        print("  no crossings")
    print(f"report: {path}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothtm", description=__doc__)
    p.add_argument("--version", action="version", version=build_version())
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a machine on an input")
    sim.add_argument("machine", help="builtin name or description file")
    sim.add_argument("input", help="input string (blanks optional)")
    sim.add_argument("--t", type=int, default=10, help="steps (classical) "
                     "or cycles (smooth)")
    sim.add_argument("--code", help="smooth code checkpoint: report the "
                     "final state distribution instead")
    sim.add_argument("--trace", action="store_true", help="print every step")
    sim.set_defaults(func=cmd_simulate)

    rl = sub.add_parser("rlct", help="estimate the RLCT of a problem")
    rl.add_argument("--config", required=True)
    rl.add_argument("--out", default=None)
    rl.add_argument("--jobs", type=int, default=1)
    rl.add_argument("--seed", type=int, default=None)
    rl.add_argument("--dry-run", action="store_true")
    rl.set_defaults(func=cmd_rlct)

    geo = sub.add_parser("geometry", help="K-surface raster and zero set")
    geo.add_argument("--example", default="2")
    geo.add_argument("--resolution", type=int, default=101)
    geo.add_argument("--out", default=None)
    geo.set_defaults(func=cmd_geometry)

    ph = sub.add_parser("phases", help="free-energy phase-transition scan")
    ph.add_argument("--candidates", required=True)
    ph.add_argument("--n-min", type=int, default=2)
    ph.add_argument("--n-max", type=int, default=1000)
    ph.add_argument("--beta", type=float, default=1.0)
    ph.add_argument("--out", default=None)
    ph.set_defaults(func=cmd_phases)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MachineError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # checkpoints are kept on runtime failure
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
