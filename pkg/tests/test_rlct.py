import numpy as np
import pytest

from smoothtm.code import encode
from smoothtm.machines import build_detectA_solution
from smoothtm.problems import detectA_problem
from smoothtm.rlct import (
    BetaGrid, EnergyPoint, ExperimentConfig, FreeSetError, codim_bound,
    detectA_free_blocks, energy, fit_lambda, kolmogorov_bound, rlct_experiment,
    write_results,
)
from smoothtm.sampler import Chain


def make_chain(nlns, beta=1.0):
    nlns = np.asarray(nlns, dtype=np.float64)
    return Chain(np.empty((len(nlns), 0)), nlns, step_size=0.1,
                 accept_stat=0.9, divergences=0, seed=0, beta=beta)


def test_beta_grid_invariants():
    grid = BetaGrid.geometric(0.5, 1.1)
    betas = grid.betas()
    assert len(betas) == 5
    assert betas[2] == pytest.approx(0.5)
    assert np.prod(grid.multipliers) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        BetaGrid(0.5, (0.8, 0.9, 1.0, 1.1, 1.2))  # product != 1
    with pytest.raises(ValueError):
        BetaGrid(0.5, (1.0, 1.0, 1.0, 1.0))       # four values
    with pytest.raises(ValueError):
        BetaGrid(-1.0)


def test_energy_constant_and_alternating():
    pt = energy(make_chain([3.0] * 100))
    assert (pt.e_nln, pt.stderr) == (3.0, 0.0)
    pt = energy(make_chain([1.0, 3.0] * 50))
    assert pt.e_nln == pytest.approx(2.0)


def test_energy_stderr_tracks_sqrt_n():
    rng = np.random.default_rng(0)
    sigma, big_r = 2.0, 5000
    ratios = []
    for _ in range(100):
        x = rng.normal(0.0, sigma, size=big_r)
        pt = energy(make_chain(x))
        ratios.append(pt.stderr / (sigma / np.sqrt(big_r)))
    assert abs(np.mean(ratios) - 1.0) <= 0.2


def test_fit_lambda_exact_line():
    betas = BetaGrid.geometric(1.0 / np.log(1000)).betas()
    pts = [EnergyPoint(b, 7.0 + 2.5 / b, 0.1) for b in betas]
    lam, r2, intercept = fit_lambda(pts)
    assert lam == pytest.approx(2.5, rel=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    assert intercept == pytest.approx(7.0, rel=1e-9)


def test_fit_lambda_noisy():
    rng = np.random.default_rng(1)
    betas = BetaGrid.geometric(1.0 / np.log(1000)).betas()
    lams = []
    for _ in range(100):
        pts = [EnergyPoint(b, 7.0 + 2.5 / b + rng.normal(0, 0.01), 0.01)
               for b in betas]
        lams.append(fit_lambda(pts)[0])
    assert abs(np.mean(lams) - 2.5) <= 0.05


def test_fit_lambda_weight_equivariance():
    betas = BetaGrid.geometric(0.2).betas()
    rng = np.random.default_rng(2)
    pts = [EnergyPoint(b, 3.0 + 1.3 / b + rng.normal(0, 0.1), 0.05 + rng.random())
           for b in betas]
    lam1, r1, _ = fit_lambda(pts)
    scaled = [EnergyPoint(p.beta, p.e_nln, 7.0 * p.stderr) for p in pts]
    lam2, r2, _ = fit_lambda(scaled)
    assert lam1 == pytest.approx(lam2, rel=1e-12)
    assert r1 == pytest.approx(r2, rel=1e-12)


def test_fit_lambda_errors():
    with pytest.raises(ValueError):
        fit_lambda([EnergyPoint(1.0, 1.0, 0.1)] * 2)
    with pytest.raises(ValueError):
        fit_lambda([EnergyPoint(1.0, 1.0, 0.1)] * 5)


def test_regular_model_calibration_half():
    # 1-dim regular model, tempered Gaussian posterior sampled directly:
    # p^beta ~ exp(-beta n w^2), nL_n(w) = n w^2, E[nL_n] = 1/(2 beta),
    # so the slope against 1/beta is the regular RLCT d/2 = 1/2.
    rng = np.random.default_rng(3)
    n = 1000
    grid = BetaGrid.geometric(1.0 / np.log(n))
    lams = []
    for _ in range(4):
        pts = []
        for b in grid.betas():
            w = rng.normal(0.0, np.sqrt(1.0 / (2 * n * b)), size=5000)
            pts.append(energy(make_chain(n * w ** 2, beta=b)))
        lams.append(fit_lambda(pts)[0])
    lam = float(np.mean(lams))
    assert abs(lam - 0.5) <= 0.1


def test_perfect_fit_slope_zero():
    # A code fitting its single repeated data point exactly at every beta
    # gives constant (zero) energies: the fitted slope vanishes.
    grid = BetaGrid.geometric(0.2)
    pts = [energy(make_chain(np.zeros(500), beta=b)) for b in grid.betas()]
    lam, _, _ = fit_lambda(pts)
    assert abs(lam) <= 1e-9


def test_kolmogorov_bound_values():
    assert kolmogorov_bound(2, 3, 2, 3) == 15.0
    assert kolmogorov_bound(6, 4, 6, 4) == 120.0
    with pytest.raises(ValueError):
        kolmogorov_bound(2, 3, 3, 3)


def test_codim_bound_detectA():
    problem = detectA_problem()
    code = encode(build_detectA_solution())
    blocks = detectA_free_blocks(code)
    assert sum({"s": 2, "q": 1, "d": 2}[b] for _, b in blocks) == 14
    rng = np.random.default_rng(4)
    assert codim_bound(code, problem, blocks, rng, trials=100) == 8.0
    # Empty free set: the regular-model fallback dim W / 2.
    assert codim_bound(code, problem, [], rng) == 15.0


def test_codim_bound_rejects_wrong_free_set():
    problem = detectA_problem()
    code = encode(build_detectA_solution())
    rng = np.random.default_rng(5)
    # Freeing the (B, reject) next-state block breaks detection.
    tsig, tst = code.tuple_indices()
    bad = None
    for i in range(code.num_tuples):
        if (code.sigma.symbols[tsig[i]], code.states.symbols[tst[i]]) == ("B", "reject"):
            bad = i
    with pytest.raises(FreeSetError):
        codim_bound(code, problem, [(bad, "q")], rng, trials=20)


def test_experiment_determinism_and_resume(tmp_path):
    cfg = ExperimentConfig(problem="detectA", n=12, a=1, b=3, t=10, samples=30,
                           burn_in=30, num_datasets=1, master_seed=77)
    est1 = rlct_experiment(cfg)
    est2 = rlct_experiment(cfg)
    assert est1.lambda_hat == est2.lambda_hat
    assert est1.energies == est2.energies
    out = tmp_path / "run"
    est3 = rlct_experiment(cfg, out_dir=str(out))
    assert est3.lambda_hat == est1.lambda_hat
    assert sorted(p.name for p in out.iterdir()) == [
        f"chain_ds0_beta{j}.npz" for j in range(5)]
    # Resume: chains reload instead of re-sampling, same numbers.
    est4 = rlct_experiment(cfg, out_dir=str(out))
    assert est4.lambda_hat == est1.lambda_hat
    write_results(est4, str(out), version="test")
    assert (out / "results.json").exists()
    assert (out / "energies.csv").exists()
    assert (out / "fits.csv").exists()
