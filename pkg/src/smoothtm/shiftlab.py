"""Closed-form geometry laboratory for the shift machine.

The two-parameter family w = (h, k) puts mass h on counter value 2 and
mass k on the first letter being A. Propagating that uncertainty through
the shift machine gives a closed-form output distribution over {A, B} for
the first string cell, and two worked KL-divergence surfaces whose zero
sets are classic singular varieties: a boundary edge (example 1) and an
interior curve of degenerate critical points (example 2).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .machines import SHIFT_RUN_STEPS, build_shiftMachine
from .simplex import Alphabet
from .smooth import SmoothConfig, smooth_run

INF_K = float("inf")


def shift_model(a2: str, a3: str, w) -> np.ndarray:
    """Distribution of the first string cell after the run, over (A, B):
    (1-h)^2 k A + (1-h)^2 (1-k) B + 2h(1-h) a2 + h^2 a3."""
    h, k = w
    p_a = (1 - h) ** 2 * k
    p_b = (1 - h) ** 2 * (1 - k)
    for coef, sym in ((2 * h * (1 - h), a2), (h * h, a3)):
        if sym == "A":
            p_a += coef
        else:
            p_b += coef
    return np.array([p_a, p_b])


def shift_smooth_first_cell(a2: str, a3: str, hs, ks, t: int = SHIFT_RUN_STEPS):
    """First-cell marginal over (A, B) from the full smooth simulation of
    the reconstructed shift machine, batched over a (h, k) grid."""
    table = build_shiftMachine()
    sig = table.sigma
    hs = np.asarray(hs, dtype=np.float64).ravel()
    ks = np.asarray(ks, dtype=np.float64).ravel()
    batch = hs.shape[0]
    margin = t + 1
    width = 4 + 2 * margin
    tape = np.zeros((batch, width, len(sig)))
    tape[:, :, sig.index("□")] = 1.0
    tape[:, margin, :] = 0.0
    tape[:, margin, sig.index("0")] = 1.0 - hs
    tape[:, margin, sig.index("2")] = hs
    tape[:, margin + 1, :] = 0.0
    tape[:, margin + 1, sig.index("A")] = ks
    tape[:, margin + 1, sig.index("B")] = 1.0 - ks
    for off, sym in ((2, a2), (3, a3)):
        tape[:, margin + off, :] = 0.0
        tape[:, margin + off, sig.index(sym)] = 1.0
    state = np.zeros((batch, len(table.states)))
    state[:, table.states.index(table.initial_state)] = 1.0
    conf = SmoothConfig(tape, state, margin, sig, table.states, t)
    out = smooth_run(table, conf, t)
    cell = out.tape[:, margin + 1, :]
    return np.stack([cell[:, sig.index("A")], cell[:, sig.index("B")]], axis=1)


def K_example1(w) -> float:
    """K for the deterministic target at w0 = (1, 1):
    -(1/2) log g with g = ((1-h)^2 k + h^2)((1-h)^2 (1-k) + h^2)."""
    h, k = w
    g = ((1 - h) ** 2 * k + h * h) * ((1 - h) ** 2 * (1 - k) + h * h)
    if g <= 0.0:
        return INF_K
    return float(-0.5 * np.log(g))


def K_example2(w) -> float:
    """K for the coin-flip target on input AB:
    -(1/2) log(4 f (1-f)) with f = (1-h)^2 k + 2h(1-h)."""
    h, k = w
    f = (1 - h) ** 2 * k + 2 * h * (1 - h)
    if f <= 0.0 or f >= 1.0:
        return INF_K
    return float(-0.5 * np.log(4 * f * (1 - f)))


def example2_f(w) -> float:
    h, k = w
    return (1 - h) ** 2 * k + 2 * h * (1 - h)


K_EXAMPLES = {"1": K_example1, "2": K_example2}


def grad_hessian(K, w, grad_step: float = 1e-5, hess_step: float = 1e-3):
    """Central-difference gradient and Hessian with one Richardson
    refinement for the second derivatives. Needs K finite in a
    neighbourhood of w."""
    w = np.asarray(w, dtype=np.float64)

    def at(dh, dk):
        v = K((w[0] + dh, w[1] + dk))
        if not np.isfinite(v):
            raise ValueError(f"K not finite near {w}")
        return v

    g = np.array([
        (at(grad_step, 0) - at(-grad_step, 0)) / (2 * grad_step),
        (at(0, grad_step) - at(0, -grad_step)) / (2 * grad_step),
    ])

    def hessian(s):
        k0 = at(0, 0)
        hxx = (at(s, 0) - 2 * k0 + at(-s, 0)) / s ** 2
        hyy = (at(0, s) - 2 * k0 + at(0, -s)) / s ** 2
        hxy = (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4 * s ** 2)
        return np.array([[hxx, hxy], [hxy, hyy]])

    h1 = hessian(hess_step)
    h2 = hessian(hess_step / 2)
    hess = (4 * h2 - h1) / 3.0
    return g, hess


def scan_zero_set(K, resolution: int = 101, zero_tol: float = 1e-9,
                  coarse_tol: float = 1e-4, clip: float = 0.01):
    """Raster K over the unit square and extract the K = 0 locus.

    The raster (clipped at `clip` for plotting) is resolution x resolution.
    The point list contains every grid point with K < zero_tol plus
    boundary-accurate points found by minimizing K along grid edges whose
    endpoints dip below `coarse_tol` (the zero set is a measure-zero curve,
    so raw grid points almost never reach zero_tol in the interior).
    """
    if resolution < 32:
        raise ValueError("resolution must be at least 32")
    axis = np.linspace(0.0, 1.0, resolution)
    raster = np.empty((resolution, resolution))
    for i, h in enumerate(axis):
        for j, k in enumerate(axis):
            raster[i, j] = K((h, k))
    points = [(float(axis[i]), float(axis[j]))
              for i in range(resolution) for j in range(resolution)
              if raster[i, j] < zero_tol]

    def refine(fixed, lo, hi, along_h):
        fn = (lambda x: K((x, fixed))) if along_h else (lambda x: K((fixed, x)))
        res = minimize_scalar(fn, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < zero_tol:
            x = float(res.x)
            return (x, float(fixed)) if along_h else (float(fixed), x)
        return None

    for i in range(resolution):
        for j in range(resolution - 1):
            if min(raster[i, j], raster[i, j + 1]) < coarse_tol:
                p = refine(axis[i], axis[j], axis[j + 1], along_h=False)
                if p:
                    points.append(p)
            if min(raster[j, i], raster[j + 1, i]) < coarse_tol:
                p = refine(axis[i], axis[j], axis[j + 1], along_h=True)
                if p:
                    points.append(p)
    clipped = np.minimum(raster, clip)
    return points, clipped


def write_raster_csv(raster, path, resolution=None):
    res = raster.shape[0]
    axis = np.linspace(0.0, 1.0, res)
    with open(path, "w") as f:
        f.write("h,k,K\n")
        for i in range(res):
            for j in range(res):
                f.write(f"{float(axis[i])!r},{float(axis[j])!r},"
                        f"{float(raster[i, j])!r}\n")


def write_points_csv(points, path):
    with open(path, "w") as f:
        f.write("h,k\n")
        for h, k in points:
            f.write(f"{float(h)!r},{float(k)!r}\n")
