import itertools

import numpy as np
import pytest

from smoothtm.shiftlab import (
    K_example1, K_example2, example2_f, grad_hessian, scan_zero_set,
    shift_model, shift_smooth_first_cell,
)


def test_shift_model_vertices():
    assert np.allclose(shift_model("B", "A", (1.0, 0.3)), [1, 0])
    assert np.allclose(shift_model("A", "B", (1.0, 0.3)), [0, 1])
    assert np.allclose(shift_model("B", "B", (0.0, 1.0)), [1, 0])


def test_shift_model_frozen_value():
    # (1-h)^2 k + 2h(1-h)[a2=A] + h^2[a3=A] at (0.5, 0.5), a2=B, a3=A:
    # 0.25*0.5 + 0 + 0.25 = 0.375
    p = shift_model("B", "A", (0.5, 0.5))
    assert p[0] == pytest.approx(0.375, abs=1e-15)


def test_shift_model_is_distribution_on_grid():
    hs, ks = np.meshgrid(np.linspace(0, 1, 101), np.linspace(0, 1, 101))
    for a2, a3 in itertools.product("AB", repeat=2):
        pa = np.array([shift_model(a2, a3, (h, k))
                       for h, k in zip(hs.ravel(), ks.ravel())])
        assert np.all(pa >= -1e-15)
        assert np.allclose(pa.sum(axis=1), 1.0, atol=1e-12)


def test_smooth_simulation_matches_model_on_grid():
    hs, ks = np.meshgrid(np.linspace(0, 1, 101), np.linspace(0, 1, 101))
    hs, ks = hs.ravel(), ks.ravel()
    for a2, a3 in itertools.product("AB", repeat=2):
        sim = shift_smooth_first_cell(a2, a3, hs, ks)
        model = np.stack([shift_model(a2, a3, (h, k)) for h, k in zip(hs, ks)])
        assert np.abs(sim - model).max() <= 1e-9, (a2, a3)


def test_K_example1_values():
    assert K_example1((1.0, 1.0)) == 0.0
    # g(0.5, 0.5) = 0.375^2 = 0.140625; frozen from direct evaluation.
    assert K_example1((0.5, 0.5)) == pytest.approx(0.9808292530117262, rel=1e-12)
    assert K_example1((0.0, 1.0)) == float("inf")


def test_K_example2_values():
    assert K_example2((0.0, 0.5)) == pytest.approx(0.0, abs=1e-15)
    # f(0.5,0.5) = 0.625; K = -log(4*0.625*0.375)/2 = 0.03226926533...
    # (direct evaluation of the display).
    assert K_example2((0.5, 0.5)) == pytest.approx(0.03226926056878559, rel=1e-12)
    assert K_example2((1.0, 0.0)) == float("inf")  # f = 0


def test_K_example2_zero_on_curve():
    # Any (h, k) with f = 1/2 is a zero of K.
    for h in np.linspace(0.01, 0.28, 7):
        k = (0.5 - 2 * h * (1 - h)) / (1 - h) ** 2
        assert 0 <= k <= 1
        assert K_example2((h, k)) <= 1e-12


def test_gradient_matches_closed_form_interior():
    # grad K = (f - 1/2) / (f(1-f)) grad f away from the curve.
    for (h, k) in [(0.3, 0.8), (0.6, 0.2), (0.45, 0.55)]:
        f = example2_f((h, k))
        dfdh = -2 * (1 - h) * k + 2 - 4 * h
        dfdk = (1 - h) ** 2
        want = (f - 0.5) / (f * (1 - f)) * np.array([dfdh, dfdk])
        g, _ = grad_hessian(K_example2, (h, k))
        assert np.abs(g - want).max() <= 1e-6 * max(1.0, np.abs(want).max())


def test_example1_corner_gradient():
    # One-sided at the corner (1,1): compare against the analytic gradient
    # of -log(g)/2. g = ((1-h)^2 k + h^2)((1-h)^2(1-k) + h^2).
    h = 1 - 1e-3
    k = 1 - 1e-3
    eps = 1e-6
    g_fd = np.array([
        (K_example1((h + eps, k)) - K_example1((h - eps, k))) / (2 * eps),
        (K_example1((h, k + eps)) - K_example1((h, k - eps))) / (2 * eps),
    ])
    def g_fun(hh, kk):
        return (((1 - hh) ** 2 * kk + hh ** 2)
                * ((1 - hh) ** 2 * (1 - kk) + hh ** 2))
    ga = np.array([
        -(g_fun(h + eps, k) - g_fun(h - eps, k)) / (2 * eps) / (2 * g_fun(h, k)),
        -(g_fun(h, k + eps) - g_fun(h, k - eps)) / (2 * eps) / (2 * g_fun(h, k)),
    ])
    assert np.abs(g_fd - ga).max() <= 1e-5


def test_scan_zero_set_example2():
    points, raster = scan_zero_set(K_example2, resolution=101)
    assert raster.shape == (101, 101)
    assert raster.max() <= 0.01 + 1e-15
    assert len(points) > 50
    for h, k in points:
        assert abs(example2_f((h, k)) - 0.5) <= 1e-5, (h, k)


def test_scan_zero_set_example1_contains_edge():
    points, _ = scan_zero_set(K_example1, resolution=101)
    pts = set((round(h, 6), round(k, 6)) for h, k in points)
    assert (1.0, 1.0) in pts and (1.0, 0.0) in pts
    # The whole edge h=1 is in the zero set.
    edge = [p for p in points if abs(p[0] - 1.0) < 1e-9]
    assert len(edge) >= 101


def test_scan_zero_set_resolution_guard():
    with pytest.raises(ValueError):
        scan_zero_set(K_example2, resolution=16)


def test_hessian_degenerate_on_zero_set():
    points, _ = scan_zero_set(K_example2, resolution=101)
    interior = [(h, k) for h, k in points if 0.02 < h < 0.98 and 0.02 < k < 0.98]
    assert interior
    for h, k in interior[:200]:
        g, hess = grad_hessian(K_example2, (h, k))
        assert np.linalg.norm(g) <= 1e-6, (h, k)
        assert abs(np.linalg.det(hess)) <= 1e-5, (h, k)
