"""Area energy values, the conjugate duality it rests on, and the two
proximal maps of the inner solver."""

import numpy as np
import pytest

from pmsflow.energy import (
    area_energy,
    conjugate_value,
    prox_dual,
    prox_quadratic,
)
from pmsflow.grid import CellField, interval_grid, radial_grid, rectangle_grid


def _face_sum_energy(grid, values):
    # independent reference: face control volumes times sqrt(1 + slope^2),
    # plus the boundary half cells that no face covers
    h = grid.spacing[0]
    w = grid.face_weights[0]
    slopes = np.diff(values) / h
    return float(np.sum(w * np.sqrt(1.0 + slopes**2))) + (
        grid.total_volume - float(np.sum(w))
    )


def test_constant_energy_is_domain_volume():
    for grid in (
        interval_grid(0.0, 1.0, 50),
        radial_grid(3, 1.0, 30),
        rectangle_grid((0, 0), (2, 1), (10, 10)),
    ):
        e = area_energy(CellField(grid, np.full(grid.shape, 4.2)))
        assert e.total == pytest.approx(grid.total_volume, abs=1e-14)
        assert e.steep_part == 0.0


def test_energy_breakdown_sums():
    g = interval_grid(0.0, 1.0, 100)
    rng = np.random.default_rng(7)
    u = CellField(g, rng.uniform(-1, 1, 100))
    e = area_energy(u)
    assert e.total == e.smooth_part + e.steep_part
    assert e.total >= g.total_volume


def test_slope_one_energy():
    g = interval_grid(0.0, 1.0, 80)
    u = CellField(g, g.cell_centers[0].copy())
    e = area_energy(u)
    # sqrt(2) up to the boundary half cells that see no slope
    assert abs(e.total - np.sqrt(2.0)) <= 2.0 * g.spacing[0]
    assert e.total == pytest.approx(_face_sum_energy(g, u.values))


def test_unit_step_energy_near_two():
    g = interval_grid(0.0, 1.0, 200)
    x = g.cell_centers[0]
    u = CellField(g, np.where(x < 0.5, 0.0, 1.0))
    e = area_energy(u)
    # flat area 1 plus jump height 1
    assert abs(e.total - 2.0) <= 0.02
    assert e.total == pytest.approx(_face_sum_energy(g, u.values))
    assert e.steep_part > 0.0


def test_energy_translation_invariance():
    g = radial_grid(3, 1.0, 40)
    rng = np.random.default_rng(11)
    v = rng.uniform(-2, 2, 40)
    e0 = area_energy(CellField(g, v)).total
    e1 = area_energy(CellField(g, v + 17.5)).total
    assert e1 == pytest.approx(e0, rel=1e-14)


def test_energy_convexity_property():
    rng = np.random.default_rng(23)
    for grid in (interval_grid(0.0, 1.0, 30), rectangle_grid((0, 0), (1, 1), (7, 9))):
        for _ in range(20):
            u = rng.standard_normal(grid.shape)
            w = rng.standard_normal(grid.shape)
            lam = rng.uniform(0.05, 0.95)
            mixed = area_energy(CellField(grid, lam * u + (1 - lam) * w)).total
            bound = (
                lam * area_energy(CellField(grid, u)).total
                + (1 - lam) * area_energy(CellField(grid, w)).total
            )
            assert mixed <= bound + 1e-10


def test_rectangle_energy_uses_colocated_magnitude():
    g = rectangle_grid((0, 0), (1, 1), (6, 6))
    xs, ys = np.meshgrid(*g.cell_centers, indexing="ij")
    u = CellField(g, 3.0 * xs + 4.0 * ys)
    from pmsflow.grid import colocated_magnitude

    mag = colocated_magnitude(u)
    expected = float(np.sum(g.cell_volumes * np.sqrt(1.0 + mag**2)))
    assert area_energy(u).total == pytest.approx(expected)


def test_conjugate_values():
    assert conjugate_value(np.array(0.0)) == 1.0
    assert conjugate_value(np.array([1.0, 0.0])) == 0.0
    with pytest.raises(ValueError):
        conjugate_value(np.array([0.8, 0.8]))


def test_conjugate_duality_sup():
    # sqrt(1 + q^2) = sup over |p| <= 1 of p q + sqrt(1 - p^2)
    q = 3.0
    p = np.linspace(-1.0, 1.0, 20001)
    sup = np.max(p * q + np.sqrt(1.0 - p**2))
    assert abs(sup - np.sqrt(10.0)) <= 1e-3


def test_conjugate_duality_random_q():
    rng = np.random.default_rng(3)
    p = np.linspace(-1.0, 1.0, 200001)
    conj = np.sqrt(1.0 - p**2)
    for q in rng.uniform(-5, 5, 10):
        sup = np.max(p * q + conj)
        # sup over the grid is below the true value by at most the grid gap
        assert 0.0 <= np.sqrt(1.0 + q * q) - sup <= 1e-7 * (1 + abs(q)) ** 2


def _radius_by_bisection(m, sigma):
    lo, hi = 0.0, 1.0 - 1e-16
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if sigma * mid / np.sqrt(1.0 - mid * mid) + mid > m:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_prox_dual_matches_bisection():
    rng = np.random.default_rng(17)
    for _ in range(50):
        sigma = rng.uniform(0.01, 10.0)
        p_hat = rng.standard_normal(rng.integers(1, 4)) * rng.uniform(0.1, 5.0)
        out = prox_dual(p_hat, sigma)
        m = float(np.linalg.norm(p_hat))
        r = float(np.linalg.norm(out))
        assert r < 1.0
        assert r == pytest.approx(_radius_by_bisection(m, sigma), abs=1e-10)
        # defining equation residual at the returned radius
        if m > 0:
            assert abs(sigma * r / np.sqrt(1 - r * r) + r - m) <= 1e-9 * (1 + m)


def test_prox_dual_known_radius():
    out = prox_dual(np.array([2.0]), 1.0)
    assert out[0] == pytest.approx(0.7747295739010802, abs=1e-10)


def test_prox_dual_zero_and_direction():
    assert np.all(prox_dual(np.zeros(3), 2.0) == 0.0)
    p_hat = np.array([3.0, 4.0])
    out = prox_dual(p_hat, 0.5)
    # output is a positive multiple of the input direction
    assert out[0] * p_hat[1] == pytest.approx(out[1] * p_hat[0], abs=1e-14)
    assert np.dot(out, p_hat) > 0


def test_prox_dual_beats_radial_scan():
    # returned point minimizes -sqrt(1-r^2) + (r-m)^2/(2 sigma) on a fine scan
    sigma, m = 0.7, 1.3
    out = prox_dual(np.array([m]), sigma)
    r_star = float(out[0])

    def objective(r):
        return -np.sqrt(1.0 - r * r) + (r - m) ** 2 / (2.0 * sigma)

    scan = np.linspace(0.0, 1.0 - 1e-9, 100001)
    assert objective(r_star) <= np.min(objective(scan)) + 1e-10


def test_prox_dual_large_sigma_residual():
    out = prox_dual(np.array([2.0]), 1000.0)
    r = float(out[0])
    assert 0.0 < r < 1.0
    assert abs(r * (1.0 + 1000.0 / np.sqrt(1.0 - r * r)) - 2.0) <= 1e-9


def test_prox_dual_validation():
    with pytest.raises(ValueError):
        prox_dual(np.array([1.0]), 0.0)


def test_prox_quadratic_closed_form():
    g = interval_grid(0.0, 1.0, 4)
    v_hat = np.array([4.0, 4.0, 4.0, 4.0])
    u_prev = np.zeros(4)
    out = prox_quadratic(v_hat, u_prev, tau=1.0, s=3.0)
    assert np.allclose(out, 1.0)
    # fixed point and midpoint cases
    assert np.allclose(prox_quadratic(u_prev, u_prev, 0.3, 0.9), u_prev)
    assert np.allclose(prox_quadratic(v_hat, u_prev, 2.0, 2.0), 2.0)
    with pytest.raises(ValueError):
        prox_quadratic(v_hat, np.zeros(3), 1.0, 1.0)
    with pytest.raises(ValueError):
        prox_quadratic(v_hat, u_prev, -1.0, 1.0)
