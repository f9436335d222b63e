import math

import numpy as np
import pytest
from scipy.integrate import quad

from sphere_multipliers.errors import DomainError, NumericError, ShapeError
from sphere_multipliers.quadrature import (
    gauss_legendre,
    integrate_profile,
    sphere_grid,
    zonal_integral,
    zonal_rule,
)
from sphere_multipliers.specialfns import harmonic_dim, zonal_profiles


@pytest.mark.parametrize("n", [1, 2, 5, 64, 200])
def test_gauss_legendre_matches_numpy(n):
    rule = gauss_legendre(n)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(rule.nodes, nodes, atol=1e-13)
    np.testing.assert_allclose(rule.weights, weights, atol=1e-13)
    assert rule.order == 2 * n - 1


def test_gauss_legendre_symmetric_and_exact():
    rule = gauss_legendre(17)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    assert math.fsum(rule.weights) == pytest.approx(2.0, rel=1e-15)
    # x^{2n-2} is the highest even power integrated exactly
    assert math.fsum(rule.weights * rule.nodes ** 32) == pytest.approx(2.0 / 33.0, rel=1e-13)


def test_rules_are_cached_and_read_only():
    rule = gauss_legendre(24)
    assert gauss_legendre(24) is rule
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


@pytest.mark.parametrize("n", [0, 5000])
def test_rule_size_bounds(n):
    with pytest.raises(DomainError):
        gauss_legendre(n)


def test_integrate_profile_against_quad():
    assert integrate_profile(np.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-14)
    expected, _ = quad(lambda x: math.exp(x) * math.cos(3 * x), -0.5, 1.2)
    assert integrate_profile(lambda x: np.exp(x) * np.cos(3 * x), -0.5, 1.2) == pytest.approx(expected, rel=1e-12)


def test_integrate_profile_broadcasts_constants():
    assert integrate_profile(lambda x: 3.0, 1.0, 2.0) == pytest.approx(3.0, rel=1e-15)


def test_integrate_profile_rejects_empty_interval():
    with pytest.raises(DomainError):
        integrate_profile(np.cos, 1.0, 1.0)


def test_nan_integrand_reports_node():
    with pytest.raises(NumericError) as info:
        integrate_profile(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)
    assert info.value.node > 0.5


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_zonal_integral_of_one(m):
    assert zonal_integral(lambda u: 1.0, m) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_zonal_orthogonality(m):
    table = lambda u: zonal_profiles(10, m, u)
    for j in range(11):
        for k in range(j, 11):
            value = zonal_integral(lambda u: table(u)[j] * table(u)[k], m)
            expected = 1.0 / harmonic_dim(k, m) if j == k else 0.0
            assert value == pytest.approx(expected, abs=1e-13)


def test_zonal_rule_uses_jacobi_weight():
    rule = zonal_rule(3, 20)
    # int (1 - u^2)^{1/2} du = pi / 2
    assert math.fsum(rule.weights) == pytest.approx(math.pi / 2, rel=1e-13)
    assert zonal_rule(2, 20) is gauss_legendre(20)


def test_sphere_grid_layout():
    grid = sphere_grid(8)
    assert (grid.n_theta, grid.n_phi) == (10, 18)
    assert grid.exact_degree == 17
    assert grid.points.shape == (180, 3)
    np.testing.assert_allclose(np.linalg.norm(grid.points, axis=1), 1.0, atol=1e-15)
    assert grid.area == pytest.approx(4 * math.pi, rel=1e-14)
    assert sphere_grid(8) is grid


def test_sphere_grid_means():
    grid = sphere_grid(6)
    x, y, z = grid.points.T
    assert grid.mean(z ** 2) == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert grid.mean(x ** 4) == pytest.approx(1.0 / 5.0, rel=1e-14)
    assert grid.mean(x * y * z) == pytest.approx(0.0, abs=1e-15)


def test_sphere_grid_argument_checks():
    with pytest.raises(DomainError):
        sphere_grid(-1)
    with pytest.raises(DomainError):
        sphere_grid(4, n_phi=9)
    with pytest.raises(DomainError):
        sphere_grid(4, n_theta=4)
    with pytest.raises(ShapeError):
        sphere_grid(4).mean(np.ones(3))


def test_zonal_integral_agrees_with_sphere_grid():
    rng = np.random.default_rng(20)
    grid = sphere_grid(12)
    z = grid.points[:, 2]
    for _ in range(20):
        profile = np.polynomial.Polynomial(rng.standard_normal(rng.integers(1, 12)))
        assert zonal_integral(profile, 2) == pytest.approx(grid.mean(profile(z)), abs=1e-12)
