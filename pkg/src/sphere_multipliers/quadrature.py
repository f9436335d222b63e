"""
Quadrature on [-1, 1], on profile intervals [a, b], on S^m through the zonal
reduction, and on S^2 through a Gauss-Legendre x uniform-longitude product grid.

Rules are cached per (kind, size) in shared insert-once tables; a rule object
is immutable after construction.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_jacobi

from .cache import shared_table
from .errors import DomainError, NumericError, ShapeError
from .specialfns import surface_area

log = logging.getLogger("sphere-multipliers.quadrature")

MAX_RULE_SIZE = 4096
MAX_GRID_DEGREE = 256
NEWTON_TOLERANCE = 1e-15
NEWTON_MAX_STEPS = 100

# Default node count for profile and zonal integrals.
DEFAULT_PROFILE_NODES = 64


# ─────────────────────────────────────────────────────────────
# One-dimensional rules
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Rule1D:
    """Nodes in (-1, 1), positive weights, exact for polynomials up to `order`."""
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def transplant(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the same rule mapped affinely onto [a, b]."""
        half = 0.5 * (b - a)
        return half * self.nodes + 0.5 * (a + b), half * self.weights


def _legendre_newton(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Tricomi initial guesses, largest root first
    i = np.arange(n)
    x = np.cos(np.pi * (i + 0.75) / (n + 0.5))

    for _ in range(NEWTON_MAX_STEPS):
        p_prev, p = np.ones_like(x), x.copy()
        for j in range(2, n + 1):
            p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
        dp = n * (x * p - p_prev) / (x * x - 1.0)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= NEWTON_TOLERANCE:
            break
    else:
        raise NumericError(
            f"Gauss-Legendre Newton iteration did not converge for n={n}",
            node=float(x[np.argmax(np.abs(step))]),
        )

    p_prev, p = np.ones_like(x), x.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    weights = 2.0 / ((1.0 - x * x) * dp * dp)

    nodes = x[::-1].copy()
    weights = weights[::-1].copy()
    # exact symmetry about 0
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def gauss_legendre(n: int) -> Rule1D:
    """The n-point Gauss-Legendre rule on [-1, 1] (exact to degree 2n - 1)."""
    if not 1 <= n <= MAX_RULE_SIZE:
        raise DomainError(f"rule size must be in [1, {MAX_RULE_SIZE}], got {n}")

    def build() -> Rule1D:
        nodes, weights = _legendre_newton(n)
        return Rule1D(nodes=nodes, weights=weights, order=2 * n - 1)

    return shared_table("quadrature.gauss_legendre").get_or_create(n, build)


def zonal_rule(m: int, n: int) -> Rule1D:
    """
    Gauss rule for the weight (1 - u^2)^{(m-2)/2} on [-1, 1].

    m = 2 is the Legendre case; larger m use scipy's Gauss-Jacobi nodes with
    alpha = beta = (m - 2)/2.
    """
    if m < 2:
        raise DomainError(f"zonal reduction needs m >= 2, got {m}")
    if m == 2:
        return gauss_legendre(n)
    if not 1 <= n <= MAX_RULE_SIZE:
        raise DomainError(f"rule size must be in [1, {MAX_RULE_SIZE}], got {n}")

    def build() -> Rule1D:
        alpha = (m - 2) / 2.0
        nodes, weights = roots_jacobi(n, alpha, alpha)
        return Rule1D(nodes=np.asarray(nodes, dtype=float), weights=np.asarray(weights, dtype=float),
                      order=2 * n - 1)

    return shared_table("quadrature.zonal").get_or_create((m, n), build)


def _evaluate(g: Callable, nodes: np.ndarray) -> np.ndarray:
    values = np.broadcast_to(np.asarray(g(nodes), dtype=float), nodes.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        node = float(nodes[np.argmax(bad)])
        raise NumericError(f"integrand is not finite at node {node!r}", node=node)
    return values


def integrate_profile(g: Callable, a: float, b: float, n: int = DEFAULT_PROFILE_NODES) -> float:
    """
    Integral of g over [a, b] with the n-point Gauss-Legendre rule.

    g must accept a numpy array of nodes; a constant return value is broadcast.
    """
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    nodes, weights = gauss_legendre(n).transplant(a, b)
    return math.fsum(weights * _evaluate(g, nodes))


def zonal_integral(profile: Callable, m: int, n: int = DEFAULT_PROFILE_NODES) -> float:
    """
    Normalized integral over S^m of the zonal function x -> profile(x . e):

        (omega_{m-1} / omega_m) * int_{-1}^{1} profile(u) (1 - u^2)^{(m-2)/2} du.

    Exact for polynomial profiles of degree <= 2n - 1.
    """
    rule = zonal_rule(m, n)
    total = math.fsum(rule.weights * _evaluate(profile, rule.nodes))
    return surface_area(m - 1) / surface_area(m) * total


# ─────────────────────────────────────────────────────────────
# Product grid on S^2
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SphereGrid:
    """
    Gauss-Legendre in cos(theta) x uniform longitudes on S^2.

    Points are ordered colatitude-major: index i * n_phi + j.
    """
    m: int
    cos_theta: np.ndarray
    theta_weights: np.ndarray
    phi: np.ndarray
    exact_degree: int

    @property
    def n_theta(self) -> int:
        return len(self.cos_theta)

    @property
    def n_phi(self) -> int:
        return len(self.phi)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def phi_weight(self) -> float:
        return 2.0 * math.pi / self.n_phi

    @property
    def weights(self) -> np.ndarray:
        return np.repeat(self.theta_weights * self.phi_weight, self.n_phi)

    @property
    def points(self) -> np.ndarray:
        """Unit vectors, shape (size, 3)."""
        sin_theta = np.sqrt(1.0 - self.cos_theta ** 2)
        x = np.outer(sin_theta, np.cos(self.phi))
        y = np.outer(sin_theta, np.sin(self.phi))
        z = np.repeat(self.cos_theta[:, None], self.n_phi, axis=1)
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    @property
    def area(self) -> float:
        return math.fsum(self.weights)

    def mean(self, values: np.ndarray) -> float:
        """(1/omega_2) * integral of the sampled function."""
        values = np.asarray(values, dtype=float).ravel()
        if values.shape[0] != self.size:
            raise ShapeError(f"expected {self.size} grid values, got {values.shape[0]}")
        return math.fsum(self.weights * values) / surface_area(2)


def sphere_grid(K: int, n_theta: Optional[int] = None, n_phi: Optional[int] = None) -> SphereGrid:
    """
    A grid on S^2 that integrates every spherical polynomial of degree <= 2K exactly.

    Defaults: n_theta = K + 2 Gauss-Legendre colatitudes, n_phi = 2K + 2 longitudes.
    """
    if not 0 <= K <= MAX_GRID_DEGREE:
        raise DomainError(f"grid band limit must be in [0, {MAX_GRID_DEGREE}], got {K}")
    n_theta = K + 2 if n_theta is None else n_theta
    n_phi = 2 * K + 2 if n_phi is None else n_phi
    if n_theta < K + 1:
        raise DomainError(f"n_theta must be >= K + 1 = {K + 1}, got {n_theta}")
    if n_phi < 2 * K + 2:
        raise DomainError(f"n_phi must be >= 2K + 2 = {2 * K + 2}, got {n_phi}")

    def build() -> SphereGrid:
        rule = gauss_legendre(n_theta)
        phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
        exact = min(2 * n_theta - 1, n_phi - 1)
        log.debug(f"sphere grid {n_theta}x{n_phi}, exact to degree {exact}")
        return SphereGrid(
            m=2,
            cos_theta=np.array(rule.nodes),
            theta_weights=np.array(rule.weights),
            phi=phi,
            exact_degree=exact,
        )

    return shared_table("quadrature.sphere_grid").get_or_create((n_theta, n_phi), build)
