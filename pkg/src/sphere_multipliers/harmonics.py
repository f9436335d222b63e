"""
Real spherical harmonics on S^2 in the normalized inner product

    <f, g> = (1/omega_2) * integral f g dsigma,

so every Y_{k,j} has unit norm. Within degree k the basis is ordered

    j = 1: order 0,  j = 2q: cos(q phi),  j = 2q + 1: sin(q phi),  q = 1..k.

Associated Legendre functions use the fully normalized Holmes-Featherstone
recurrences, which stay in range for every degree the grids support.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cache import shared_table
from .coefficients import CoefficientTable, coefficient_table, from_flat
from .errors import DomainError, ShapeError
from .quadrature import SphereGrid, sphere_grid
from .specialfns import harmonic_dim, surface_area

log = logging.getLogger("sphere-multipliers.harmonics")


def normalized_legendre(K: int, x: np.ndarray) -> np.ndarray:
    """
    Fully normalized associated Legendre functions P-bar_{k,q}(x), shape
    (K + 1, K + 1, len(x)), zero for q > k.

    P-bar_{k,q}(cos theta) cos(q phi) has unit mean square over S^2 for every
    q (the factor sqrt(2) for q > 0 is included).
    """
    x = np.asarray(x, dtype=float).ravel()
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    plm = np.zeros((K + 1, K + 1, x.shape[0]))
    plm[0, 0] = 1.0
    if K == 0:
        return plm
    plm[1, 1] = math.sqrt(3.0) * s
    for q in range(2, K + 1):
        plm[q, q] = math.sqrt((2.0 * q + 1.0) / (2.0 * q)) * s * plm[q - 1, q - 1]
    for q in range(0, K):
        plm[q + 1, q] = math.sqrt(2.0 * q + 3.0) * x * plm[q, q]
    for q in range(0, K - 1):
        for k in range(q + 2, K + 1):
            a = math.sqrt((2.0 * k - 1.0) * (2.0 * k + 1.0) / ((k - q) * (k + q)))
            b = math.sqrt(
                (2.0 * k + 1.0) * (k + q - 1.0) * (k - q - 1.0)
                / ((k - q) * (k + q) * (2.0 * k - 3.0))
            )
            plm[k, q] = a * x * plm[k - 1, q] - b * plm[k - 2, q]
    return plm


def _column_layout(K: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(degree, order, is_sine) for every column in degree-major basis order."""
    degrees, orders, sines = [], [], []
    for k in range(K + 1):
        degrees.append(k)
        orders.append(0)
        sines.append(False)
        for q in range(1, k + 1):
            degrees += [k, k]
            orders += [q, q]
            sines += [False, True]
    return np.array(degrees), np.array(orders), np.array(sines)


def real_harmonics(K: int, points: np.ndarray) -> np.ndarray:
    """All Y_{k,j} with k <= K at unit vectors `points` (n, 3); shape (n, (K+1)^2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 3:
        raise ShapeError(f"points must have shape (n, 3), got {points.shape}")
    norms = np.linalg.norm(points, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-10):
        raise DomainError("points must lie on the unit sphere")
    z = np.clip(points[:, 2] / norms, -1.0, 1.0)
    phi = np.arctan2(points[:, 1], points[:, 0])

    plm = normalized_legendre(K, z)
    degrees, orders, sines = _column_layout(K)
    trig = np.where(
        sines[:, None],
        np.sin(orders[:, None] * phi[None, :]),
        np.cos(orders[:, None] * phi[None, :]),
    )
    return (plm[degrees, orders] * trig).T


@dataclass(frozen=True)
class HarmonicBasis:
    """Harmonics of degree <= K_max tabulated on a SphereGrid."""
    grid: SphereGrid
    K_max: int
    plm: np.ndarray          # (K+1, K+1, n_theta)
    cos_table: np.ndarray    # (K+1, n_phi)
    sin_table: np.ndarray    # (K+1, n_phi)

    @property
    def m(self) -> int:
        return 2

    @property
    def exact(self) -> bool:
        """True when products of two basis functions integrate exactly."""
        return self.grid.exact_degree >= 2 * self.K_max

    def matrix(self) -> np.ndarray:
        """Basis values at every grid node, shape (grid.size, (K+1)^2)."""
        return shared_table("harmonics.matrix").get_or_create(
            (self.grid.n_theta, self.grid.n_phi, self.K_max),
            lambda: real_harmonics(self.K_max, self.grid.points),
        )

    def gram(self) -> np.ndarray:
        """G[a, b] = (1/omega_2) sum_x w_x Y_a(x) Y_b(x)."""
        weighted = self.matrix() * np.sqrt(self.grid.weights / surface_area(2))[:, None]
        return weighted.T @ weighted

    def _split(self, coeffs: CoefficientTable) -> tuple[np.ndarray, np.ndarray]:
        if coeffs.m != 2:
            raise ShapeError(f"grid synthesis needs m = 2 coefficients, got m = {coeffs.m}")
        if coeffs.K_max > self.K_max:
            raise ShapeError(f"coefficients reach degree {coeffs.K_max}, basis stops at {self.K_max}")
        K = self.K_max
        c_cos = np.zeros((K + 1, K + 1))
        c_sin = np.zeros((K + 1, K + 1))
        for k, block in enumerate(coeffs.blocks):
            c_cos[k, 0] = block[0]
            c_cos[k, 1:k + 1] = block[1::2]
            c_sin[k, 1:k + 1] = block[2::2]
        return c_cos, c_sin

    def synthesize(self, coeffs: CoefficientTable) -> np.ndarray:
        """Values of sum c_{k,j} Y_{k,j} at the grid nodes (colatitude-major, flat)."""
        c_cos, c_sin = self._split(coeffs)
        a = np.einsum("kq,kqt->tq", c_cos, self.plm)
        b = np.einsum("kq,kqt->tq", c_sin, self.plm)
        return (a @ self.cos_table + b @ self.sin_table).ravel()

    def analyze(self, values: np.ndarray) -> CoefficientTable:
        """f-hat(k, j) = (1/omega_2) integral f Y_{k,j} dsigma by grid quadrature."""
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise DomainError("complex samples; only real functions are supported")
        values = np.asarray(values, dtype=float).ravel()
        if values.shape[0] != self.grid.size:
            raise ShapeError(f"expected {self.grid.size} grid values, got {values.shape[0]}")
        f = values.reshape(self.grid.n_theta, self.grid.n_phi)
        f_cos = f @ self.cos_table.T * self.grid.phi_weight
        f_sin = f @ self.sin_table.T * self.grid.phi_weight
        scale = 1.0 / surface_area(2)
        a = np.einsum("kqt,t,tq->kq", self.plm, self.grid.theta_weights, f_cos) * scale
        b = np.einsum("kqt,t,tq->kq", self.plm, self.grid.theta_weights, f_sin) * scale

        blocks = []
        for k in range(self.K_max + 1):
            block = np.empty(2 * k + 1)
            block[0] = a[k, 0]
            block[1::2] = a[k, 1:k + 1]
            block[2::2] = b[k, 1:k + 1]
            blocks.append(block)
        return coefficient_table(2, blocks)


def harmonic_basis(grid: SphereGrid, K_max: int) -> HarmonicBasis:
    """Tabulate (and cache) the basis of degree <= K_max on `grid`."""
    if grid.m != 2:
        raise ShapeError("harmonic grids exist for S^2 only")
    if 2 * K_max + 1 > grid.n_phi:
        raise ShapeError(f"{grid.n_phi} longitudes cannot resolve order {K_max}")
    if grid.exact_degree < 2 * K_max:
        log.warning(
            f"grid exact to degree {grid.exact_degree} < 2K = {2 * K_max}; "
            f"coefficients will be approximate"
        )

    def build() -> HarmonicBasis:
        orders = np.arange(K_max + 1)[:, None]
        return HarmonicBasis(
            grid=grid,
            K_max=K_max,
            plm=normalized_legendre(K_max, grid.cos_theta),
            cos_table=np.cos(orders * grid.phi[None, :]),
            sin_table=np.sin(orders * grid.phi[None, :]),
        )

    return shared_table("harmonics.basis").get_or_create((grid.n_theta, grid.n_phi, K_max), build)


def forward_coeffs(values: np.ndarray, grid: SphereGrid, K_max: int) -> CoefficientTable:
    """Fourier coefficients of grid samples up to degree K_max."""
    return harmonic_basis(grid, K_max).analyze(values)


def synthesize(coeffs: CoefficientTable, basis: Optional[HarmonicBasis] = None) -> np.ndarray:
    """Sample a coefficient table on the basis grid (default: the exact grid for its band)."""
    if basis is None:
        basis = harmonic_basis(sphere_grid(coeffs.K_max), coeffs.K_max)
    return basis.synthesize(coeffs)


def lp_norm(values: np.ndarray, grid: SphereGrid, p: float) -> float:
    """((1/omega_2) integral |f|^p dsigma)^{1/p} by grid quadrature."""
    if not p >= 1 or not math.isfinite(p):
        raise DomainError(f"p must be a finite real >= 1, got {p}")
    magnitudes = np.abs(np.asarray(values, dtype=float).ravel())
    if p == 2:
        return math.sqrt(grid.mean(magnitudes * magnitudes))
    if p == 1:
        return grid.mean(magnitudes)
    return grid.mean(magnitudes ** p) ** (1.0 / p)


def random_coefficients(m: int, K_max: int, rng: np.random.Generator, decay: float = 1.0) -> CoefficientTable:
    """Standard normal coefficients damped by (1 + k)^{-decay}."""
    damping = np.concatenate([
        np.full(harmonic_dim(k, m), (1.0 + k) ** (-decay)) for k in range(K_max + 1)
    ])
    return from_flat(m, K_max, rng.standard_normal(damping.size) * damping)


def evaluate(coeffs: CoefficientTable, points: np.ndarray) -> np.ndarray:
    """Values of a degree <= K m = 2 expansion at arbitrary unit vectors."""
    if coeffs.m != 2:
        raise ShapeError("pointwise evaluation is implemented for S^2")
    return real_harmonics(coeffs.K_max, points) @ coeffs.flat()

