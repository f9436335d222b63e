"""
L^2-positive definite kernels on S^m in coefficient space,

    K(x, y) = sum_k sum_j a_{k,j} Y_{k,j}(x) Y_{k,j}(y),   a_{k,j} >= 0,

with a zonal specialization a_{k,j} = a_k. Spatial values are synthesized on
demand; nothing here stores a kernel on a grid.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .coefficients import CoefficientTable
from .errors import ConfigError, DomainError, PositivityError, ShapeError
from .multipliers import MultiplierFamily
from .quadrature import SphereGrid, zonal_integral
from .reports import atomic_write_text, format_json
from .specialfns import cumulative_dim, gegenbauer_index, harmonic_dim, normalized_gegenbauer_table, surface_area

log = logging.getLogger("sphere-multipliers.kernels")

KERNEL_FORMAT_VERSION = 1


def _checked(values: Sequence[float], degree: int) -> np.ndarray:
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        raise PositivityError(f"complex coefficient in degree {degree}", degree=degree)
    arr = np.array(arr, dtype=float).ravel()
    bad = ~np.isfinite(arr) | (arr < 0)
    if np.any(bad):
        index = int(np.argmax(bad))
        raise PositivityError(
            f"coefficient a[{degree}][{index}] = {arr[index]!r} is not a finite nonnegative real",
            degree=degree, index=index,
        )
    return arr


@dataclass(frozen=True)
class CoefficientKernel:
    """Per-degree blocks a_{k,1} >= ... >= a_{k,d_k}."""
    m: int
    blocks: tuple[np.ndarray, ...]

    @property
    def K_max(self) -> int:
        return len(self.blocks) - 1

    @property
    def zonal(self) -> bool:
        return False

    def block_sums(self) -> np.ndarray:
        """A_k = sum_j a_{k,j}."""
        return np.array([math.fsum(block) for block in self.blocks])

    def square_sums(self) -> np.ndarray:
        return np.array([math.fsum(block * block) for block in self.blocks])

    def table(self) -> CoefficientTable:
        return CoefficientTable(self.m, tuple(np.array(block) for block in self.blocks))


@dataclass(frozen=True)
class ZonalKernel:
    """One coefficient a_k per degree, shared by all d_k^m harmonics."""
    m: int
    a: np.ndarray

    @property
    def K_max(self) -> int:
        return len(self.a) - 1

    @property
    def zonal(self) -> bool:
        return True

    @property
    def dims(self) -> np.ndarray:
        return np.array([harmonic_dim(k, self.m) for k in range(self.K_max + 1)], dtype=float)

    @property
    def blocks(self) -> tuple[np.ndarray, ...]:
        return tuple(np.full(harmonic_dim(k, self.m), self.a[k]) for k in range(self.K_max + 1))

    def block_sums(self) -> np.ndarray:
        return self.a * self.dims

    def square_sums(self) -> np.ndarray:
        return self.a * self.a * self.dims

    def table(self) -> CoefficientTable:
        return CoefficientTable(self.m, self.blocks)


Kernel = Union[CoefficientKernel, ZonalKernel]


def make_kernel(m: int, blocks: Sequence[Sequence[float]]) -> CoefficientKernel:
    """Validate shapes and positivity; sort every block nonincreasing."""
    if m < 2:
        raise DomainError(f"kernels live on S^m with m >= 2, got {m}")
    checked = []
    for k, block in enumerate(blocks):
        arr = _checked(block, k)
        expected = harmonic_dim(k, m)
        if arr.shape[0] != expected:
            raise ShapeError(f"degree {k} block has {arr.shape[0]} entries, expected d_{k}^{m} = {expected}")
        checked.append(np.sort(arr)[::-1].copy())
    if not checked:
        raise ShapeError("a kernel needs at least the degree-0 block")
    return CoefficientKernel(m, tuple(checked))


def make_zonal(m: int, a: Sequence[float]) -> ZonalKernel:
    if m < 2:
        raise DomainError(f"kernels live on S^m with m >= 2, got {m}")
    values = np.array([_checked([value], k)[0] for k, value in enumerate(a)])
    if values.size == 0:
        raise ShapeError("a kernel needs at least the degree-0 coefficient")
    return ZonalKernel(m, values)


def power_law_zonal(m: int, K_max: int, gamma: float) -> ZonalKernel:
    """a_k = (1 + k)^{-gamma}."""
    if gamma <= m:
        log.warning(f"gamma = {gamma} <= m = {m}: the untruncated trace sum diverges")
    k = np.arange(K_max + 1, dtype=float)
    return make_zonal(m, (1.0 + k) ** (-float(gamma)))


def random_kernel(m: int, K_max: int, seed: int, gamma: Optional[float] = None) -> CoefficientKernel:
    """Uniform(0, 1) coefficients damped by (1 + k)^{-gamma}, sorted within blocks."""
    gamma = float(m + 2) if gamma is None else float(gamma)
    rng = np.random.default_rng(seed)
    blocks = [rng.uniform(0.0, 1.0, harmonic_dim(k, m)) * (1.0 + k) ** (-gamma) for k in range(K_max + 1)]
    return make_kernel(m, blocks)


def is_degreewise_dominated(kern: Kernel) -> bool:
    """True when no coefficient of degree n exceeds any coefficient of a degree k < n."""
    floor = math.inf
    for block in kern.blocks:
        if block.size and float(np.max(block)) > floor:
            return False
        if block.size:
            floor = min(floor, float(np.min(block)))
    return True


# ─────────────────────────────────────────────────────────────
# Coefficient-space operations
# ─────────────────────────────────────────────────────────────

def synthesize_zonal(kern: ZonalKernel, u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """K(x, y) as a function of u = x . y: sum_k a_k d_k C_k(u) / C_k(1)."""
    return zonal_profile(kern.a * kern.dims, kern.m, u)


def zonal_profile(weights: np.ndarray, m: int, u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """sum_k weights[k] C_k(u) / C_k(1)."""
    weights = np.asarray(weights, dtype=float)
    table = normalized_gegenbauer_table(len(weights) - 1, gegenbauer_index(m), u)
    if np.ndim(u) == 0:
        return math.fsum(weights * table)
    return np.tensordot(weights, table, axes=1)


def sqrt_kernel(kern: Kernel) -> Kernel:
    """K_{1/2}: elementwise square roots of the coefficients."""
    if isinstance(kern, ZonalKernel):
        return ZonalKernel(kern.m, np.sqrt(kern.a))
    return CoefficientKernel(kern.m, tuple(np.sqrt(block) for block in kern.blocks))


def apply_multiplier_section(kern: Kernel, family: MultiplierFamily, t: float) -> CoefficientTable:
    """Coefficients eta_k^t a_{k,j} of M_t applied to a kernel section."""
    if family.m != kern.m:
        raise ShapeError(f"family lives on S^{family.m}, kernel on S^{kern.m}")
    return kern.table().scaled(family.sequence(kern.K_max, t))


def operator_apply(kern: Kernel, f_coeffs: CoefficientTable) -> CoefficientTable:
    """The integral operator in coefficient space: a_{k,j} f-hat(k, j)."""
    if f_coeffs.m != kern.m or f_coeffs.K_max != kern.K_max:
        raise ShapeError(
            f"function band (m={f_coeffs.m}, K={f_coeffs.K_max}) does not match "
            f"kernel band (m={kern.m}, K={kern.K_max})"
        )
    return CoefficientTable(
        kern.m, tuple(a * c for a, c in zip(kern.blocks, f_coeffs.blocks))
    )


# ─────────────────────────────────────────────────────────────
# Eigenvalues
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class EigenvalueSequence:
    """lambda_1 >= lambda_2 >= ... with the (k, j) each value came from (j is 1-based)."""
    lambdas: np.ndarray
    degrees: np.ndarray
    indices: np.ndarray
    m: int

    def __len__(self) -> int:
        return len(self.lambdas)

    def rows(self) -> list[dict]:
        return [
            {"n": n + 1, "lambda": float(value), "k": int(k), "j": int(j)}
            for n, (value, k, j) in enumerate(zip(self.lambdas, self.degrees, self.indices))
        ]


def _rearrange(blocks: Sequence[np.ndarray], m: int) -> EigenvalueSequence:
    values = np.concatenate(blocks) if blocks else np.zeros(0)
    degrees = np.concatenate([np.full(len(b), k) for k, b in enumerate(blocks)])
    indices = np.concatenate([np.arange(1, len(b) + 1) for b in blocks])
    order = np.lexsort((indices, degrees, -values))
    return EigenvalueSequence(values[order], degrees[order], indices[order], m)


def eigenvalue_sequence(kern: Kernel) -> EigenvalueSequence:
    """The decreasing rearrangement of {a_{k,j}}, ties broken by (k, j)."""
    return _rearrange(kern.blocks, kern.m)


def leading_eigenvalues(kern: Kernel, n_max: int) -> EigenvalueSequence:
    """
    lambda_1..lambda_{n_max}. For degreewise-dominated kernels only the degrees
    needed to fill n_max slots are expanded.
    """
    total = cumulative_dim(kern.K_max, kern.m)
    if not 1 <= n_max <= total:
        raise DomainError(f"n_max must be in [1, {total}], got {n_max}")
    if is_degreewise_dominated(kern):
        J = 0
        while cumulative_dim(J, kern.m) < n_max:
            J += 1
        blocks = kern.blocks[: J + 1] if isinstance(kern, CoefficientKernel) else tuple(
            np.full(harmonic_dim(k, kern.m), kern.a[k]) for k in range(J + 1)
        )
    else:
        blocks = kern.blocks
    seq = _rearrange(blocks, kern.m)
    return EigenvalueSequence(seq.lambdas[:n_max], seq.degrees[:n_max], seq.indices[:n_max], kern.m)


# ─────────────────────────────────────────────────────────────
# Reproducing property of the square-root kernel
# ─────────────────────────────────────────────────────────────

def _random_unit_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    v = rng.standard_normal((count, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def reproducing_check(
    kern: ZonalKernel,
    grid: Optional[SphereGrid] = None,
    n_pairs: int = 16,
    seed: int = 0,
    n_quad: Optional[int] = None,
) -> float:
    """
    max |(1/omega_m) int K_{1/2}(x . y) K_{1/2}(w . x) dx - K(w . y)|.

    On S^2 with a grid the integral is a full grid sum at random (w, y)
    pairs; otherwise Funk-Hecke reduces it to sum_k a_k d_k^2 c_k P_k(u) with
    c_k = (1/omega_m) int P_k^2 computed by zonal quadrature.
    """
    root = sqrt_kernel(kern)
    if grid is not None:
        if kern.m != 2:
            raise ShapeError("grid reproducing checks are for S^2")
        if grid.exact_degree < 2 * kern.K_max:
            raise ShapeError(f"grid exact to degree {grid.exact_degree}, need {2 * kern.K_max}")
        rng = np.random.default_rng(seed)
        ws, ys = _random_unit_vectors(rng, n_pairs), _random_unit_vectors(rng, n_pairs)
        points = grid.points
        weights = grid.weights / surface_area(2)
        residual = 0.0
        for w, y in zip(ws, ys):
            left = synthesize_zonal(root, np.clip(points @ y, -1.0, 1.0))
            right = synthesize_zonal(root, np.clip(points @ w, -1.0, 1.0))
            lhs = math.fsum(weights * left * right)
            rhs = synthesize_zonal(kern, float(np.clip(w @ y, -1.0, 1.0)))
            residual = max(residual, abs(lhs - rhs))
        return residual

    n = n_quad or max(64, kern.K_max + 1)
    lam = gegenbauer_index(kern.m)
    constants = np.array([
        zonal_integral(
            lambda u, k=k: normalized_gegenbauer_table(k, lam, u)[k] ** 2, kern.m, n
        )
        for k in range(kern.K_max + 1)
    ])
    dims = kern.dims
    u = np.linspace(-1.0, 1.0, 257)
    lhs = zonal_profile(root.a ** 2 * dims ** 2 * constants, kern.m, u)
    rhs = synthesize_zonal(kern, u)
    return float(np.max(np.abs(lhs - rhs)))


# ─────────────────────────────────────────────────────────────
# Kernel documents
# ─────────────────────────────────────────────────────────────

def dump_kernel(kern: Kernel) -> dict:
    """Versioned JSON-ready document; floats keep their shortest round-trip form."""
    doc = {"version": KERNEL_FORMAT_VERSION, "m": kern.m, "K_max": kern.K_max, "zonal": kern.zonal}
    if isinstance(kern, ZonalKernel):
        doc["a"] = [float(v) for v in kern.a]
    else:
        doc["blocks"] = [[float(v) for v in block] for block in kern.blocks]
    return doc


def load_kernel(doc: dict) -> Kernel:
    if not isinstance(doc, dict):
        raise ConfigError("kernel document must be an object")
    if doc.get("version") != KERNEL_FORMAT_VERSION:
        raise ConfigError(f"unsupported kernel document version {doc.get('version')!r}")
    try:
        m = int(doc["m"])
        K_max = int(doc["K_max"])
        zonal = bool(doc["zonal"])
        values = doc["a"] if zonal else doc["blocks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed kernel document: {exc}") from exc
    kern = make_zonal(m, values) if zonal else make_kernel(m, values)
    if kern.K_max != K_max:
        raise ShapeError(f"document declares K_max = {K_max} but carries {kern.K_max + 1} degrees")
    return kern


def read_kernel_file(path: Union[str, Path]) -> Kernel:
    path = Path(path).expanduser()
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"kernel file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"kernel file {path} is not valid JSON: {exc}") from exc
    return load_kernel(doc)


def write_kernel_file(kern: Kernel, path: Union[str, Path]) -> Path:
    return atomic_write_text(Path(path).expanduser(), format_json(dump_kernel(kern)))
