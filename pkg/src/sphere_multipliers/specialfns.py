"""
Special functions on S^m: surface areas, harmonic-space dimensions and
Gegenbauer polynomials.

Integer results are exact Python integers. Gegenbauer values come from the
three-term forward recurrence, which is stable for lambda > 0 on [-1, 1].
"""

import logging
import math
from typing import Iterator, Union

import numpy as np
from scipy.special import gammaln

from .errors import DimensionOverflowError, DomainError

log = logging.getLogger("sphere-multipliers.specialfns")

ArrayLike = Union[float, np.ndarray]

# Exact dimension formulas are supported up to this index sum.
MAX_INDEX_SUM = 10**6

# Endpoint slack accepted before clamping x into [-1, 1].
ENDPOINT_SLACK = 1e-12

_degree_limit = 1 << 15


def set_degree_limit(limit: int) -> None:
    """Override the largest Gegenbauer degree accepted by the recurrences."""
    global _degree_limit
    if limit < 1:
        raise DomainError(f"degree limit must be >= 1, got {limit}")
    _degree_limit = int(limit)


def degree_limit() -> int:
    return _degree_limit


def surface_area(m: int) -> float:
    """omega_m = 2 pi^{(m+1)/2} / Gamma((m+1)/2), the area of the unit sphere S^m."""
    if m < 1:
        raise DomainError(f"sphere dimension must be >= 1, got {m}")
    half = (m + 1) / 2.0
    return 2.0 * math.exp(half * math.log(math.pi) - float(gammaln(half)))


def gegenbauer_index(m: int) -> float:
    """The Gegenbauer parameter (m - 1)/2 attached to S^m."""
    if m < 2:
        raise DomainError(f"zonal analysis needs m >= 2, got {m}")
    return (m - 1) / 2.0


def _check_dim_args(k: int, m: int) -> None:
    if k < 0:
        raise DomainError(f"degree must be >= 0, got {k}")
    if m < 2:
        raise DomainError(f"sphere dimension must be >= 2, got {m}")
    if k + m > MAX_INDEX_SUM:
        raise DimensionOverflowError(
            f"k + m = {k + m} exceeds the supported range {MAX_INDEX_SUM}"
        )


def harmonic_dim(k: int, m: int) -> int:
    """
    Dimension d_k^m of the degree-k spherical harmonics on S^m.

    d_k^m = (2k+m-1)/(k+m-1) * binom(k+m-1, k), written as
    (2k+m-1) * binom(k+m-2, k) / (m-1) so every step stays integral.
    """
    _check_dim_args(k, m)
    if k == 0:
        return 1
    numerator = (2 * k + m - 1) * math.comb(k + m - 2, k)
    dim, remainder = divmod(numerator, m - 1)
    # d_k^m is an integer, so the division is exact
    assert remainder == 0
    return dim


def cumulative_dim(n: int, m: int) -> int:
    """1 + d_1^m + ... + d_n^m, the number of harmonics of degree <= n."""
    _check_dim_args(n, m)
    return sum(harmonic_dim(k, m) for k in range(n + 1))


def _check_gegenbauer_args(k: int, lam: float) -> None:
    if k < 0:
        raise DomainError(f"degree must be >= 0, got {k}")
    if k > _degree_limit:
        raise DomainError(f"degree {k} exceeds the configured limit {_degree_limit}")
    if not lam > 0:
        raise DomainError(f"Gegenbauer parameter must be > 0, got {lam}")


def _clamp(x: ArrayLike) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if np.any(np.isnan(values)):
        raise DomainError("NaN argument")
    if np.any(np.abs(values) > 1.0 + ENDPOINT_SLACK):
        worst = float(np.max(np.abs(values)))
        raise DomainError(f"argument outside [-1, 1]: |x| = {worst!r}")
    return np.clip(values, -1.0, 1.0)


def gegenbauer_eval(k: int, lam: float, x: ArrayLike) -> ArrayLike:
    """
    C_k^lambda(x) by the forward recurrence

        C_0 = 1, C_1 = 2 lambda x,
        k C_k = 2 (k + lambda - 1) x C_{k-1} - (k + 2 lambda - 2) C_{k-2}.

    Scalars in, scalar out; arrays in, arrays out.
    """
    _check_gegenbauer_args(k, lam)
    xs = _clamp(x)
    prev = np.ones_like(xs)
    if k == 0:
        return _unwrap(prev, x)
    cur = 2.0 * lam * xs
    for j in range(2, k + 1):
        prev, cur = cur, (2.0 * (j + lam - 1.0) * xs * cur - (j + 2.0 * lam - 2.0) * prev) / j
    return _unwrap(cur, x)


def gegenbauer_at_one(k: int, lam: float) -> float:
    """C_k^lambda(1) = Gamma(k + 2 lambda) / (Gamma(2 lambda) k!), via log-Gamma."""
    _check_gegenbauer_args(k, lam)
    if k == 0:
        return 1.0
    return math.exp(
        float(gammaln(k + 2.0 * lam)) - float(gammaln(2.0 * lam)) - float(gammaln(k + 1.0))
    )


def iter_normalized_gegenbauer(k_max: int, lam: float, x: ArrayLike) -> Iterator[np.ndarray]:
    """
    Yield P_k(x) = C_k^lambda(x) / C_k^lambda(1) for k = 0..k_max.

    Dividing the recurrence through by C_k(1) gives

        P_k = (2 (k + lambda - 1) x P_{k-1} - (k - 1) P_{k-2}) / (k + 2 lambda - 1),

    which keeps every value in [-1, 1] and never overflows.
    """
    _check_gegenbauer_args(k_max, lam)
    xs = _clamp(x)
    prev = np.ones_like(xs)
    yield prev
    if k_max == 0:
        return
    cur = xs.copy()
    yield cur
    for k in range(2, k_max + 1):
        prev, cur = cur, (2.0 * (k + lam - 1.0) * xs * cur - (k - 1.0) * prev) / (k + 2.0 * lam - 1.0)
        yield cur


def normalized_gegenbauer_table(k_max: int, lam: float, x: ArrayLike) -> np.ndarray:
    """Rows P_0..P_{k_max} evaluated at x, shape (k_max + 1,) + shape(x)."""
    xs = np.asarray(x, dtype=float)
    table = np.empty((k_max + 1,) + xs.shape)
    for k, row in enumerate(iter_normalized_gegenbauer(k_max, lam, xs)):
        table[k] = row
    return table


def zonal_profiles(k_max: int, m: int, u: ArrayLike) -> np.ndarray:
    """C_k^{(m-1)/2}(u) / C_k^{(m-1)/2}(1) for k = 0..k_max on S^m."""
    return normalized_gegenbauer_table(k_max, gegenbauer_index(m), u)


def _unwrap(values: np.ndarray, original: ArrayLike) -> ArrayLike:
    if np.ndim(original) == 0:
        return float(values)
    return values
