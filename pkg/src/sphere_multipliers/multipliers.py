"""
Multiplier families t -> {eta_k^t} on S^m.

Built-in families:
    shifting   eta_k^t = C_k(cos t) / C_k(1)
    combo      -2 binom(2l, l)^{-1} sum_{j=1}^{l} (-1)^j binom(2l, l-j) C_k(cos jt) / C_k(1)
    cap        averages over the spherical cap of radius t
    steklov    Steklov-type means of the cap averages
with C_k = C_k^{(m-1)/2}. Reference families (identity, zero) and user tables
go through the same API.

Sequences are memoized per (family, K, t) in a shared insert-once table.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .cache import shared_table
from .errors import DomainError
from .quadrature import DEFAULT_PROFILE_NODES, gauss_legendre
from .specialfns import (
    gegenbauer_index,
    iter_normalized_gegenbauer,
    normalized_gegenbauer_table,
    surface_area,
)

log = logging.getLogger("sphere-multipliers.multipliers")

MAX_COMBO_ORDER = 10

# (K, t, n_quad) -> eta_0..eta_K
SequenceFn = Callable[[int, float, Optional[int]], np.ndarray]


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 < t < math.pi:
        raise DomainError(f"t must lie in (0, pi), got {t!r}")
    return t


def _check_m(m: int) -> int:
    if m < 2:
        raise DomainError(f"multiplier families need m >= 2, got {m}")
    return int(m)


# ─────────────────────────────────────────────────────────────
# Families
# ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class MultiplierFamily:
    """
    A parameterized family of multiplier sequences.

    `sequence(K, t)` returns eta_0^t..eta_K^t; `eta(k, t)` a single value.
    """
    name: str
    m: int
    params: tuple = ()
    declared_s: Optional[float] = None
    declared_uniform_bound: float = 1.0
    memoize: bool = True
    _sequence: SequenceFn = field(default=None, repr=False, compare=False)

    @property
    def key(self) -> tuple:
        return (self.name, self.m, self.params)

    def sequence(self, K: int, t: float, n_quad: Optional[int] = None) -> np.ndarray:
        if K < 0:
            raise DomainError(f"band limit must be >= 0, got {K}")
        if not self.memoize:
            return self._sequence(K, t, n_quad)
        values = shared_table("multipliers.sequence").get_or_create(
            (self.key, K, float(t), n_quad),
            lambda: _frozen(self._sequence(K, t, n_quad)),
        )
        return values

    def eta(self, k: int, t: float, n_quad: Optional[int] = None) -> float:
        return float(self.sequence(k, t, n_quad)[k])

    def describe(self) -> dict:
        return {
            "name": self.name,
            "m": self.m,
            "params": dict(self.params),
            "declared_s": self.declared_s,
            "declared_uniform_bound": self.declared_uniform_bound,
        }


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


def _shifting_sequence(K: int, t: float, m: int) -> np.ndarray:
    return normalized_gegenbauer_table(K, gegenbauer_index(m), math.cos(_check_t(t)))


def combo_weights(l: int) -> np.ndarray:
    """c_j = -2 (-1)^j binom(2l, l-j) / binom(2l, l) for j = 1..l; they sum to 1."""
    if not 1 <= l <= MAX_COMBO_ORDER:
        raise DomainError(f"combination order must be in [1, {MAX_COMBO_ORDER}], got {l}")
    center = math.comb(2 * l, l)
    return np.array([-2.0 * (-1) ** j * math.comb(2 * l, l - j) / center for j in range(1, l + 1)])


def _combo_sequence(K: int, t: float, l: int, m: int) -> np.ndarray:
    t = _check_t(t)
    weights = combo_weights(l)
    cosines = np.cos(t * np.arange(1, l + 1))
    table = normalized_gegenbauer_table(K, gegenbauer_index(m), cosines)
    return table @ weights


def _cap_numerators(K: int, t: float, m: int, n_quad: int) -> np.ndarray:
    """int_0^t C_k(cos h)/C_k(1) sin^{m-1} h dh for k = 0..K."""
    nodes, weights = gauss_legendre(n_quad).transplant(0.0, t)
    table = normalized_gegenbauer_table(K, gegenbauer_index(m), np.cos(nodes))
    return table @ (weights * np.sin(nodes) ** (m - 1))


def _cap_sequence(K: int, t: float, m: int, n_quad: Optional[int]) -> np.ndarray:
    t = _check_t(t)
    n = n_quad or max(DEFAULT_PROFILE_NODES, K)
    numerators = _cap_numerators(K, t, m, n)
    rho = numerators / numerators[0]
    rho[0] = 1.0
    return rho


def _steklov_sums(K: int, t: float, m: int, n_quad: int) -> np.ndarray:
    """
    int_0^t [int_0^s C_k(cos h)/C_k(1) sin^{m-1} h dh] / sin^{m-1} s ds for k = 0..K.

    Nested Gauss-Legendre: the outer nodes never touch s = 0, where the
    integrand vanishes like s/m.
    """
    rule = gauss_legendre(n_quad)
    outer, outer_w = rule.transplant(0.0, t)
    # inner nodes h_ij in [0, s_i]
    half = 0.5 * outer[:, None]
    inner = half * (rule.nodes[None, :] + 1.0)
    inner_w = half * rule.weights[None, :] * np.sin(inner) ** (m - 1)
    outer_w = outer_w / np.sin(outer) ** (m - 1)

    sums = np.empty(K + 1)
    for k, values in enumerate(iter_normalized_gegenbauer(K, gegenbauer_index(m), np.cos(inner))):
        sums[k] = math.fsum(outer_w * np.sum(values * inner_w, axis=1))
    return sums


def _steklov_sequence(K: int, t: float, m: int, n_quad: Optional[int]) -> np.ndarray:
    t = _check_t(t)
    n = n_quad or max(DEFAULT_PROFILE_NODES, K)
    sums = _steklov_sums(K, t, m, n)
    phi = sums / sums[0]
    phi[0] = 1.0
    return phi


def shifting_family(m: int) -> MultiplierFamily:
    m = _check_m(m)
    return MultiplierFamily(
        name="shifting", m=m, declared_s=2.0, declared_uniform_bound=1.0,
        _sequence=lambda K, t, n: _shifting_sequence(K, t, m),
    )


def combo_family(m: int, l: int) -> MultiplierFamily:
    m = _check_m(m)
    combo_weights(l)
    return MultiplierFamily(
        name="combo", m=m, params=(("l", int(l)),),
        declared_s=2.0 * l,
        declared_uniform_bound=2.0 ** (2 * l) / math.comb(2 * l, l) - 1.0,
        _sequence=lambda K, t, n: _combo_sequence(K, t, l, m),
    )


def cap_family(m: int) -> MultiplierFamily:
    m = _check_m(m)
    return MultiplierFamily(
        name="cap", m=m, declared_s=2.0, declared_uniform_bound=1.0,
        _sequence=lambda K, t, n: _cap_sequence(K, t, m, n),
    )


def steklov_family(m: int) -> MultiplierFamily:
    m = _check_m(m)
    return MultiplierFamily(
        name="steklov", m=m, declared_s=2.0, declared_uniform_bound=1.0,
        _sequence=lambda K, t, n: _steklov_sequence(K, t, m, n),
    )


def identity_family(m: int) -> MultiplierFamily:
    """eta == 1: M_t is the identity for every t."""
    return MultiplierFamily(
        name="identity", m=_check_m(m), declared_uniform_bound=1.0,
        _sequence=lambda K, t, n: np.ones(K + 1),
    )


def zero_family(m: int) -> MultiplierFamily:
    """eta == 0, so M_t f - f = -f."""
    return MultiplierFamily(
        name="zero", m=_check_m(m), declared_uniform_bound=1.0,
        _sequence=lambda K, t, n: np.zeros(K + 1),
    )


CustomTable = Union[Mapping[tuple[int, float], float], Callable[[np.ndarray, float], np.ndarray]]


def custom_family(
    table: CustomTable,
    declared_s: Optional[float] = None,
    declared_uniform_bound: float = 1.0,
    m: int = 2,
    name: str = "custom",
) -> MultiplierFamily:
    """
    Wrap a user multiplier table.

    `table` is either a mapping (k, t) -> eta defined on a lattice, or a
    callable eta(k_array, t) defined everywhere. Mapping lookups off the
    lattice raise DomainError.
    """
    m = _check_m(m)
    if callable(table):
        fn = table

        def sequence(K: int, t: float, n: Optional[int]) -> np.ndarray:
            values = np.broadcast_to(np.asarray(fn(np.arange(K + 1), float(t)), dtype=float), (K + 1,))
            return np.array(values)

    else:
        lookup = {(int(k), float(t)): float(v) for (k, t), v in table.items()}

        def sequence(K: int, t: float, n: Optional[int]) -> np.ndarray:
            out = np.empty(K + 1)
            for k in range(K + 1):
                try:
                    out[k] = lookup[(k, float(t))]
                except KeyError:
                    raise DomainError(f"custom family '{name}' is not defined at (k={k}, t={t!r})") from None
            return out

    return MultiplierFamily(
        name=name, m=m, declared_s=declared_s, declared_uniform_bound=declared_uniform_bound,
        memoize=False, _sequence=sequence,
    )


FAMILY_NAMES = ("shifting", "combo", "cap", "steklov", "identity", "zero", "custom")


def make_family(name: str, m: int, l: int = 2, table: Optional[CustomTable] = None,
                s: Optional[float] = None) -> MultiplierFamily:
    """Build a family by registry name."""
    if name == "shifting":
        return shifting_family(m)
    if name == "combo":
        return combo_family(m, l)
    if name == "cap":
        return cap_family(m)
    if name == "steklov":
        return steklov_family(m)
    if name == "identity":
        return identity_family(m)
    if name == "zero":
        return zero_family(m)
    if name == "custom":
        if table is None:
            raise DomainError("the custom family needs a table")
        return custom_family(table, declared_s=s, m=m)
    raise DomainError(f"unknown family '{name}'; valid names: {', '.join(FAMILY_NAMES)}")


# ─────────────────────────────────────────────────────────────
# Single-value operations
# ─────────────────────────────────────────────────────────────

def shifting_multiplier(k: int, t: float, m: int) -> float:
    return float(_shifting_sequence(k, t, _check_m(m))[k])


def combo_multiplier(k: int, t: float, l: int, m: int) -> float:
    return float(_combo_sequence(k, t, l, _check_m(m))[k])


def cap_volume(t: float, m: int, n_quad: int = DEFAULT_PROFILE_NODES) -> float:
    """C_m(t) = omega_{m-1} int_0^t sin^{m-1} h dh, the area of a cap of radius t."""
    if not 0.0 < t <= math.pi:
        raise DomainError(f"t must lie in (0, pi], got {t!r}")
    m = _check_m(m)
    nodes, weights = gauss_legendre(n_quad).transplant(0.0, t)
    return surface_area(m - 1) * math.fsum(weights * np.sin(nodes) ** (m - 1))


def cap_volume_bracket(t: float, m: int) -> tuple[float, float]:
    """(omega_{m-1}/m (2/pi)^{m-1} t^m, omega_{m-1} t^m); the lower bound holds on (0, pi/2]."""
    m = _check_m(m)
    omega = surface_area(m - 1)
    return omega / m * (2.0 / math.pi) ** (m - 1) * t ** m, omega * t ** m


def cap_multiplier(k: int, t: float, m: int, n_quad: Optional[int] = None) -> float:
    n = n_quad or max(DEFAULT_PROFILE_NODES, k)
    return float(_cap_sequence(k, t, _check_m(m), n)[k])


def steklov_normalizer(t: float, m: int, n_quad: int = DEFAULT_PROFILE_NODES) -> float:
    """D_m(t) = int_0^t C_m(s) / (omega_{m-1} sin^{m-1} s) ds."""
    t = _check_t(t)
    return float(_steklov_sums(0, t, _check_m(m), n_quad)[0])


def steklov_multiplier(k: int, t: float, m: int, n_quad: Optional[int] = None) -> float:
    n = n_quad or max(DEFAULT_PROFILE_NODES, k)
    return float(_steklov_sequence(k, t, _check_m(m), n)[k])


# ─────────────────────────────────────────────────────────────
# Diagnostics
# ─────────────────────────────────────────────────────────────

def log_spaced(t_min: float, t_max: float, count: int) -> np.ndarray:
    """`count` log-spaced points in [t_min, t_max]."""
    if count < 1:
        raise DomainError("t grid is empty")
    if count == 1:
        return np.array([float(t_min)])
    return np.geomspace(t_min, t_max, count)


@dataclass
class EquivalenceReport:
    """Sampled constants c_low <= (1 - eta_k^t) / min(1, kt)^s <= c_high."""
    s: float
    c_low: float
    c_high: float
    k_range: tuple[int, int]
    t_range: tuple[float, float]
    argmin: tuple[int, float]
    argmax: tuple[int, float]
    sign_violations: list[tuple[int, float]]
    degenerate: bool

    @property
    def spread(self) -> float:
        if self.c_low <= 0:
            return math.inf
        return self.c_high / self.c_low

    @property
    def passed(self) -> bool:
        return (
            not self.degenerate
            and not self.sign_violations
            and self.c_low > 0
            and math.isfinite(self.c_high)
        )


def equivalence_constants(
    family: MultiplierFamily,
    s: float,
    k_range: Sequence[int],
    t_range: Sequence[float],
) -> EquivalenceReport:
    """Min and max of (1 - eta_k^t) / min(1, kt)^s over the sampled lattice."""
    if not s > 0:
        raise DomainError(f"equivalence exponent must be > 0, got {s}")
    ks = np.asarray(sorted(set(int(k) for k in k_range)))
    ts = np.asarray(sorted(set(float(t) for t in t_range)))
    if ks.size == 0 or ts.size == 0:
        raise DomainError("equivalence lattice is empty")
    if ks[0] < 1:
        raise DomainError("equivalence constants need k >= 1")
    if ts[0] <= 0 or ts[-1] > math.pi / 2 + 1e-15:
        raise DomainError("equivalence constants are sampled for t in (0, pi/2]")

    K = int(ks[-1])
    ratios = np.empty((ks.size, ts.size))
    deviations = np.empty_like(ratios)
    for col, t in enumerate(ts):
        deviation = 1.0 - family.sequence(K, t)[ks]
        deviations[:, col] = deviation
        ratios[:, col] = deviation / np.minimum(1.0, ks * t) ** s

    violations = [
        (int(ks[i]), float(ts[j])) for i, j in zip(*np.nonzero(deviations < 0))
    ]
    low = np.unravel_index(np.argmin(ratios), ratios.shape)
    high = np.unravel_index(np.argmax(ratios), ratios.shape)
    c_low, c_high = float(ratios[low]), float(ratios[high])
    degenerate = c_low == 0.0 and c_high == 0.0
    if violations:
        log.info(f"{family.name}: 1 - eta < 0 at {len(violations)} lattice points")

    return EquivalenceReport(
        s=float(s),
        c_low=c_low,
        c_high=c_high,
        k_range=(int(ks[0]), int(ks[-1])),
        t_range=(float(ts[0]), float(ts[-1])),
        argmin=(int(ks[low[0]]), float(ts[low[1]])),
        argmax=(int(ks[high[0]]), float(ts[high[1]])),
        sign_violations=violations,
        degenerate=degenerate,
    )


@dataclass
class HalfBoundedReport:
    """
    M_lower = min b_{k,n} over n <= N, n <= k <= K, plus b_{k,n} at
    n = k, 2k, 4k, ... for a few fixed k.
    """
    M_lower: float
    argmin: tuple[int, int]
    K: int
    N: int
    decay_table: dict[int, list[tuple[int, float]]]
    decay_ratio: float

    @property
    def decays(self) -> bool:
        """Every tabled row falls to decay_ratio times its first entry."""
        return all(
            row[-1][1] <= self.decay_ratio * row[0][1] for row in self.decay_table.values() if row
        )

    @property
    def passed(self) -> bool:
        return self.M_lower > 0 and self.decays


DoubleSequence = Callable[[np.ndarray, int], np.ndarray]


def half_bounded_sequence(
    b: DoubleSequence,
    K: int,
    N: int,
    decay_ks: Sequence[int] = (1, 5, 10),
    n_limit: int = 10**4,
    decay_ratio: float = 1e-2,
) -> HalfBoundedReport:
    """
    Half-boundedness diagnostic for a double sequence b(k, n), vectorized in k.

    The lower bound is taken over the triangle n <= k; decay is read along
    the dyadic rows n = k 2^i <= n_limit.
    """
    if not 1 <= N <= K <= 10**4:
        raise DomainError(f"need 1 <= N <= K <= 10^4, got N={N}, K={K}")

    best, where = math.inf, (0, 0)
    for n in range(1, N + 1):
        ks = np.arange(n, K + 1)
        values = np.abs(np.asarray(b(ks, n), dtype=float))
        i = int(np.argmin(values))
        if values[i] < best:
            best, where = float(values[i]), (int(ks[i]), n)

    table: dict[int, list[tuple[int, float]]] = {}
    for k in decay_ks:
        row = []
        n = k
        while n <= n_limit:
            row.append((n, float(np.abs(np.asarray(b(np.array([k]), n), dtype=float))[0])))
            n *= 2
        table[int(k)] = row

    return HalfBoundedReport(
        M_lower=best, argmin=where, K=K, N=N, decay_table=table, decay_ratio=decay_ratio
    )


def half_bounded_diagnostic(
    family: MultiplierFamily,
    K: int,
    N: int,
    decay_ks: Sequence[int] = (1, 5, 10),
    n_limit: int = 10**4,
    decay_ratio: float = 1e-2,
) -> HalfBoundedReport:
    """b_{k,n} = |eta_k^{1/n} - 1|."""

    def b(ks: np.ndarray, n: int) -> np.ndarray:
        return np.abs(family.sequence(int(ks.max()), 1.0 / n)[ks] - 1.0)

    return half_bounded_sequence(b, K, N, decay_ks, n_limit, decay_ratio)


def uniform_bound(family: MultiplierFamily, k_range: Sequence[int], t_range: Sequence[float]) -> float:
    """sup |eta_k^t| over the lattice (the L^2 operator norm restricted to it)."""
    ks = np.asarray(sorted(set(int(k) for k in k_range)))
    if ks.size == 0 or len(t_range) == 0:
        raise DomainError("uniform bound lattice is empty")
    K = int(ks[-1])
    return max(float(np.max(np.abs(family.sequence(K, t)[ks]))) for t in t_range)
