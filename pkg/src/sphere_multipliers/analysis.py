"""
Verifiers for multiplier operators and kernels.

Every integral uses the normalized measure (1/omega_m) dsigma, including the
integrated Hölder quantity g(t); this rescales the constants B and C of the
Hölder and decay bounds but not the exponents. Sums over degrees use
math.fsum so results do not depend on reduction order.

Verifiers return CheckReport records; a failed check is a report with
passed=False, never an exception.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .coefficients import CoefficientTable
from .errors import DomainError, FitError, ShapeError
from .harmonics import forward_coeffs, harmonic_basis, lp_norm  # noqa: F401  (re-exported)
from .kernels import (
    CoefficientKernel,
    EigenvalueSequence,
    Kernel,
    ZonalKernel,
    eigenvalue_sequence,
    is_degreewise_dominated,
    leading_eigenvalues,
    sqrt_kernel,
    zonal_profile,
)
from .multipliers import (
    MultiplierFamily,
    cap_volume,
    cap_volume_bracket,
    equivalence_constants,
    half_bounded_diagnostic,
    half_bounded_sequence,
    log_spaced,
    uniform_bound,
)
from .quadrature import MAX_GRID_DEGREE, SphereGrid, sphere_grid, zonal_integral
from .reports import CheckReport
from .specialfns import cumulative_dim, harmonic_dim, surface_area

log = logging.getLogger("sphere-multipliers.analysis")

# Denominator floor for relative residuals.
RESIDUAL_FLOOR = 1e-300

# Fit points with g(t) at or below this are treated as zero.
FIT_FLOOR = 1e-14


def _relative(lhs: float, rhs: float) -> float:
    if lhs == 0.0 and rhs == 0.0:
        return 0.0
    return abs(lhs - rhs) / (abs(lhs) + RESIDUAL_FLOOR)


def _require_s2(f_coeffs: CoefficientTable, family: MultiplierFamily) -> None:
    if f_coeffs.m != 2 or family.m != 2:
        raise ShapeError("spatial L^p checks run on S^2 (m = 2) only")


def _deviations(family: MultiplierFamily, K: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    eta = np.asarray(family.sequence(K, t), dtype=float)
    return eta, eta - 1.0


def _dims(K: int, m: int) -> np.ndarray:
    return np.array([harmonic_dim(k, m) for k in range(K + 1)], dtype=float)


def _fine_grid(K: int, factor: int) -> SphereGrid:
    return sphere_grid(min(max(factor * K, K), MAX_GRID_DEGREE))


def _deviation_samples(f_coeffs: CoefficientTable, deviation: np.ndarray, grid: SphereGrid) -> np.ndarray:
    """Mf - f sampled on `grid`."""
    basis = harmonic_basis(grid, f_coeffs.K_max)
    return basis.synthesize(f_coeffs.scaled(deviation))


def _family_inputs(family: MultiplierFamily, t: float, **extra) -> dict:
    return {"family": family.describe(), "t": float(t), **extra}


# ─────────────────────────────────────────────────────────────
# Identities and inequalities for M_t f - f
# ─────────────────────────────────────────────────────────────

def parseval_equality_check(
    f_coeffs: CoefficientTable,
    family: MultiplierFamily,
    t: float,
    grid: Optional[SphereGrid] = None,
    tol: float = 1e-9,
) -> CheckReport:
    """sum_k |eta_k - 1|^2 sum_j |f-hat(k,j)|^2 = ||Mf - f||_2^2."""
    _require_s2(f_coeffs, family)
    _, deviation = _deviations(family, f_coeffs.K_max, t)
    lhs = math.fsum(deviation ** 2 * f_coeffs.degree_energies())
    grid = grid or sphere_grid(f_coeffs.K_max)
    rhs = lp_norm(_deviation_samples(f_coeffs, deviation, grid), grid, 2) ** 2
    residual = _relative(lhs, rhs)
    return CheckReport(
        check="parseval",
        inputs=_family_inputs(family, t, K_max=f_coeffs.K_max),
        lhs=lhs, rhs=rhs, value=residual, passed=residual <= tol,
        tolerances={"residual": tol},
    )


def _surface_scale(convention: str) -> float:
    if convention == "normalized":
        return 1.0
    if convention == "surface":
        return math.sqrt(surface_area(2))
    raise DomainError(f"unknown convention '{convention}'")


def hausdorff_young_check(
    f_coeffs: CoefficientTable,
    family: MultiplierFamily,
    t: float,
    p: float,
    grid: Optional[SphereGrid] = None,
    lp_grid_factor: int = 2,
    tol: float = 1e-6,
    convention: str = "normalized",
) -> CheckReport:
    """
    {sum_k d_k^{(2-q)/2q} |eta_k - 1|^q E_k^{q/2}}^{1/q} <= ||Mf - f||_p,
    q the conjugate exponent. The p-norm uses a finer grid since |g|^p is not
    a polynomial.
    """
    if not 1.0 < p <= 2.0:
        raise DomainError(f"p must lie in (1, 2], got {p}")
    _require_s2(f_coeffs, family)
    K = f_coeffs.K_max
    q = p / (p - 1.0)
    _, deviation = _deviations(family, K, t)
    energies = f_coeffs.degree_energies()
    terms = _dims(K, 2) ** ((2.0 - q) / (2.0 * q)) * np.abs(deviation) ** q * energies ** (q / 2.0)
    scale = _surface_scale(convention)
    lhs = scale * math.fsum(terms) ** (1.0 / q)

    grid = grid or _fine_grid(K, lp_grid_factor)
    rhs = scale * lp_norm(_deviation_samples(f_coeffs, deviation, grid), grid, p)
    margin = rhs - lhs
    return CheckReport(
        check="hy",
        inputs=_family_inputs(family, t, K_max=K, p=p, q=q, convention=convention),
        lhs=lhs, rhs=rhs, value=margin, passed=margin >= -tol,
        tolerances={"margin": tol},
    )


def l1_sup_check(
    f_coeffs: CoefficientTable,
    family: MultiplierFamily,
    t: float,
    grid: Optional[SphereGrid] = None,
    lp_grid_factor: int = 2,
    tol: float = 1e-6,
    convention: str = "normalized",
) -> CheckReport:
    """sup_k d_k^{-1/2} |eta_k - 1| E_k^{1/2} <= ||Mf - f||_1."""
    _require_s2(f_coeffs, family)
    K = f_coeffs.K_max
    _, deviation = _deviations(family, K, t)
    terms = _dims(K, 2) ** -0.5 * np.abs(deviation) * np.sqrt(f_coeffs.degree_energies())
    scale = _surface_scale(convention)
    lhs = scale * float(np.max(terms))
    grid = grid or _fine_grid(K, lp_grid_factor)
    rhs = scale * lp_norm(_deviation_samples(f_coeffs, deviation, grid), grid, 1)
    margin = rhs - lhs
    return CheckReport(
        check="l1sup",
        inputs=_family_inputs(family, t, K_max=K, p=1, convention=convention),
        lhs=lhs, rhs=rhs, value=margin, passed=margin >= -tol,
        tolerances={"margin": tol},
    )


# ─────────────────────────────────────────────────────────────
# Kernel identities
# ─────────────────────────────────────────────────────────────

def _kernel_inputs(kern: Kernel) -> dict:
    return {"m": kern.m, "K_max": kern.K_max, "zonal": kern.zonal}


def kernel_identity_check(
    kern: Kernel,
    family: MultiplierFamily,
    t: float,
    grid: Optional[SphereGrid] = None,
    path: str = "auto",
    n_quad: Optional[int] = None,
    tol: Optional[float] = None,
) -> CheckReport:
    """
    sum_k |eta_k - 1|^2 sum_j a_{k,j}^2 = (1/omega_m) int ||M(K^y) - K^y||_2^2 dsigma(y).

    zonal path: the section norm is constant in y and equals the zonal
    integral of the squared deviation profile.
    grid path (S^2): with H = sqrt(w/omega) B and D = diag((eta - 1) a), the
    right side is ||H D H^T||_F^2 = D^T (G o G) D, G = H^T H the Gram matrix.
    """
    if family.m != kern.m:
        raise ShapeError(f"family lives on S^{family.m}, kernel on S^{kern.m}")
    if path == "auto":
        path = "zonal" if isinstance(kern, ZonalKernel) else "grid"
    _, deviation = _deviations(family, kern.K_max, t)
    lhs = math.fsum(deviation ** 2 * kern.square_sums())

    if path == "zonal":
        if not isinstance(kern, ZonalKernel):
            raise ShapeError("the zonal path needs a zonal kernel")
        weights = deviation * kern.a * kern.dims
        n = n_quad or max(64, kern.K_max + 1)
        rhs = zonal_integral(lambda u: zonal_profile(weights, kern.m, u) ** 2, kern.m, n)
        tol = 1e-12 if tol is None else tol
    elif path == "grid":
        if kern.m != 2:
            raise ShapeError("the grid path runs on S^2 (m = 2) only")
        grid = grid or sphere_grid(kern.K_max)
        gram = harmonic_basis(grid, kern.K_max).gram()
        d = kern.table().scaled(deviation).flat()
        rhs = float(d @ (gram * gram) @ d)
        tol = 1e-9 if tol is None else tol
    else:
        raise DomainError(f"unknown path '{path}'")

    residual = _relative(lhs, rhs)
    return CheckReport(
        check="kernel-identity",
        inputs=_family_inputs(family, t, kernel=_kernel_inputs(kern), path=path),
        lhs=lhs, rhs=rhs, value=residual, passed=residual <= tol,
        tolerances={"residual": tol},
    )


def holder_integral(
    kern: Kernel,
    family: MultiplierFamily,
    t: float,
    grid: Optional[SphereGrid] = None,
) -> float:
    """g(t) = (1/omega_m) int |M_t(K^y)(y) - K^y(y)| dsigma(y)."""
    _, deviation = _deviations(family, kern.K_max, t)
    if isinstance(kern, ZonalKernel):
        # the diagonal deviation is constant in y
        return abs(math.fsum(deviation * kern.a * kern.dims))
    if kern.m != 2:
        raise ShapeError("non-zonal kernels are supported on S^2 only")
    grid = grid or sphere_grid(kern.K_max)
    basis = harmonic_basis(grid, kern.K_max)
    diagonal = (basis.matrix() ** 2) @ kern.table().scaled(deviation).flat()
    return grid.mean(np.abs(diagonal))


@dataclass
class FitReport:
    """Least-squares line through (log t, log g(t))."""
    slope: float
    intercept: float
    residual: float
    window: tuple[float, float]
    points: list[tuple[float, float]] = field(default_factory=list)
    excluded: list[dict] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "window": list(self.window),
            "usable": len(self.points),
            "excluded": self.excluded,
        }


def holder_exponent_fit(
    kern: Kernel,
    family: MultiplierFamily,
    t_grid: Sequence[float],
    band_limit_factor: Optional[float] = None,
    grid: Optional[SphereGrid] = None,
) -> FitReport:
    """
    Fit log g(t) = log B + beta log t.

    Points with g <= 1e-14 are excluded, as are t < band_limit_factor / K_max
    when a factor is given (there band-limiting flattens g towards t^2).
    """
    points, excluded = [], []
    cutoff = band_limit_factor / max(kern.K_max, 1) if band_limit_factor else 0.0
    for t in sorted(float(t) for t in t_grid):
        g = holder_integral(kern, family, t, grid)
        if g <= FIT_FLOOR:
            excluded.append({"t": t, "g": g, "reason": "zero"})
        elif t < cutoff:
            excluded.append({"t": t, "g": g, "reason": "band-limit"})
        else:
            points.append((t, g))

    if len(points) < 3:
        raise FitError(
            f"Hölder fit needs >= 3 usable points, got {len(points)}",
            usable=len(points), excluded=excluded,
        )
    log_t = np.log([t for t, _ in points])
    log_g = np.log([g for _, g in points])
    slope, intercept = np.polyfit(log_t, log_g, 1)
    residual = math.sqrt(float(np.mean((slope * log_t + intercept - log_g) ** 2)))
    log.debug(f"Hölder fit: slope {slope:.4f} over {len(points)} points")
    return FitReport(
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        window=(points[0][0], points[-1][0]),
        points=points,
        excluded=excluded,
    )


def sqrt_deviation_identity_check(
    kern: ZonalKernel,
    family: MultiplierFamily,
    t: float,
    tol: float = 1e-12,
) -> CheckReport:
    """
    ||M_t(K_{1/2}^y) - K_{1/2}^y||_2^2 = M_t(h)(y) - h(y), h = M_t(K^y) - K^y.

    The left side comes from the square-root coefficients, the right from the
    kernel's own coefficients.
    """
    if not isinstance(kern, ZonalKernel):
        raise ShapeError("the square-root identity check takes a zonal kernel")
    eta, deviation = _deviations(family, kern.K_max, t)
    dims = kern.dims
    root = sqrt_kernel(kern)
    lhs = math.fsum(deviation ** 2 * root.a ** 2 * dims)
    m_h = math.fsum(eta * deviation * kern.a * dims)
    h = math.fsum(deviation * kern.a * dims)
    rhs = math.fsum([m_h, -h])
    residual = _relative(lhs, rhs)

    sup = holder_sup_deviation(kern, family, t)
    bound = (family.declared_uniform_bound + 1.0) * sup
    # for zonal kernels the diagonal deviation is constant in y, so g(t) = |h|
    eta0_bound = (abs(float(eta[0])) + 1.0) * abs(h)
    return CheckReport(
        check="sqrt-identity",
        inputs=_family_inputs(family, t, kernel=_kernel_inputs(kern)),
        lhs=lhs, rhs=rhs, value=residual, passed=residual <= tol,
        tolerances={"residual": tol},
        details={
            "holder_integral": abs(h),
            "sup_deviation": sup,
            "bound": bound,
            "bound_holds": lhs <= bound * (1.0 + 1e-12),
            "eta0_bound": eta0_bound,
            "eta0_bound_holds": lhs <= eta0_bound * (1.0 + 1e-12),
        },
    )


def deviation_sum(kern: Kernel, family: MultiplierFamily, t: float) -> float:
    """S(t) = sum_k |eta_k^t - 1|^2 A_k, A_k = sum_j a_{k,j}."""
    _, deviation = _deviations(family, kern.K_max, t)
    return math.fsum(deviation ** 2 * kern.block_sums())


def _growth(sups: Sequence[float]) -> float:
    """max(later windows) / first window; 0 when everything vanishes."""
    first = sups[0]
    later = max(sups[1:]) if len(sups) > 1 else first
    if first == 0.0:
        return 0.0 if later == 0.0 else math.inf
    return later / first


def deviation_sum_check(
    kern: Kernel,
    family: MultiplierFamily,
    t_values: Sequence[float],
    beta: float,
    n_windows: int = 4,
    max_growth: float = 10.0,
) -> CheckReport:
    """S(t) / t^beta stays bounded as t decreases (windowed suprema, largest t first)."""
    ts = sorted((float(t) for t in t_values), reverse=True)
    if not ts:
        raise DomainError("t grid is empty")
    trace = []
    for t in ts:
        s = deviation_sum(kern, family, t)
        trace.append({"t": t, "S": s, "scaled": s / t ** beta})
    scaled = np.array([row["scaled"] for row in trace])
    sups = [float(np.max(chunk)) for chunk in np.array_split(scaled, min(n_windows, len(ts)))]
    growth = _growth(sups)
    return CheckReport(
        check="deviation-sum",
        inputs=_family_inputs(family, ts[0], kernel=_kernel_inputs(kern), beta=beta,
                              t_range=[ts[-1], ts[0]]),
        lhs=float(np.max(scaled)), rhs=None, value=growth, passed=growth <= max_growth,
        tolerances={"max_growth": max_growth}, trace=trace,
        details={"window_sups": sups},
    )


# ─────────────────────────────────────────────────────────────
# Eigenvalue decay
# ─────────────────────────────────────────────────────────────

@dataclass
class DecayReport:
    """Windowed suprema of lambda_n n^{1 + beta/m} over dyadic n windows."""
    beta: float
    m: int
    window: tuple[int, int]
    sup_value: float
    trend: list[dict]
    growth: float
    max_growth: float

    @property
    def exponent(self) -> float:
        return 1.0 + self.beta / self.m

    @property
    def sups(self) -> list[float]:
        return [row["sup"] for row in self.trend]

    @property
    def spread(self) -> float:
        sups = self.sups
        low = min(sups)
        if low == 0.0:
            return 1.0 if max(sups) == 0.0 else math.inf
        return max(sups) / low

    @property
    def monotone_increasing(self) -> bool:
        sups = self.sups
        return len(sups) > 1 and all(b > a for a, b in zip(sups, sups[1:]))

    @property
    def passed(self) -> bool:
        return self.growth <= self.max_growth

    def to_check_report(self) -> CheckReport:
        return CheckReport(
            check="decay",
            inputs={"beta": self.beta, "m": self.m, "window": list(self.window),
                    "exponent": self.exponent},
            lhs=self.sup_value, rhs=None, value=self.growth, passed=self.passed,
            tolerances={"max_growth": self.max_growth},
            trace=self.trend,
            details={"spread": self.spread, "monotone_increasing": self.monotone_increasing},
        )


def decay_check(
    seq: Union[EigenvalueSequence, Sequence[float]],
    beta: float,
    m: int,
    window: Optional[tuple[int, int]] = None,
    max_growth: float = 2.0,
) -> DecayReport:
    """
    lambda_n = O(n^{-1-beta/m}): the supremum of lambda_n n^{1+beta/m} over
    each dyadic window [2^i, 2^{i+1}) must not grow by more than max_growth
    relative to the first window.
    """
    if not 0.0 < beta <= 2.0:
        raise DomainError(f"beta must lie in (0, 2], got {beta}")
    lambdas = np.asarray(seq.lambdas if isinstance(seq, EigenvalueSequence) else seq, dtype=float)
    n_lo, n_hi = window or (1, len(lambdas))
    n_hi = min(n_hi, len(lambdas))
    if n_lo < 1 or n_lo > n_hi:
        raise DomainError(f"empty decay window [{n_lo}, {n_hi}] for {len(lambdas)} eigenvalues")

    exponent = 1.0 + beta / m
    trend = []
    lo = n_lo
    while lo <= n_hi:
        hi = min(n_hi, 2 ** (int(math.log2(lo)) + 1) - 1)
        n = np.arange(lo, hi + 1)
        scaled = lambdas[n - 1] * n.astype(float) ** exponent
        trend.append({"n_lo": int(lo), "n_hi": int(hi), "sup": float(np.max(scaled))})
        lo = hi + 1

    sups = [row["sup"] for row in trend]
    return DecayReport(
        beta=float(beta), m=int(m), window=(int(n_lo), int(n_hi)),
        sup_value=max(sups), trend=trend, growth=_growth(sups), max_growth=max_growth,
    )


def tail_mass_check(
    kern: Kernel,
    beta: float,
    n_values: Optional[Sequence[int]] = None,
    max_growth: float = 10.0,
) -> CheckReport:
    """T(n) = sum_{k >= n} A_k with n^beta T(n) bounded over the sampled n."""
    sums = kern.block_sums()
    if n_values is None:
        n_values = [2 ** i for i in range(int(math.log2(max(kern.K_max, 1))) + 1)]
    trace = []
    for n in sorted(int(n) for n in n_values):
        if not 1 <= n <= kern.K_max:
            raise DomainError(f"tail index {n} outside [1, {kern.K_max}]")
        tail = math.fsum(sums[n:])
        trace.append({"n": n, "tail": tail, "scaled": n ** beta * tail})
    sups = [row["scaled"] for row in trace]
    growth = _growth(sups)
    return CheckReport(
        check="tail-mass",
        inputs={"kernel": _kernel_inputs(kern), "beta": beta},
        lhs=max(sups), rhs=None, value=growth, passed=growth <= max_growth,
        tolerances={"max_growth": max_growth}, trace=trace,
    )


def block_closing_check(kern: Kernel) -> CheckReport:
    """lambda at index 1 + d_1 + ... + d_n equals a_{n, d_n}, the smallest degree-n coefficient."""
    seq = eigenvalue_sequence(kern)
    trace, mismatches = [], 0
    for n, block in enumerate(kern.blocks):
        index = cumulative_dim(n, kern.m)
        value, expected = float(seq.lambdas[index - 1]), float(np.min(block))
        if value != expected:
            mismatches += 1
        trace.append({"n": n, "index": index, "lambda": value, "a_last": expected})
    dominated = is_degreewise_dominated(kern)
    return CheckReport(
        check="block-closing",
        inputs={"kernel": _kernel_inputs(kern)},
        lhs=None, rhs=None, value=float(mismatches), passed=mismatches == 0,
        tolerances={"mismatches": 0}, trace=trace,
        details={"dominated": dominated},
    )


# ─────────────────────────────────────────────────────────────
# Hölder conditions
# ─────────────────────────────────────────────────────────────

def holder_sup_deviation(kern: ZonalKernel, family: MultiplierFamily, t: float, n_u: int = 2049) -> float:
    """sup_x |M_t(K^y)(x) - K^y(x)|, read on n_u equispaced u = x . y including +-1."""
    if not isinstance(kern, ZonalKernel):
        raise ShapeError("the sup deviation is computed for zonal kernels")
    _, deviation = _deviations(family, kern.K_max, t)
    u = np.linspace(-1.0, 1.0, n_u)
    return float(np.max(np.abs(zonal_profile(deviation * kern.a * kern.dims, kern.m, u))))


def holder_conditions_check(
    kern: ZonalKernel,
    family: MultiplierFamily,
    t_values: Sequence[float],
    n_u: int = 2049,
    tol: float = 1e-12,
) -> CheckReport:
    """The classical condition dominates the integrated one: g(t) <= sup deviation."""
    if len(t_values) == 0:
        raise DomainError("t grid is empty")
    trace = []
    for t in sorted(float(t) for t in t_values):
        g = holder_integral(kern, family, t)
        sup = holder_sup_deviation(kern, family, t, n_u)
        trace.append({"t": t, "g": g, "sup": sup, "margin": sup - g})
    margin = min(row["margin"] for row in trace)
    scale = max(1.0, max(row["sup"] for row in trace))
    return CheckReport(
        check="holder-sup",
        inputs=_family_inputs(family, trace[0]["t"], kernel=_kernel_inputs(kern)),
        lhs=max(row["g"] for row in trace), rhs=max(row["sup"] for row in trace),
        value=margin, passed=margin >= -tol * scale,
        tolerances={"margin": tol}, trace=trace,
    )


# ─────────────────────────────────────────────────────────────
# Family-level certificates
# ─────────────────────────────────────────────────────────────

def equivalence_check(
    family: MultiplierFamily,
    s: float,
    k_range: Sequence[int],
    t_range: Sequence[float],
    ratio_limit: float = 1e4,
) -> CheckReport:
    """0 < c_low <= c_high with c_high / c_low <= ratio_limit on the lattice."""
    report = equivalence_constants(family, s, k_range, t_range)
    passed = report.passed and report.spread <= ratio_limit
    return CheckReport(
        check="equivalence",
        inputs={"family": family.describe(), "s": s, "k_range": list(report.k_range),
                "t_range": list(report.t_range)},
        lhs=report.c_low, rhs=report.c_high, value=report.spread, passed=passed,
        tolerances={"ratio_limit": ratio_limit},
        details={
            "argmin": list(report.argmin),
            "argmax": list(report.argmax),
            "degenerate": report.degenerate,
            "sign_violations": [list(v) for v in report.sign_violations],
        },
    )


def half_bounded_check(
    family: Union[MultiplierFamily, Callable[[np.ndarray, int], np.ndarray]],
    K: int,
    N: int,
    decay_ks: Sequence[int] = (1, 5, 10),
    n_limit: int = 10**4,
    decay_ratio: float = 1e-2,
) -> CheckReport:
    """M_lower > 0 and every tabled row decays; accepts a family or a raw b(k, n)."""
    if isinstance(family, MultiplierFamily):
        report = half_bounded_diagnostic(family, K, N, decay_ks, n_limit, decay_ratio)
        source = family.describe()
    else:
        report = half_bounded_sequence(family, K, N, decay_ks, n_limit, decay_ratio)
        source = {"name": getattr(family, "__name__", "sequence")}
    trace = [
        {"k": k, "n": n, "b": b} for k, row in sorted(report.decay_table.items()) for n, b in row
    ]
    return CheckReport(
        check="half-bounded",
        inputs={"family": source, "K": K, "N": N},
        lhs=report.M_lower, rhs=None, value=report.M_lower, passed=report.passed,
        tolerances={"decay_ratio": decay_ratio},
        trace=trace,
        details={"argmin": list(report.argmin), "decays": report.decays},
    )


def cap_bracket_check(
    m_values: Sequence[int],
    t_values: Sequence[float],
    n_quad: int = 64,
    slack: float = 1e-12,
) -> CheckReport:
    """(omega_{m-1}/m)(2/pi)^{m-1} t^m <= C_m(t) <= omega_{m-1} t^m; lower side on (0, pi/2]."""
    trace = []
    for m in m_values:
        for t in sorted(float(t) for t in t_values):
            volume = cap_volume(t, m, n_quad)
            lower, upper = cap_volume_bracket(t, m)
            lower_margin = (volume - lower) / volume if t <= math.pi / 2 else math.inf
            upper_margin = (upper - volume) / volume
            trace.append({"m": m, "t": t, "volume": volume, "lower": lower, "upper": upper,
                          "margin": min(lower_margin, upper_margin)})
    margin = min(row["margin"] for row in trace)
    return CheckReport(
        check="cap-bracket",
        inputs={"m_values": list(m_values), "t_count": len(t_values)},
        lhs=None, rhs=None, value=margin, passed=margin >= -slack,
        tolerances={"slack": slack}, trace=trace,
    )


def uniform_bound_check(
    family: MultiplierFamily,
    k_range: Sequence[int],
    t_range: Sequence[float],
    tol: float = 1e-10,
) -> CheckReport:
    """sup |eta_k^t| <= the family's declared operator-norm bound."""
    sup = uniform_bound(family, k_range, t_range)
    bound = family.declared_uniform_bound
    return CheckReport(
        check="uniform-bound",
        inputs={"family": family.describe(), "k_max": max(k_range), "t_count": len(t_range)},
        lhs=sup, rhs=bound, value=bound - sup, passed=sup <= bound + tol,
        tolerances={"slack": tol},
    )


# ─────────────────────────────────────────────────────────────
# Hypothesis-to-conclusion pipeline
# ─────────────────────────────────────────────────────────────

HYPOTHESES = ("half-bounded", "equivalence")


def end_to_end_pipeline(
    kern: Kernel,
    family: MultiplierFamily,
    t_grid: Sequence[float],
    window: Optional[tuple[int, int]] = None,
    hypothesis: str = "half-bounded",
    s: Optional[float] = None,
    K: int = 200,
    N: int = 100,
    k_range: Optional[Sequence[int]] = None,
    t_range: Optional[Sequence[float]] = None,
    band_limit_factor: Optional[float] = None,
    max_growth: float = 2.0,
    ratio_limit: float = 1e4,
) -> CheckReport:
    """
    Hypothesis stage (half-boundedness, or the equivalence certificate), then
    the Hölder fit, then eigenvalue decay at exponent 1 + min(beta-hat, 2)/m.
    A stage that cannot run is reported as failed with the reason.
    """
    if hypothesis not in HYPOTHESES:
        raise DomainError(f"unknown hypothesis '{hypothesis}'; valid: {', '.join(HYPOTHESES)}")
    stages: list[dict] = []
    flags: dict = {}

    if hypothesis == "half-bounded":
        hb = half_bounded_check(family, K, N)
        stages.append({"stage": "half-bounded", "passed": hb.passed, "M_lower": hb.value,
                       "argmin": hb.details["argmin"], "decays": hb.details["decays"]})
    else:
        s = s if s is not None else family.declared_s
        if s is None:
            raise DomainError(f"family '{family.name}' declares no equivalence exponent; pass s")
        eq = equivalence_check(
            family, s,
            k_range if k_range is not None else range(1, 201),
            t_range if t_range is not None else log_spaced(1e-3, math.pi / 2, 64),
            ratio_limit,
        )
        stages.append({"stage": "equivalence", "passed": eq.passed, "s": s,
                       "c_low": eq.lhs, "c_high": eq.rhs})

    fit = None
    try:
        fit = holder_exponent_fit(kern, family, t_grid, band_limit_factor)
        stages.append({"stage": "holder-fit", "passed": fit.slope > 0, **fit.to_record()})
    except FitError as exc:
        stages.append({"stage": "holder-fit", "passed": False, "error": str(exc),
                       "usable": exc.usable})

    growth = math.inf
    if fit is None or fit.slope <= 0:
        stages.append({"stage": "decay", "passed": False, "skipped": "no usable Hölder exponent"})
    else:
        beta = min(fit.slope, 2.0)
        flags["beta_hat_above_2"] = fit.slope > 2.0
        total = cumulative_dim(kern.K_max, kern.m)
        lo, hi = window or (min(16, total), total)
        seq = leading_eigenvalues(kern, min(hi, total))
        decay = decay_check(seq, beta, kern.m, (lo, hi), max_growth)
        growth = decay.growth
        stages.append({"stage": "decay", "passed": decay.passed, "beta": beta,
                       "exponent": decay.exponent, "growth": decay.growth,
                       "window_sups": decay.sups})

    passed = all(stage["passed"] for stage in stages)
    return CheckReport(
        check="pipeline",
        inputs={"family": family.describe(), "kernel": _kernel_inputs(kern), "hypothesis": hypothesis},
        lhs=None, rhs=None, value=growth, passed=passed,
        tolerances={"max_growth": max_growth, "ratio_limit": ratio_limit},
        details={"stages": stages, "flags": flags},
    )
