import math

import numpy as np
import pytest
from scipy.special import eval_legendre

from sphere_multipliers.analysis import (
    block_closing_check,
    cap_bracket_check,
    decay_check,
    deviation_sum,
    deviation_sum_check,
    end_to_end_pipeline,
    equivalence_check,
    half_bounded_check,
    hausdorff_young_check,
    holder_conditions_check,
    holder_exponent_fit,
    holder_integral,
    holder_sup_deviation,
    kernel_identity_check,
    l1_sup_check,
    parseval_equality_check,
    sqrt_deviation_identity_check,
    tail_mass_check,
    uniform_bound_check,
)
from sphere_multipliers.errors import DomainError, FitError, ShapeError
from sphere_multipliers.harmonics import random_coefficients
from sphere_multipliers.kernels import eigenvalue_sequence, make_kernel, power_law_zonal, random_kernel
from sphere_multipliers.multipliers import (
    cap_family,
    combo_family,
    custom_family,
    identity_family,
    log_spaced,
    shifting_family,
    steklov_family,
)

FIT_GRID = log_spaced(1e-3, 0.1, 64)


def ramp(k, t):
    return 1.0 - np.minimum(1.0, k * t)


# ─── spatial checks ──────────────────────────────────────────

@pytest.mark.parametrize("family", [shifting_family(2), combo_family(2, 2), cap_family(2), steklov_family(2)])
@pytest.mark.parametrize("t", [0.05, 0.7, 2.0])
def test_parseval_equality(band_limited, family, t):
    report = parseval_equality_check(band_limited, family, t)
    assert report.passed, report.to_record()
    assert report.lhs > 0


def test_parseval_for_identity_is_exactly_zero(band_limited):
    report = parseval_equality_check(band_limited, identity_family(2), 0.3)
    assert report.lhs == report.rhs == report.value == 0.0
    assert report.passed


def test_spatial_checks_need_s2(rng):
    with pytest.raises(ShapeError):
        parseval_equality_check(random_coefficients(3, 4, rng), shifting_family(3), 0.3)


@pytest.mark.parametrize("p", [1.1, 1.5, 2.0])
def test_hausdorff_young(band_limited, p):
    report = hausdorff_young_check(band_limited, shifting_family(2), 0.4, p)
    assert report.passed, report.to_record()
    assert report.inputs["q"] == pytest.approx(p / (p - 1))


def test_hausdorff_young_is_sharp_at_p2(band_limited):
    report = hausdorff_young_check(band_limited, cap_family(2), 0.4, 2.0)
    assert abs(report.value) <= 1e-9 * report.rhs


def test_hausdorff_young_conventions(band_limited):
    normalized = hausdorff_young_check(band_limited, shifting_family(2), 0.4, 1.5)
    surface = hausdorff_young_check(band_limited, shifting_family(2), 0.4, 1.5, convention="surface")
    assert surface.lhs == pytest.approx(math.sqrt(4 * math.pi) * normalized.lhs, rel=1e-12)
    assert surface.passed
    with pytest.raises(DomainError):
        hausdorff_young_check(band_limited, shifting_family(2), 0.4, 1.5, convention="bogus")


@pytest.mark.parametrize("p", [1.0, 2.5])
def test_hausdorff_young_exponent_range(band_limited, p):
    with pytest.raises(DomainError):
        hausdorff_young_check(band_limited, shifting_family(2), 0.4, p)


def test_l1_sup(band_limited):
    report = l1_sup_check(band_limited, steklov_family(2), 0.4)
    assert report.check == "l1sup"
    assert report.passed, report.to_record()


@pytest.fixture(scope="module")
def corpus():
    """100 seeded band-limited functions on S^2, K = 32."""
    streams = np.random.SeedSequence(1234).spawn(100)
    return [random_coefficients(2, 32, np.random.default_rng(s)) for s in streams]


def test_parseval_over_the_corpus(corpus):
    for f in corpus:
        for t in (0.1, 0.5, 1.0):
            report = parseval_equality_check(f, shifting_family(2), t)
            assert report.value <= 1e-9, report.to_record()


def test_hausdorff_young_over_the_corpus(corpus):
    family = shifting_family(2)
    for f in corpus:
        for t in (0.1, 0.5, 1.0):
            assert l1_sup_check(f, family, t).value >= -1e-6
            for p in (1.25, 1.5, 1.75):
                report = hausdorff_young_check(f, family, t, p)
                assert report.value >= -1e-6, report.to_record()


# ─── kernel identities ───────────────────────────────────────

def test_kernel_identity_zonal_path(smooth_kernel):
    report = kernel_identity_check(smooth_kernel, shifting_family(2), 0.3)
    assert report.inputs["path"] == "zonal"
    assert report.value <= 1e-12


def test_kernel_identity_on_s4():
    report = kernel_identity_check(power_law_zonal(4, 40, 6.0), cap_family(4), 0.2)
    assert report.passed, report.to_record()


FAMILIES = {
    "shifting": shifting_family,
    "combo": lambda m: combo_family(m, 2),
    "cap": cap_family,
    "steklov": steklov_family,
}
EIGHT_TS = log_spaced(0.1, 2.5, 8)


@pytest.mark.parametrize("name", sorted(FAMILIES))
@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_kernel_identity_zonal_path_across_families(name, m):
    kern, family = power_law_zonal(m, 32, m + 3.0), FAMILIES[name](m)
    for t in EIGHT_TS:
        report = kernel_identity_check(kern, family, t, path="zonal")
        assert report.value <= 1e-12, (t, report.to_record())


def test_kernel_identity_grid_path():
    report = kernel_identity_check(random_kernel(2, 8, seed=7), shifting_family(2), 0.4)
    assert report.inputs["path"] == "grid"
    assert report.passed, report.to_record()


def test_kernel_identity_paths_agree():
    kern = power_law_zonal(2, 10, 3.0)
    zonal = kernel_identity_check(kern, combo_family(2, 2), 0.3, path="zonal")
    grid = kernel_identity_check(kern, combo_family(2, 2), 0.3, path="grid")
    assert grid.rhs == pytest.approx(zonal.rhs, rel=1e-10)


def test_kernel_identity_errors():
    general = random_kernel(2, 4, seed=1)
    with pytest.raises(ShapeError):
        kernel_identity_check(general, shifting_family(3), 0.3)
    with pytest.raises(ShapeError):
        kernel_identity_check(general, shifting_family(2), 0.3, path="zonal")
    with pytest.raises(ShapeError):
        kernel_identity_check(random_kernel(3, 3, seed=1), shifting_family(3), 0.3)
    with pytest.raises(DomainError):
        kernel_identity_check(general, shifting_family(2), 0.3, path="fft")


# ─── Hölder quantities ───────────────────────────────────────

def test_holder_integral_for_general_kernels_matches_zonal_formula():
    kern = power_law_zonal(2, 10, 3.0)
    general = make_kernel(2, kern.blocks)
    family = shifting_family(2)
    assert holder_integral(general, family, 0.2) == pytest.approx(holder_integral(kern, family, 0.2), rel=1e-12)


def test_holder_integral_vanishes_for_identity(smooth_kernel):
    assert holder_integral(smooth_kernel, identity_family(2), 0.1) == 0.0


def test_holder_integral_matches_direct_summation():
    t = np.array(FIT_GRID[::9])
    k = np.arange(257)
    direct = [math.fsum((1 - eval_legendre(k, math.cos(s))) * (2 * k + 1) * (1.0 + k) ** -2.5) for s in t]
    kern = power_law_zonal(2, 256, 2.5)
    got = [holder_integral(kern, shifting_family(2), s) for s in t]
    np.testing.assert_allclose(got, direct, rtol=1e-10)


@pytest.mark.parametrize("gamma, beta", [(2.5, 1.5), (6.0, 2.0)])
def test_holder_exponent_of_power_law(gamma, beta):
    fit = holder_exponent_fit(power_law_zonal(2, 256, gamma), shifting_family(2), FIT_GRID)
    assert fit.slope == pytest.approx(beta, abs=0.1)
    assert fit.excluded == []
    assert fit.window == (FIT_GRID[0], FIT_GRID[-1])


def test_holder_fit_band_limit_cutoff():
    fit = holder_exponent_fit(power_law_zonal(2, 256, 6.0), shifting_family(2), FIT_GRID, band_limit_factor=4)
    assert fit.window[0] >= 4 / 256
    assert fit.excluded and all(row["reason"] == "band-limit" for row in fit.excluded)
    assert fit.to_record()["usable"] == len(fit.points) == 64 - len(fit.excluded)
    assert fit.slope == pytest.approx(2.0, abs=0.1)


def test_holder_fit_without_usable_points(smooth_kernel):
    with pytest.raises(FitError) as info:
        holder_exponent_fit(smooth_kernel, identity_family(2), FIT_GRID)
    assert info.value.usable == 0
    assert len(info.value.excluded) == len(FIT_GRID)
    assert info.value.excluded[0]["reason"] == "zero"


def test_sqrt_deviation_identity(smooth_kernel):
    report = sqrt_deviation_identity_check(smooth_kernel, shifting_family(2), 0.2)
    assert report.check == "sqrt-identity"
    assert report.passed, report.to_record()
    assert report.details["bound_holds"]
    assert report.details["sup_deviation"] >= report.details["holder_integral"] * (1 - 1e-12)
    assert report.details["eta0_bound_holds"]
    assert report.details["eta0_bound"] == pytest.approx(2.0 * report.details["holder_integral"], rel=1e-15)
    with pytest.raises(ShapeError):
        sqrt_deviation_identity_check(random_kernel(2, 3, seed=1), shifting_family(2), 0.2)


@pytest.mark.parametrize("name", sorted(FAMILIES))
@pytest.mark.parametrize("m", [2, 3])
def test_sqrt_deviation_identity_across_families(name, m):
    kern, family = power_law_zonal(m, 64, m + 2.5), FAMILIES[name](m)
    for t in EIGHT_TS:
        report = sqrt_deviation_identity_check(kern, family, t)
        assert report.value <= 1e-12, (t, report.to_record())


def test_holder_conditions(smooth_kernel):
    report = holder_conditions_check(smooth_kernel, cap_family(2), [0.01, 0.1, 0.5])
    assert report.passed, report.to_record()
    assert [row["t"] for row in report.trace] == [0.01, 0.1, 0.5]
    assert holder_sup_deviation(smooth_kernel, cap_family(2), 0.1) == report.trace[1]["sup"]
    with pytest.raises(DomainError):
        holder_conditions_check(smooth_kernel, cap_family(2), [])
    with pytest.raises(ShapeError):
        holder_sup_deviation(random_kernel(2, 3, seed=1), cap_family(2), 0.1)


# ─── S(t) and eigenvalue decay ───────────────────────────────

def test_deviation_sum_matches_definition(smooth_kernel):
    family = shifting_family(2)
    eta = family.sequence(128, 0.3)
    expected = math.fsum((eta - 1.0) ** 2 * smooth_kernel.a * smooth_kernel.dims)
    assert deviation_sum(smooth_kernel, family, 0.3) == pytest.approx(expected, rel=1e-14)


def test_deviation_sum_bounded_at_the_holder_exponent(smooth_kernel):
    report = deviation_sum_check(smooth_kernel, shifting_family(2), log_spaced(1e-3, 0.5, 32), beta=1.5)
    assert report.passed, report.details
    assert report.trace[0]["t"] == pytest.approx(0.5)


def test_deviation_sum_grows_past_the_holder_exponent():
    kern = power_law_zonal(2, 512, 2.5)
    report = deviation_sum_check(kern, shifting_family(2), log_spaced(1e-3, 0.5, 32), beta=2.0)
    assert not report.passed
    assert report.value > 10


def test_deviation_sum_needs_t_values(smooth_kernel):
    with pytest.raises(DomainError):
        deviation_sum_check(smooth_kernel, shifting_family(2), [], beta=1.0)


def test_decay_of_an_exact_power_law():
    n = np.arange(1, 1025, dtype=float)
    report = decay_check(n ** -1.75, beta=1.5, m=2)
    assert report.exponent == 1.75
    assert report.growth == pytest.approx(1.0)
    assert report.spread == pytest.approx(1.0)
    assert report.passed
    assert [row["n_lo"] for row in report.trend[:4]] == [1, 2, 4, 8]


def test_decay_detects_slow_eigenvalues():
    n = np.arange(1, 1025, dtype=float)
    report = decay_check(n ** -1.25, beta=1.5, m=2)
    assert report.growth == pytest.approx(32.0)
    assert report.monotone_increasing
    assert not report.passed
    record = report.to_check_report().to_record(include_trace=True)
    assert record["check"] == "decay" and not record["pass"]
    assert len(record["trace"]) == 11


def test_decay_of_power_law_kernels():
    assert decay_check(eigenvalue_sequence(power_law_zonal(2, 40, 3.5)), beta=1.5, m=2).passed
    assert not decay_check(eigenvalue_sequence(power_law_zonal(2, 63, 2.75)), beta=1.5, m=2).passed


def test_decay_over_the_full_window():
    seq = eigenvalue_sequence(power_law_zonal(2, 128, 3.5))
    assert len(seq) == 16641
    report = decay_check(seq, beta=1.5, m=2, window=(16, 16641))
    assert report.passed, report.trend
    assert report.growth <= 2.0
    assert report.trend[0]["n_lo"] == 16 and report.trend[-1]["n_hi"] == 16641


def test_decay_negative_control_grows_monotonically():
    seq = eigenvalue_sequence(power_law_zonal(2, 128, 2.75))
    report = decay_check(seq, beta=1.5, m=2, window=(16, 16641))
    assert not report.passed
    assert report.growth > 4.0
    assert report.monotone_increasing


def test_decay_arguments():
    values = [1.0, 0.5, 0.25]
    for beta in (0.0, 2.5):
        with pytest.raises(DomainError):
            decay_check(values, beta=beta, m=2)
    with pytest.raises(DomainError):
        decay_check(values, beta=1.0, m=2, window=(3, 2))
    assert decay_check(values, beta=1.0, m=2, window=(2, 100)).window == (2, 3)


def test_tail_mass(smooth_kernel):
    report = tail_mass_check(smooth_kernel, beta=1.5)
    assert [row["n"] for row in report.trace] == [1, 2, 4, 8, 16, 32, 64, 128]
    assert report.passed, report.trace
    assert not tail_mass_check(power_law_zonal(2, 128, 2.5), beta=2.0).passed
    with pytest.raises(DomainError):
        tail_mass_check(smooth_kernel, beta=1.5, n_values=[0, 4])


def test_block_closing():
    report = block_closing_check(power_law_zonal(3, 10, 5.0))
    assert report.passed
    assert report.details["dominated"]
    assert report.trace[2]["index"] == 14
    broken = block_closing_check(make_kernel(2, [[0.1], [0.5, 0.05, 0.01]]))
    assert not broken.passed
    assert not broken.details["dominated"]


# ─── family certificates ─────────────────────────────────────

def test_equivalence_check():
    ts = log_spaced(1e-3, math.pi / 2, 16)
    report = equivalence_check(shifting_family(3), 2.0, range(1, 60), ts)
    assert report.passed, report.details
    assert report.value == pytest.approx(report.rhs / report.lhs)
    degenerate = equivalence_check(identity_family(2), 2.0, range(1, 10), ts)
    assert not degenerate.passed
    assert degenerate.details["degenerate"]
    assert not equivalence_check(shifting_family(3), 2.0, range(1, 60), ts, ratio_limit=1.0).passed


@pytest.mark.parametrize(
    "family, s",
    [(shifting_family(2), 2.0), (combo_family(2, 2), 4.0), (cap_family(2), 2.0), (steklov_family(2), 2.0)],
)
def test_equivalence_over_the_full_lattice(family, s):
    report = equivalence_check(family, s, range(1, 201), log_spaced(1e-3, math.pi / 2, 64))
    assert report.passed, report.details
    assert report.lhs > 0
    assert report.rhs / report.lhs <= 1e4


def test_half_bounded_ratio_example_is_exactly_one_half():
    report = half_bounded_check(lambda k, n: k / (k + n), K=200, N=100)
    assert report.passed
    assert report.value == 0.5


def test_shifting_family_is_half_bounded():
    report = half_bounded_check(shifting_family(2), K=200, N=100)
    assert report.passed, report.details
    assert report.value > 0


def test_half_bounded_check_with_a_raw_sequence():
    def ratio(k, n):
        return k / (k + n)

    report = half_bounded_check(ratio, K=50, N=20)
    assert report.passed
    assert report.inputs["family"] == {"name": "ratio"}
    assert report.value == pytest.approx(0.5)


def test_half_bounded_check_with_a_family():
    report = half_bounded_check(cap_family(2), K=60, N=20, n_limit=2000)
    assert report.passed, report.details
    assert report.trace[0]["k"] == 1


def test_cap_bracket():
    report = cap_bracket_check([2, 3, 4, 7], [1e-3, 0.5, math.pi / 2, 2.5])
    assert report.passed
    assert len(report.trace) == 16


def test_uniform_bound_check():
    ts = log_spaced(1e-3, math.pi / 2, 12)
    assert uniform_bound_check(combo_family(2, 3), range(0, 80), ts).passed
    loud = custom_family(lambda k, t: np.full(k.shape, 2.0))
    report = uniform_bound_check(loud, range(0, 5), ts)
    assert not report.passed
    assert report.value == pytest.approx(-1.0)


# ─── end-to-end pipeline ─────────────────────────────────────

def test_pipeline_with_half_boundedness(smooth_kernel):
    report = end_to_end_pipeline(
        smooth_kernel, shifting_family(2), FIT_GRID, K=60, N=20, band_limit_factor=4,
    )
    stages = report.details["stages"]
    assert [s["stage"] for s in stages] == ["half-bounded", "holder-fit", "decay"]
    assert report.passed, stages
    assert stages[1]["slope"] == pytest.approx(1.5, abs=0.15)
    assert report.details["flags"] == {"beta_hat_above_2": False}


def test_pipeline_with_equivalence(smooth_kernel):
    family = custom_family(ramp, declared_s=1.0)
    report = end_to_end_pipeline(
        smooth_kernel, family, FIT_GRID, hypothesis="equivalence", band_limit_factor=4,
    )
    stages = report.details["stages"]
    assert stages[0]["stage"] == "equivalence" and stages[0]["passed"]
    assert stages[0]["c_low"] == pytest.approx(1.0) and stages[0]["c_high"] == pytest.approx(1.0)
    # g(t) ~ t with a t^{3/2} correction that flattens the fitted slope
    assert 0.5 < stages[1]["slope"] < 1.1
    assert report.passed, stages


def test_pipeline_caps_beta_at_two():
    kern = power_law_zonal(2, 128, 6.0)
    report = end_to_end_pipeline(kern, shifting_family(2), FIT_GRID, K=60, N=20, band_limit_factor=4)
    decay = report.details["stages"][2]
    assert decay["beta"] <= 2.0
    assert decay["exponent"] <= 2.0


def test_pipeline_reports_a_failed_fit(smooth_kernel):
    report = end_to_end_pipeline(smooth_kernel, identity_family(2), FIT_GRID, K=20, N=10)
    stages = report.details["stages"]
    assert not report.passed
    assert stages[1]["passed"] is False and stages[1]["usable"] == 0
    assert stages[2]["skipped"]
    assert report.value == math.inf


def test_pipeline_arguments(smooth_kernel):
    with pytest.raises(DomainError):
        end_to_end_pipeline(smooth_kernel, shifting_family(2), FIT_GRID, hypothesis="guess")
    with pytest.raises(DomainError):
        end_to_end_pipeline(smooth_kernel, custom_family(ramp), FIT_GRID, hypothesis="equivalence")
