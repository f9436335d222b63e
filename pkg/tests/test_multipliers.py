import math

import numpy as np
import pytest
from scipy.special import eval_legendre

from sphere_multipliers.errors import DomainError
from sphere_multipliers.multipliers import (
    cap_family,
    cap_multiplier,
    cap_volume,
    cap_volume_bracket,
    combo_family,
    combo_multiplier,
    combo_weights,
    custom_family,
    equivalence_constants,
    half_bounded_diagnostic,
    half_bounded_sequence,
    identity_family,
    log_spaced,
    make_family,
    shifting_family,
    shifting_multiplier,
    steklov_family,
    steklov_multiplier,
    steklov_normalizer,
    uniform_bound,
    zero_family,
)

T_VALUES = [0.01, 0.3, 1.0, math.pi / 2, 2.5]


@pytest.mark.parametrize("t", T_VALUES)
def test_shifting_on_s2_is_legendre(t):
    eta = shifting_family(2).sequence(30, t)
    np.testing.assert_allclose(eta, eval_legendre(np.arange(31), math.cos(t)), atol=1e-13)


def test_shifting_on_s2_at_random_points():
    rng = np.random.default_rng(1000)
    for k, t in zip(rng.integers(0, 200, size=1000), rng.uniform(1e-3, math.pi - 1e-3, size=1000)):
        assert shifting_multiplier(int(k), float(t), 2) == pytest.approx(eval_legendre(int(k), math.cos(t)), abs=1e-12)


@pytest.mark.parametrize("t", T_VALUES)
def test_shifting_on_s3_is_a_sine_ratio(t):
    k = np.arange(25)
    expected = np.sin((k + 1) * t) / ((k + 1) * math.sin(t))
    np.testing.assert_allclose(shifting_family(3).sequence(24, t), expected, atol=1e-13)


def test_shifting_single_value():
    assert shifting_multiplier(0, 0.7, 4) == 1.0
    assert shifting_multiplier(2, math.pi / 2, 2) == pytest.approx(-0.5, abs=1e-15)


def test_combo_weights():
    np.testing.assert_allclose(combo_weights(1), [1.0])
    np.testing.assert_allclose(combo_weights(2), [4.0 / 3.0, -1.0 / 3.0])
    for l in range(1, 11):
        assert math.fsum(combo_weights(l)) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DomainError):
        combo_weights(0)
    with pytest.raises(DomainError):
        combo_weights(11)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_combo_of_order_one_is_shifting(m):
    np.testing.assert_allclose(
        combo_family(m, 1).sequence(20, 0.4), shifting_family(m).sequence(20, 0.4), atol=1e-15
    )


def test_combo_of_order_two():
    t = 0.25
    expected = 4.0 / 3.0 * eval_legendre(7, math.cos(t)) - 1.0 / 3.0 * eval_legendre(7, math.cos(2 * t))
    assert combo_multiplier(7, t, 2, 2) == pytest.approx(expected, abs=1e-13)


def test_combo_declared_constants():
    family = combo_family(2, 3)
    assert family.declared_s == 6.0
    assert family.declared_uniform_bound == pytest.approx(math.fsum(np.abs(combo_weights(3))))


@pytest.mark.parametrize("t", [0.05, 0.6, 1.5])
def test_cap_on_s2_closed_form(t):
    c = math.cos(t)
    eta = cap_family(2).sequence(20, t)
    assert eta[0] == 1.0
    for k in range(1, 21):
        expected = (eval_legendre(k - 1, c) - eval_legendre(k + 1, c)) / ((2 * k + 1) * (1 - c))
        assert eta[k] == pytest.approx(expected, abs=1e-12)
    assert cap_multiplier(20, t, 2) == pytest.approx(eta[20], abs=1e-15)


@pytest.mark.parametrize("t", [0.1, 1.0, math.pi / 2, 3.0])
def test_cap_volume(t):
    assert cap_volume(t, 2) == pytest.approx(2 * math.pi * (1 - math.cos(t)), rel=1e-13)
    assert cap_volume(t, 3) == pytest.approx(4 * math.pi * (t / 2 - math.sin(2 * t) / 4), rel=1e-12)


def test_cap_volume_of_whole_sphere():
    assert cap_volume(math.pi, 2) == pytest.approx(4 * math.pi, rel=1e-13)
    with pytest.raises(DomainError):
        cap_volume(0.0, 2)


@pytest.mark.parametrize("m", [2, 3, 4, 6])
@pytest.mark.parametrize("t", [1e-3, 0.1, 0.8, math.pi / 2])
def test_cap_volume_bracket(m, t):
    low, high = cap_volume_bracket(t, m)
    assert low <= cap_volume(t, m) <= high


@pytest.mark.parametrize("t", [0.02, 0.5, 1.2, 2.0])
def test_steklov_normalizer_on_s2(t):
    assert steklov_normalizer(t, 2) == pytest.approx(-2.0 * math.log(math.cos(t / 2)), rel=1e-12)


@pytest.mark.parametrize("m", [2, 3, 5])
@pytest.mark.parametrize("t", [1e-2, 1e-3])
def test_steklov_normalizer_small_t(m, t):
    assert steklov_normalizer(t, m) / (t * t / (2 * m)) == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize("m", [2, 3])
def test_cap_fills_the_sphere_near_pi(m):
    for k in range(1, 6):
        assert abs(cap_multiplier(k, math.pi - 1e-9, m)) < 1e-13

def test_steklov_is_bounded_and_starts_at_one():
    eta = steklov_family(3).sequence(40, 0.3)
    assert eta[0] == 1.0
    assert np.all(np.abs(eta) <= 1.0 + 1e-12)
    assert steklov_multiplier(40, 0.3, 3) == pytest.approx(eta[40], abs=1e-15)


def test_small_t_limits():
    # eta_k^t -> 1 as t -> 0 for every built-in family
    for family in (shifting_family(2), combo_family(2, 2), cap_family(2), steklov_family(2)):
        assert family.eta(5, 1e-6) == pytest.approx(1.0, abs=1e-9)


def test_reference_families():
    np.testing.assert_array_equal(identity_family(2).sequence(5, 0.1), np.ones(6))
    np.testing.assert_array_equal(zero_family(4).sequence(5, 0.1), np.zeros(6))


@pytest.mark.parametrize("t", [0.0, math.pi, -0.1, float("nan")])
def test_t_out_of_range(t):
    with pytest.raises(DomainError):
        shifting_family(2).sequence(4, t)


def test_sequences_are_memoized_and_read_only(fresh_caches):
    first = shifting_family(2).sequence(10, 0.3)
    assert shifting_family(2).sequence(10, 0.3) is first
    assert "multipliers.sequence" in fresh_caches.stats()
    with pytest.raises(ValueError):
        first[0] = 2.0


def test_negative_band_limit():
    with pytest.raises(DomainError):
        cap_family(2).sequence(-1, 0.1)


def test_custom_family_from_mapping():
    family = custom_family({(0, 0.5): 1.0, (1, 0.5): 0.25}, declared_s=2.0)
    np.testing.assert_array_equal(family.sequence(1, 0.5), [1.0, 0.25])
    with pytest.raises(DomainError):
        family.sequence(2, 0.5)
    with pytest.raises(DomainError):
        family.sequence(1, 0.6)


def test_custom_family_from_callable():
    family = custom_family(lambda k, t: 1.0 - np.minimum(1.0, k * t), declared_s=1.0)
    np.testing.assert_allclose(family.sequence(4, 0.3), [1.0, 0.7, 0.4, 0.1, 0.0])
    constant = custom_family(lambda k, t: 0.5)
    np.testing.assert_array_equal(constant.sequence(3, 0.2), [0.5] * 4)


def test_make_family():
    assert make_family("combo", 3, l=4).params == (("l", 4),)
    assert make_family("steklov", 2).name == "steklov"
    assert make_family("custom", 2, table=lambda k, t: 1.0, s=1.5).declared_s == 1.5
    with pytest.raises(DomainError):
        make_family("custom", 2)
    with pytest.raises(DomainError):
        make_family("gaussian", 2)
    with pytest.raises(DomainError):
        make_family("shifting", 1)


def test_describe():
    info = combo_family(2, 2).describe()
    assert info["params"] == {"l": 2}
    assert info["declared_s"] == 4.0


def test_log_spaced():
    t = log_spaced(1e-3, 1.0, 4)
    np.testing.assert_allclose(t, [1e-3, 1e-2, 1e-1, 1.0])
    np.testing.assert_array_equal(log_spaced(0.2, 1.0, 1), [0.2])
    with pytest.raises(DomainError):
        log_spaced(0.1, 1.0, 0)


def test_equivalence_for_shifting():
    report = equivalence_constants(shifting_family(2), 2.0, range(1, 51), log_spaced(1e-3, math.pi / 2, 20))
    assert report.passed
    assert 0 < report.c_low <= report.c_high <= 2.0
    assert report.sign_violations == []
    assert report.k_range == (1, 50)
    assert math.isfinite(report.spread)


def test_equivalence_for_identity_is_degenerate():
    report = equivalence_constants(identity_family(2), 2.0, range(1, 10), [0.1, 0.5])
    assert report.degenerate
    assert not report.passed
    assert report.spread == math.inf


def test_equivalence_records_sign_violations():
    family = custom_family(lambda k, t: np.where(k == 3, 1.5, 0.0))
    report = equivalence_constants(family, 1.0, range(1, 6), [0.2, 0.4])
    assert report.sign_violations == [(3, 0.2), (3, 0.4)]
    assert not report.passed


def test_equivalence_lattice_checks():
    family = shifting_family(2)
    with pytest.raises(DomainError):
        equivalence_constants(family, 0.0, [1], [0.1])
    with pytest.raises(DomainError):
        equivalence_constants(family, 2.0, [0, 1], [0.1])
    with pytest.raises(DomainError):
        equivalence_constants(family, 2.0, [1], [2.0])
    with pytest.raises(DomainError):
        equivalence_constants(family, 2.0, [], [0.1])


def test_half_bounded_sequence_ratio():
    report = half_bounded_sequence(lambda k, n: k / (k + n), K=100, N=50)
    assert report.M_lower == pytest.approx(0.5)
    assert report.argmin == (1, 1)
    assert report.decays
    assert report.passed
    assert report.decay_table[5][0] == (5, pytest.approx(0.5))


def test_half_bounded_sequence_without_decay():
    report = half_bounded_sequence(lambda k, n: np.ones_like(k, dtype=float), K=20, N=10)
    assert report.M_lower == 1.0
    assert not report.decays
    assert not report.passed


def test_half_bounded_bounds():
    with pytest.raises(DomainError):
        half_bounded_sequence(lambda k, n: k, K=5, N=10)


def test_half_bounded_for_shifting():
    report = half_bounded_diagnostic(shifting_family(2), K=60, N=20, n_limit=2000)
    assert report.M_lower > 0.1
    assert report.passed


def test_uniform_bound():
    ts = log_spaced(1e-3, math.pi / 2, 10)
    assert uniform_bound(shifting_family(2), range(0, 40), ts) == pytest.approx(1.0)
    assert uniform_bound(combo_family(2, 2), range(0, 40), ts) <= 5.0 / 3.0 + 1e-12
    with pytest.raises(DomainError):
        uniform_bound(shifting_family(2), [], ts)
