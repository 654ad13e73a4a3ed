"""Tests for point estimation: likelihoods, ML, MoM, and MDE fitters."""

import math

import numpy as np
import pytest

from wicksell import (
    DataError,
    FitOptions,
    ParameterError,
    ProfileSample,
    SizeDistribution,
    build_approximation,
    cvm_distance,
    effective_diameters,
    fit,
    fit_mde,
    fit_mle,
    fit_mle_censored,
    fit_mle_weighted,
    fit_mom,
    fit_mom_from_moments,
    log_likelihood,
    profile_cdf,
    simulate_profiles,
)

W09 = SizeDistribution("weibull", 1.0, 0.9)
W12 = SizeDistribution("weibull", 1.0, 1.2)
LN07 = SizeDistribution("lognormal", 0.0, 0.7)
PN = SizeDistribution("posnormal", 3.876, 2.816)


def theoretical_profile_moments(dist):
    mean_y = math.pi / 4.0 * dist.raw_moment(2) / dist.raw_moment(1)
    mean_y2 = 2.0 / 3.0 * dist.raw_moment(3) / dist.raw_moment(1)
    return mean_y, mean_y2


# -- effective diameters -------------------------------------------------------

def test_effective_diameter_unit_circle():
    # a profile of area pi/4 is a disk of diameter 1
    assert effective_diameters([math.pi / 4.0]) == pytest.approx([1.0])


def test_effective_diameter_examples():
    areas = np.array([1.0, 4.0, 0.25])
    expected = 2.0 * np.sqrt(areas / np.pi)
    np.testing.assert_allclose(effective_diameters(areas), expected, rtol=1e-15)


def test_effective_diameter_legacy_variant():
    got = effective_diameters([4.0 * math.pi], formula="legacy")
    assert got == pytest.approx([1.0])
    # legacy is exactly a quarter of the area-equivalent value
    areas = np.array([0.3, 2.0, 11.0])
    np.testing.assert_allclose(
        effective_diameters(areas, formula="legacy"),
        effective_diameters(areas) / 4.0,
        rtol=1e-15,
    )


def test_effective_diameter_validation():
    with pytest.raises(DataError):
        effective_diameters([1.0, -2.0])
    with pytest.raises(ParameterError):
        effective_diameters([1.0], formula="nope")


# -- sample container ----------------------------------------------------------

def test_sample_validation():
    with pytest.raises(DataError):
        ProfileSample(interior=[1.0, 0.0])
    with pytest.raises(DataError):
        ProfileSample(interior=[1.0], censored=[-0.5])
    with pytest.raises(DataError):
        ProfileSample(interior=[1.0], section=(2.0, -1.0))
    with pytest.raises(DataError):
        ProfileSample(interior=[3.0], section=(2.0, 5.0))
    s = ProfileSample(interior=[0.5, 1.2], censored=[0.3], section=(5.0, 5.0))
    assert s.n_interior == 2


# -- log-likelihood ------------------------------------------------------------

def test_loglik_single_point_value():
    sample = ProfileSample(interior=[1.0])
    ap = build_approximation(8)
    assert log_likelihood(sample, W09, ap) == pytest.approx(
        math.log(0.37034), abs=2e-4
    )


def test_loglik_is_sum_of_log_densities():
    rng = np.random.default_rng(3)
    y = rng.uniform(0.1, 2.0, size=40)
    sample = ProfileSample(interior=y)
    ap = build_approximation(15)
    from wicksell import approx_profile_pdf

    expected = np.sum(np.log(approx_profile_pdf(W12, ap, np.sort(y))))
    assert log_likelihood(sample, W12, ap) == pytest.approx(expected, rel=1e-12)


def test_loglik_order_independent():
    rng = np.random.default_rng(4)
    y = rng.uniform(0.05, 3.0, size=200)
    a = log_likelihood(ProfileSample(interior=y), LN07)
    b = log_likelihood(ProfileSample(interior=y[::-1].copy()), LN07)
    c = log_likelihood(ProfileSample(interior=rng.permutation(y)), LN07)
    assert a == b == c


def test_loglik_underflow_returns_neg_inf():
    # density underflows to zero far in the tail of a steep law
    sample = ProfileSample(interior=[500.0])
    d = SizeDistribution("weibull", 1.0, 5.0)
    assert log_likelihood(sample, d) == -math.inf


def test_loglik_censored_empty_equals_ordinary():
    y = simulate_profiles(W12, 50, seed=11)
    sample = ProfileSample(interior=y)
    assert log_likelihood(sample, W12, mode="censored") == log_likelihood(
        sample, W12, mode="ordinary"
    )


def test_loglik_censored_terms_are_negative():
    y = simulate_profiles(W12, 50, seed=12)
    plain = ProfileSample(interior=y)
    with_cens = ProfileSample(interior=y, censored=[0.4, 0.9])
    assert log_likelihood(with_cens, W12, mode="censored") < log_likelihood(
        plain, W12, mode="ordinary"
    )


def test_loglik_weighted_huge_section_matches_ordinary():
    y = simulate_profiles(LN07, 80, seed=13)
    sample = ProfileSample(interior=y, section=(1e7, 1e7))
    lw = log_likelihood(sample, LN07, mode="weighted")
    lo = log_likelihood(sample, LN07, mode="ordinary")
    assert lw == pytest.approx(lo, rel=1e-5)


def test_loglik_validation():
    sample = ProfileSample(interior=[1.0])
    with pytest.raises(ParameterError):
        log_likelihood(sample, W12, mode="bogus")
    with pytest.raises(DataError):
        log_likelihood(ProfileSample(interior=[]), W12)
    with pytest.raises(DataError):
        log_likelihood(sample, W12, mode="weighted")  # no section given


# -- method of moments ---------------------------------------------------------

@pytest.mark.parametrize("dist", [W09, W12, LN07, PN])
def test_mom_self_consistency(dist):
    # exact theoretical profile moments must return the exact parameters
    mean_y, mean_y2 = theoretical_profile_moments(dist)
    res = fit_mom_from_moments(mean_y, mean_y2, dist.family)
    assert res.converged
    assert res.dist.scale == pytest.approx(dist.scale, abs=1e-8)
    assert res.dist.shape == pytest.approx(dist.shape, abs=1e-8)


def test_mom_variance_clamp_flag():
    # second moment below the degenerate-diameter floor forces sigma -> 0
    res = fit_mom_from_moments(1.0, 1.0, "lognormal")
    assert "variance-clamped" in res.flags
    assert res.dist.shape <= 1e-6


def test_mom_weibull_shape_bound_flag():
    # ratio below the floor is unreachable by any finite weibull shape
    res = fit_mom_from_moments(1.0, 1.05, "weibull")
    assert "shape-at-bound" in res.flags
    assert not res.converged


def test_mom_validation():
    with pytest.raises(DataError):
        fit_mom(ProfileSample(interior=[1.0]), "weibull")
    with pytest.raises(DataError):
        fit_mom_from_moments(-1.0, 2.0, "weibull")
    with pytest.raises(ParameterError):
        fit_mom_from_moments(1.0, 2.0, "cauchy")


def test_mom_scale_equivariance():
    y = simulate_profiles(W12, 400, seed=21)
    r1 = fit_mom(ProfileSample(interior=y), "weibull")
    r2 = fit_mom(ProfileSample(interior=10.0 * y), "weibull")
    assert r2.dist.scale == pytest.approx(10.0 * r1.dist.scale, rel=1e-9)
    assert r2.dist.shape == pytest.approx(r1.dist.shape, rel=1e-9)


def test_mom_scale_equivariance_lognormal():
    y = simulate_profiles(LN07, 400, seed=22)
    r1 = fit_mom(ProfileSample(interior=y), "lognormal")
    r2 = fit_mom(ProfileSample(interior=10.0 * y), "lognormal")
    # log-normal location shifts by log of the unit factor
    assert r2.dist.scale == pytest.approx(r1.dist.scale + math.log(10.0), abs=1e-9)
    assert r2.dist.shape == pytest.approx(r1.dist.shape, rel=1e-9)


# -- maximum likelihood --------------------------------------------------------

def test_mle_is_argmax():
    y = simulate_profiles(W12, 300, seed=31)
    sample = ProfileSample(interior=y)
    res = fit_mle(sample, "weibull")
    assert res.converged
    assert res.logL >= log_likelihood(sample, W12)
    for ds, dk in [(0.05, 0.0), (-0.05, 0.0), (0.0, 0.05), (0.0, -0.05)]:
        nearby = SizeDistribution(
            "weibull", res.dist.scale * (1 + ds), res.dist.shape * (1 + dk)
        )
        assert res.logL >= log_likelihood(sample, nearby) - 1e-6


@pytest.mark.parametrize(
    "dist,rtol",
    [(W12, 0.12), (LN07, 0.12), (PN, 0.25)],
    ids=["weibull", "lognormal", "posnormal"],
)
def test_mle_recovers_truth_moderate_n(dist, rtol):
    y = simulate_profiles(dist, 2000, seed=32)
    res = fit_mle(ProfileSample(interior=y), dist.family,
                  options=FitOptions(restarts=2))
    assert res.converged
    # abs tolerance so the zero log-normal location compares sensibly
    assert res.dist.scale == pytest.approx(
        dist.scale, abs=rtol * max(1.0, abs(dist.scale))
    )
    assert res.dist.shape == pytest.approx(dist.shape, rel=rtol)


def test_mle_scale_equivariance():
    y = simulate_profiles(W12, 250, seed=33)
    opts = FitOptions(restarts=1)
    r1 = fit_mle(ProfileSample(interior=y), "weibull", options=opts)
    r2 = fit_mle(ProfileSample(interior=10.0 * y), "weibull", options=opts)
    assert r2.dist.scale == pytest.approx(10.0 * r1.dist.scale, rel=1e-3)
    assert r2.dist.shape == pytest.approx(r1.dist.shape, rel=1e-3)


def test_mle_censored_corrects_truncation():
    # dropping the largest 15% of profiles distorts a plain fit;
    # keeping them as censored terms pulls the fit back toward the truth
    y = simulate_profiles(W12, 400, seed=34)
    cut = np.quantile(y, 0.85)
    interior, clipped = y[y <= cut], y[y > cut]
    plain = fit_mle(ProfileSample(interior=interior), "weibull")
    cens = fit_mle_censored(
        ProfileSample(interior=interior, censored=clipped), "weibull"
    )
    assert abs(cens.dist.shape - W12.shape) < abs(plain.dist.shape - W12.shape)
    truth = W12.mean_diameter()
    assert abs(cens.dist.mean_diameter() - truth) < abs(
        plain.dist.mean_diameter() - truth
    )
    assert cens.method == "ML_censored"


def test_mle_weighted_requires_section():
    y = simulate_profiles(W12, 50, seed=35)
    with pytest.raises(DataError):
        fit_mle_weighted(ProfileSample(interior=y), "weibull")


def test_mle_weighted_huge_section_matches_plain():
    y = simulate_profiles(W12, 300, seed=36)
    opts = FitOptions(restarts=1)
    plain = fit_mle(ProfileSample(interior=y), "weibull", options=opts)
    weighted = fit_mle_weighted(
        ProfileSample(interior=y, section=(1e7, 1e7)), "weibull", options=opts
    )
    assert weighted.dist.scale == pytest.approx(plain.dist.scale, rel=1e-3)
    assert weighted.dist.shape == pytest.approx(plain.dist.shape, rel=1e-3)


def test_mle_too_few_points():
    with pytest.raises(DataError):
        fit_mle(ProfileSample(interior=[1.0, 2.0]), "weibull")


def test_fit_result_to_dict():
    y = simulate_profiles(W12, 100, seed=37)
    res = fit_mle(ProfileSample(interior=y), "weibull",
                  options=FitOptions(restarts=1))
    d = res.to_dict()
    assert d["family"] == "weibull"
    assert d["method"] == "ML"
    assert d["m"] == 15
    assert d["mean_diameter"] == pytest.approx(res.dist.mean_diameter())


# -- minimum distance ----------------------------------------------------------

def test_cvm_distance_bounds_and_truth():
    y = simulate_profiles(W12, 500, seed=41)
    ap = build_approximation(15)
    d_true = cvm_distance(y, W12, ap)
    d_far = cvm_distance(y, SizeDistribution("weibull", 5.0, 3.0), ap)
    assert 0.0 < d_true < d_far
    # W^2 statistic upper bound is n/3 + 1/(12n)
    assert d_far <= len(y) / 3.0 + 1.0


def test_mde_beats_truth_on_its_own_objective():
    y = simulate_profiles(LN07, 300, seed=42)
    ap = build_approximation(15)
    res = fit_mde(ProfileSample(interior=y), "lognormal", approx=ap)
    assert res.converged
    assert cvm_distance(np.sort(y), res.dist, ap) <= cvm_distance(
        np.sort(y), LN07, ap
    ) + 1e-10


def test_mde_recovers_truth_moderate_n():
    y = simulate_profiles(W12, 2000, seed=43)
    res = fit_mde(ProfileSample(interior=y), "weibull",
                  options=FitOptions(restarts=2))
    assert res.dist.scale == pytest.approx(1.0, rel=0.15)
    assert res.dist.shape == pytest.approx(1.2, rel=0.15)


# -- dispatcher ----------------------------------------------------------------

def test_fit_dispatch():
    y = simulate_profiles(W12, 120, seed=51)
    sample = ProfileSample(interior=y, section=(100.0, 100.0))
    opts = FitOptions(restarts=1)
    methods = {
        "ml": "ML",
        "ml-censored": "ML_censored",
        "ml-weighted": "ML_weighted",
        "mom": "MoM",
        "mde": "MDE",
    }
    for key, label in methods.items():
        res = fit(sample, "weibull", method=key, options=opts)
        assert res.method == label
    with pytest.raises(ParameterError):
        fit(sample, "weibull", method="bayes")
