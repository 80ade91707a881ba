"""Tilted-family construction routes and the log-partition gap."""

from __future__ import annotations

import numpy as np
import pytest

from evfam.errors import DomainError, UnsupportedModelError
from evfam.families import covariance_at_mean, log_partition_at, mean_from_canonical
from evfam.models import (
    gaussian_scale_family,
    gaussian_scale_pairing,
    ig_vs_exp_pairing,
    negbinom_vs_poisson,
    poisson_family,
)
from evfam.oracles import finite_diff_check
from evfam.tilt import (
    CarrierAlternative,
    build_tilted_family,
    f_gap,
    f_gap_info,
    f_gradient,
    local_evar_check,
)


def _normal_carrier(with_mgf: bool, with_mean: bool = True) -> CarrierAlternative:
    m, s2 = -3.0, 9.0
    c = 1.0 / (2.0 * s2)

    def mgf_log(beta):
        b = float(beta[0])
        if b >= c:
            return float("inf")
        t = c - b
        return -0.5 * np.log(2.0 * s2 * t) + m * m * b / (2.0 * s2 * t)

    return CarrierAlternative(
        name="normal(-3,9)",
        log_density=lambda u: -0.5 * ((np.asarray(u) - m) ** 2 / s2
                                      + np.log(2.0 * np.pi * s2)),
        mean_of_suff_stat=np.array([s2 + m * m]) if with_mean else None,
        mgf_log=mgf_log if with_mgf else None,
        sampler=lambda n, rng: rng.normal(m, np.sqrt(s2), n),
    )


def test_known_family_route_reuses_the_family():
    pair = negbinom_vs_poisson(4.0, 2.0)
    assert pair.tilted.family.name == "poisson"
    assert not pair.tilted.stochastic
    assert pair.tilted.mu_star[0] == 2.0


def test_mgf_route_matches_closed_forms():
    null = gaussian_scale_family()
    tilted = build_tilted_family(null, _normal_carrier(with_mgf=True))
    assert not tilted.family.stochastic
    assert tilted.mu_star[0] == pytest.approx(18.0)
    # member covariance at the anchor against the closed pairing formula
    c = 1.0 / 18.0
    t = c
    expected = (4.0 * c * c * 9.0 + t) / (2.0 * t ** 3)
    # the route differentiates the log-mgf numerically
    got = covariance_at_mean(tilted.family, np.array([18.0]))[0, 0]
    assert got == pytest.approx(expected, rel=1e-4)


def test_mgf_route_discovers_canonical_boundary():
    null = gaussian_scale_family()
    tilted = build_tilted_family(null, _normal_carrier(with_mgf=True))
    upper = tilted.family.canonical_domain(np.array([18.0])).upper[0]
    assert upper == pytest.approx(1.0 / 18.0, rel=1e-5)


def test_monte_carlo_route_is_flagged_and_close():
    null = gaussian_scale_family()
    tilted = build_tilted_family(null, _normal_carrier(with_mgf=False, with_mean=False),
                                 mc_samples=200_000, seed=1)
    assert tilted.stochastic and tilted.family.stochastic
    assert tilted.mu_star[0] == pytest.approx(18.0, rel=0.02)
    got = covariance_at_mean(tilted.family, tilted.mu_star)[0, 0]
    c = 1.0 / 18.0
    expected = (4.0 * c * c * 9.0 + c) / (2.0 * c ** 3)
    assert got == pytest.approx(expected, rel=0.05)


def test_monte_carlo_route_is_reproducible():
    null = gaussian_scale_family()
    carrier = _normal_carrier(with_mgf=False, with_mean=False)
    t1 = build_tilted_family(null, carrier, mc_samples=20_000, seed=9)
    t2 = build_tilted_family(null, carrier, mc_samples=20_000, seed=9)
    assert np.array_equal(t1.mu_star, t2.mu_star)


def test_route_requires_some_description():
    null = poisson_family()
    bare = CarrierAlternative(name="bare", log_density=lambda u: np.zeros_like(u),
                              mean_of_suff_stat=None, mgf_log=None, sampler=None)
    with pytest.raises(UnsupportedModelError):
        build_tilted_family(null, bare)


def test_gap_vanishes_at_zero_tilt():
    pair = gaussian_scale_pairing(-3.0, 9.0)
    anchor = pair.tilted.mu_star
    assert f_gap(pair.null, pair.tilted, np.zeros(1), anchor) == pytest.approx(0.0, abs=1e-12)
    grad = f_gradient(pair.null, pair.tilted, np.zeros(1), anchor)
    assert np.allclose(grad, 0.0, atol=1e-9)


def test_gap_gradient_matches_finite_difference():
    pair = gaussian_scale_pairing(-3.0, 9.0)
    anchor = pair.tilted.mu_star
    beta = np.array([0.01])
    grad = f_gradient(pair.null, pair.tilted, beta, anchor)
    check = finite_diff_check(
        lambda b: f_gap(pair.null, pair.tilted, b, anchor), beta, grad, kind="gradient")
    assert check.passed, check.rel_error


def test_gap_nonpositive_for_certified_pairing():
    pair = negbinom_vs_poisson(4.0, 2.0)
    anchor = np.array([2.0])
    upper = pair.null.canonical_domain(anchor).upper[0]
    for b in np.linspace(-8.0, upper * 0.999, 40):
        assert f_gap(pair.null, pair.tilted, np.array([b]), anchor) <= 1e-10


def test_gap_info_tags_the_out_of_domain_side():
    pair = ig_vs_exp_pairing(2.0, 1.5)
    anchor = np.array([1.5])
    # null (exponential) boundary 1/mu; tilted (inverse Gaussian) lam/(2 mu^2)
    gap, which = f_gap_info(pair.null, pair.tilted, np.array([0.6]), anchor)
    assert which == "tilted" and gap == np.inf
    gap, which = f_gap_info(pair.null, pair.tilted, np.array([0.9]), anchor)
    assert which == "both"


def test_local_check_pass_and_fail_regimes():
    ok = ig_vs_exp_pairing(2.0, 0.8)
    rep = local_evar_check(ok.null, ok.tilted)
    assert rep.passed and rep.min_eigenvalue >= rep.threshold

    bad = ig_vs_exp_pairing(2.0, 2.5)
    rep = local_evar_check(bad.null, bad.tilted)
    assert not rep.passed


def test_local_check_rejects_anchor_outside_null():
    pair = negbinom_vs_poisson(4.0, 2.0)
    with pytest.raises(DomainError):
        local_evar_check(pair.null, pair.tilted, mu=np.array([-1.0]))


def test_known_family_route_validates_mean_membership():
    null = poisson_family()
    # carrier whose stated family cannot place a member at the required mean
    bad = CarrierAlternative(
        name="bad-mean", log_density=lambda u: np.zeros_like(u),
        mean_of_suff_stat=np.array([-2.0]), mgf_log=None, sampler=None,
        known_family=poisson_family())
    with pytest.raises(DomainError):
        build_tilted_family(null, bad)
