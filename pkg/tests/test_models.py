"""Catalog families and pairings against independent distributional oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.stats as st

from evfam.conditions import growth_rate, simple_evalue
from evfam.errors import DomainError, UnsupportedModelError
from evfam.families import (
    canonical_from_mean,
    covariance_at_mean,
    kl_between_means,
    log_partition_at,
    mean_from_canonical,
)
from evfam.models import (
    NefDescriptor,
    abm_family,
    abm_vs_poisson,
    gamma_family,
    gaussian_location_constrained,
    gaussian_location_pairing,
    gaussian_scale_family,
    gaussian_scale_pairing,
    ig_divergence_threshold,
    ig_regime,
    ig_vs_exp_pairing,
    inverse_gaussian_family,
    ksample_pairing,
    make_family,
    negbinom_family,
    negbinom_vs_poisson,
    poisson_family,
    tweedie_family,
    tweedie_pair,
)
from evfam.oracles import finite_diff_check, poisson_tail_bound


# ---------------------------------------------------------------------------
# densities against scipy.stats

POINTS = np.arange(0.0, 12.0)


def test_poisson_density_matches_scipy():
    fam = poisson_family()
    got = fam.carrier_log_density(POINTS, np.array([2.3]))
    assert np.allclose(got, st.poisson.logpmf(POINTS, 2.3), atol=1e-12)


def test_gamma_density_matches_scipy():
    fam = gamma_family(2.5)
    u = np.array([0.2, 1.0, 3.7, 9.0])
    got = fam.carrier_log_density(u, np.array([1.8]))
    want = st.gamma.logpdf(u, a=2.5, scale=1.8 / 2.5)
    assert np.allclose(got, want, atol=1e-12)


def test_negbinom_density_matches_scipy():
    fam = negbinom_family(4.0)
    m = 2.6
    got = fam.carrier_log_density(POINTS, np.array([m]))
    want = st.nbinom.logpmf(POINTS, 4.0, 4.0 / (4.0 + m))
    assert np.allclose(got, want, atol=1e-12)


def test_inverse_gaussian_density_matches_scipy():
    fam = inverse_gaussian_family(1.7)
    u = np.array([0.3, 0.9, 2.2, 5.0])
    m = 1.4
    got = fam.carrier_log_density(u, np.array([m]))
    want = st.invgauss.logpdf(u, mu=m / 1.7, scale=1.7)
    assert np.allclose(got, want, atol=1e-12)


def test_scale_family_density_is_centered_normal():
    fam = gaussian_scale_family()
    u = np.array([-2.0, -0.3, 0.0, 1.1, 4.0])
    got = fam.carrier_log_density(u, np.array([3.0]))
    assert np.allclose(got, st.norm.logpdf(u, scale=math.sqrt(3.0)), atol=1e-12)


def test_scale_family_stat_and_mean():
    fam = gaussian_scale_family()
    assert np.allclose(fam.suff_stat(np.array([-2.0, 3.0])).ravel(), [4.0, 9.0])
    assert mean_from_canonical(fam, np.zeros(1), np.array([3.0]))[0] == pytest.approx(3.0)
    assert covariance_at_mean(fam, np.array([3.0]))[0, 0] == pytest.approx(18.0)


# ---------------------------------------------------------------------------
# potentials against closed-form log-partitions

def test_poisson_log_partition_closed_form():
    fam = poisson_family()
    for beta in (-1.5, 0.0, 0.7):
        got = log_partition_at(fam, np.array([beta]), np.array([2.0]))
        assert got == pytest.approx(2.0 * math.expm1(beta), abs=1e-12)


def test_gamma_log_partition_closed_form():
    fam = gamma_family(3.0)
    m = 1.5
    for beta in (-2.0, 0.0, 1.2):
        got = log_partition_at(fam, np.array([beta]), np.array([m]))
        assert got == pytest.approx(-3.0 * math.log1p(-beta * m / 3.0), rel=1e-10)


def test_negbinom_log_partition_closed_form():
    n, m = 4.0, 2.0
    fam = negbinom_family(n)
    for beta in (-1.0, 0.0, 0.3):
        got = log_partition_at(fam, np.array([beta]), np.array([m]))
        want = -n * math.log1p(-(m / n) * math.expm1(beta))
        assert got == pytest.approx(want, rel=1e-10)


# ---------------------------------------------------------------------------
# abm class: endpoints collapse to the familiar cases

def test_abm_r0_is_poisson():
    assert abm_family(5.0, 0).name == "poisson"


def test_abm_r1_matches_negbinom():
    fam = abm_family(4.0, 1)
    ref = negbinom_family(4.0)
    anchor = np.array([2.0])
    for beta in (-1.0, -0.2, 0.1):
        b = np.array([beta])
        assert log_partition_at(fam, b, anchor) == pytest.approx(
            log_partition_at(ref, b, anchor), rel=1e-10)
    got = fam.carrier_log_density(POINTS, anchor)
    assert np.allclose(got, ref.carrier_log_density(POINTS, anchor), atol=1e-12)


def test_abm_r2_mean_map_consistent_with_variance():
    # d mu / d beta along the canonical line must equal V(mu)
    fam = abm_family(3.0, 2)
    anchor = np.array([2.0])
    beta = np.array([-0.04])
    mu = mean_from_canonical(fam, beta, anchor)
    cov = covariance_at_mean(fam, mu)[0, 0]
    assert cov == pytest.approx(mu[0] * (1.0 + mu[0] / 3.0) ** 2, rel=1e-8)
    check = finite_diff_check(
        lambda b: float(mean_from_canonical(fam, b, anchor)[0]),
        beta, np.array([cov]), kind="gradient", rel_tol=1e-6)
    assert check.passed, check.rel_error


def test_abm_round_trip_far_from_anchor():
    fam = abm_family(3.0, 2)
    anchor = np.array([2.0])
    for m in (0.05, 0.5, 7.0, 40.0):
        beta = canonical_from_mean(fam, np.array([m]), anchor)
        assert mean_from_canonical(fam, beta, anchor)[0] == pytest.approx(m, rel=1e-9)


def test_abm_validates_parameters():
    with pytest.raises(UnsupportedModelError):
        abm_family(-1.0, 1)
    with pytest.raises(UnsupportedModelError):
        abm_family(2.0, 1.5)
    with pytest.raises(UnsupportedModelError):
        abm_family(2.0, -1)


# ---------------------------------------------------------------------------
# tweedie class: delegation and exclusions

def test_tweedie_delegates_to_named_instances():
    assert tweedie_family(1.0, 1.0).name == "poisson"
    assert tweedie_family(0.5, 2.0).name == "gamma(shape=2)"
    assert tweedie_family(0.25, 3.0).name == "invgauss(lam=4)"


def test_tweedie_rejects_out_of_scope_powers():
    with pytest.raises(UnsupportedModelError):
        tweedie_family(1.0, 0.5)
    with pytest.raises(UnsupportedModelError):
        tweedie_family(1.0, -1.0)
    with pytest.raises(UnsupportedModelError):
        tweedie_family(-1.0, 2.0)


def test_tweedie_intermediate_power_round_trip():
    fam = tweedie_family(0.7, 1.5)
    anchor = np.array([1.3])
    for m in (0.2, 1.0, 6.0):
        beta = canonical_from_mean(fam, np.array([m]), anchor)
        assert mean_from_canonical(fam, beta, anchor)[0] == pytest.approx(m, rel=1e-9)
        assert covariance_at_mean(fam, np.array([m]))[0, 0] == pytest.approx(
            0.7 * m ** 1.5, rel=1e-8)


def test_tweedie_pair_orders_by_coefficient_only_when_powers_match():
    same = tweedie_pair((1.5, 1.4), (1.0, 1.4))
    assert same.null.name.startswith("tweedie") and same.tilted.family.name.startswith("tweedie")
    crossed = tweedie_pair((1.0, 1.2), (1.0, 1.8))
    assert crossed.notes.get("variance_order") == "crosses"
    assert same.notes.get("variance_order") == "dominates"


# ---------------------------------------------------------------------------
# two-sample and k-sample pairings

def test_bernoulli_two_sample_evalue_frozen():
    pair = ksample_pairing("bernoulli", (0.375, 0.625))
    val = simple_evalue(pair.tilted, pair.null, np.array([1.0]), np.array([0.0, 1.0]))
    assert val == pytest.approx(1.5625, abs=1e-12)


def test_bernoulli_two_sample_four_outcome_expectation():
    pair = ksample_pairing("bernoulli", (0.375, 0.625))
    outcomes = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    for mu in (0.1, 0.75, 1.0, 1.5, 1.9):
        p = mu / 2.0
        probs = np.prod(np.where(outcomes > 0.5, p, 1.0 - p), axis=1)
        vals = simple_evalue(pair.tilted, pair.null, np.array([mu]), outcomes)
        total = float(probs @ vals)
        assert total <= 1.0 + 1e-12
        if mu == 1.0:
            # expectation is exactly one at the anchor mean
            assert total == pytest.approx(1.0, abs=1e-12)


def test_poisson_two_sample_expectation_is_one_everywhere():
    pair = ksample_pairing("poisson", (0.5, 1.5))
    n = 60
    grid = np.arange(n, dtype=float)
    u1, u2 = np.meshgrid(grid, grid, indexing="ij")
    outcomes = np.column_stack([u1.ravel(), u2.ravel()])
    for mu in (0.4, 2.0, 6.0):
        lam = mu / 2.0
        probs = np.exp(st.poisson.logpmf(outcomes, lam).sum(axis=1))
        vals = simple_evalue(pair.tilted, pair.null, np.array([mu]), outcomes)
        total = float(probs @ vals)
        # the tilted product has arm rates mu * m_i / sum(m): certify the cutoff
        remainder = sum(poisson_tail_bound(mu * w, n) for w in (0.25, 0.75))
        assert abs(total - 1.0) <= remainder + 1e-10


def test_poisson_two_sample_growth_frozen():
    pair = ksample_pairing("poisson", (0.5, 1.5))
    got = growth_rate(pair.tilted, pair.null, np.array([2.0]))
    assert got == pytest.approx(0.26162407188227393, abs=1e-10)
    closed = sum(1.0 - m + m * math.log(m) for m in (0.5, 1.5))
    assert got == pytest.approx(closed, abs=1e-10)


def test_gaussian_ksample_growth_closed_form():
    # vector support goes through monte carlo: tolerance is the 3 sigma band
    means = np.array([0.2, 1.0, 1.8])
    pair = ksample_pairing("gaussian", means, sigma2=0.7)
    got = growth_rate(pair.tilted, pair.null, np.array([means.sum()]), n_mc=200_000)
    want = float(np.sum((means - means.mean()) ** 2) / (2.0 * 0.7))
    spread = math.sqrt(float(np.sum((means - means.mean()) ** 2)) / 0.7)
    assert got == pytest.approx(want, abs=3.5 * spread / math.sqrt(200_000))


def test_ksample_validates_arm_means():
    with pytest.raises(DomainError):
        ksample_pairing("bernoulli", (0.2, 1.3))
    with pytest.raises(DomainError):
        ksample_pairing("poisson", (-1.0, 2.0))
    with pytest.raises(UnsupportedModelError):
        ksample_pairing("cauchy", (0.1, 0.2))


def test_equal_arm_means_give_unit_evalue():
    pair = ksample_pairing("gaussian", (0.8, 0.8, 0.8))
    rng = np.random.default_rng(3)
    u = rng.normal(size=(20, 3))
    vals = simple_evalue(pair.tilted, pair.null, np.array([2.4]), u)
    assert np.allclose(vals, 1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# gaussian location pairings

def test_location_pairing_evalue_matches_density_ratio():
    cov_p = np.array([[2.0, 0.3], [0.3, 1.0]])
    cov_q = np.array([[1.0, 0.1], [0.1, 0.5]])
    pair = gaussian_location_pairing(cov_p, cov_q, [1.0, -0.5])
    rng = np.random.default_rng(0)
    u = rng.normal(size=(50, 2))
    mu = np.array([0.4, 0.2])
    got = simple_evalue(pair.tilted, pair.null, mu, u)
    want = np.exp(st.multivariate_normal(mu, cov_q).logpdf(u)
                  - st.multivariate_normal(mu, cov_p).logpdf(u))
    assert np.allclose(got, want, rtol=1e-10)


def test_location_growth_is_half_trace_term():
    # E_Q log(q/p) for same-mean gaussians: 0.5 (tr(Sp^-1 Sq) - d + log det Sp/det Sq)
    cov_p, cov_q = np.array([[2.0]]), np.array([[0.8]])
    pair = gaussian_location_pairing(cov_p, cov_q, [0.7])
    got = growth_rate(pair.tilted, pair.null, np.array([0.7]), n_mc=200_000)
    want = 0.5 * (0.8 / 2.0 - 1.0 + math.log(2.0 / 0.8))
    assert got == pytest.approx(want, abs=0.01)


def test_constrained_location_inside_null_is_trivial():
    cov = np.array([[1.0, 0.4, 0.0], [0.4, 2.0, 0.2], [0.0, 0.2, 1.5]])
    pair = gaussian_location_constrained(cov, 1, [0.0, 1.0, -2.0])
    assert pair.notes["alt_in_null"]
    rng = np.random.default_rng(5)
    u = rng.normal(size=(40, 3))
    vals = simple_evalue(pair.tilted, pair.null, pair.tilted.mu_star, u)
    assert np.allclose(vals, 1.0, atol=1e-10)


def test_constrained_location_outside_null_is_nontrivial():
    cov = np.array([[1.0, 0.4], [0.4, 2.0]])
    alt_mean = np.array([0.9, 1.0])
    pair = gaussian_location_constrained(cov, 1, alt_mean)
    assert not pair.notes["alt_in_null"]

    def log_s(u):
        return math.log(simple_evalue(pair.tilted, pair.null, pair.tilted.mu_star,
                                      np.asarray(u, dtype=float)))

    # log S is affine in u: recover the coefficients from four evaluations
    c0 = log_s([0.0, 0.0])
    a = np.array([log_s([1.0, 0.0]) - c0, log_s([0.0, 1.0]) - c0])
    assert log_s([1.0, 1.0]) == pytest.approx(c0 + a.sum(), abs=1e-10)

    # every null member has pinned coordinate mean zero, so E_P[S] = 1 exactly
    prec = np.linalg.inv(cov)
    stat_cov = prec[1:, 1:]
    for nu in (-2.0, 0.0, 3.0):
        u_mean = np.array([0.0, nu])
        log_e = float(a @ u_mean + 0.5 * a @ cov @ a + c0)
        assert log_e == pytest.approx(0.0, abs=1e-10)

    # growth at the anchor is the gaussian kl between matched members
    null_u_mean = np.array([0.0, float(np.linalg.solve(stat_cov, pair.tilted.mu_star)[0])])
    delta = alt_mean - null_u_mean
    want = 0.5 * float(delta @ prec @ delta)
    assert float(a @ alt_mean + c0) == pytest.approx(want, abs=1e-10)
    got = growth_rate(pair.tilted, pair.null, pair.tilted.mu_star, n_mc=100_000, seed=2)
    assert got == pytest.approx(want, abs=0.02)


def test_constrained_location_validates_block():
    cov = np.eye(2)
    with pytest.raises(UnsupportedModelError):
        gaussian_location_constrained(cov, 0, [0.0, 1.0])
    with pytest.raises(UnsupportedModelError):
        gaussian_location_constrained(cov, 2, [0.0, 1.0])


# ---------------------------------------------------------------------------
# gaussian scale pairing

def test_scale_pairing_member_moment_identity():
    # null variance at the tilted member's mean always dominates: 2 E^2 >= var
    pair = gaussian_scale_pairing(-3.0, 9.0)
    c = 1.0 / 18.0
    for beta in np.linspace(-4.0, c * 0.98, 50):
        t = c - beta
        e = (c * -3.0 / t) ** 2 + 1.0 / (2.0 * t)
        var = (t + 4.0 * c * c * 9.0) / (2.0 * t ** 3)
        assert 2.0 * e * e - var >= -1e-9 * max(1.0, var)
        mu = mean_from_canonical(pair.tilted.family, np.array([beta]), pair.tilted.mu_star)
        assert mu[0] == pytest.approx(e, rel=1e-9)
        assert covariance_at_mean(pair.tilted.family, mu)[0, 0] == pytest.approx(var, rel=1e-7)


def test_scale_pairing_centered_alternative_is_trivial():
    pair = gaussian_scale_pairing(0.0, 4.0)
    u = np.array([-3.0, 0.0, 2.5])
    vals = simple_evalue(pair.tilted, pair.null, np.array([4.0]), u)
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_scale_pairing_growth_matches_quadrature_kl():
    pair = gaussian_scale_pairing(-3.0, 9.0)
    got = growth_rate(pair.tilted, pair.null, np.array([18.0]))
    # KL( N(-3, 9) || N(0, 18) ) in closed form
    want = 0.5 * (math.log(18.0 / 9.0) + 9.0 / 18.0 + 9.0 / 18.0 - 1.0)
    assert got == pytest.approx(want, rel=1e-8)


# ---------------------------------------------------------------------------
# overdispersed counts vs poisson

def test_negbinom_vs_poisson_expectation_below_one():
    pair = negbinom_vs_poisson(4.0, 2.0)
    pts = np.arange(0.0, 200.0)
    for mu in (0.5, 2.0, 5.0):
        probs = np.exp(pair.null.carrier_log_density(pts, np.array([mu])))
        vals = simple_evalue(pair.tilted, pair.null, np.array([mu]), pts)
        total = float(probs @ vals)
        assert total <= 1.0 + 1e-10
    # strictly below one away from limiting cases
    assert total < 1.0


def test_abm_vs_poisson_names_both_sides():
    pair = abm_vs_poisson(3.0, 2, 1.5)
    assert pair.null.name == "abm(s=3,r=2)"
    assert pair.tilted.family.name == "poisson"
    assert pair.tilted.mu_star[0] == 1.5


# ---------------------------------------------------------------------------
# inverse gaussian alternative against the exponential null

def test_ig_thresholds_frozen():
    assert ig_divergence_threshold(2.0, 1.2) == pytest.approx(7.2, abs=1e-12)
    assert ig_divergence_threshold(2.0, 1.5) == pytest.approx(4.5, abs=1e-12)
    assert ig_divergence_threshold(2.0, 1.8) == pytest.approx(4.05, abs=1e-12)
    assert ig_divergence_threshold(2.0, 0.8) == math.inf


def test_ig_regimes():
    assert ig_regime(2.0, 0.8) == "local-all-finite"
    assert ig_regime(2.0, 1.5) == "local-not-global"
    assert ig_regime(2.0, 2.5) == "not-local"


def test_ig_pairing_carries_regime_notes():
    pair = ig_vs_exp_pairing(2.0, 1.5)
    assert pair.notes["regime"] == "local-not-global"
    assert pair.notes["divergence_threshold"] == pytest.approx(4.5)
    with pytest.raises(UnsupportedModelError):
        ig_vs_exp_pairing(-1.0, 1.0)


def test_ig_expectation_splits_at_threshold():
    # E_{P_mu'}[S] by quadrature: finite below 4.5, divergent above
    from evfam.oracles import expect_quadrature

    pair = ig_vs_exp_pairing(2.0, 1.5)
    mu = np.array([1.5])

    def make_density(mu_prime):
        def weighted(u):
            arr = np.asarray(u, dtype=float)
            log_p = np.asarray(pair.null.carrier_log_density(arr, np.array([mu_prime])))
            log_q = np.asarray(pair.tilted.family.carrier_log_density(arr, mu))
            log_p0 = np.asarray(pair.null.carrier_log_density(arr, mu))
            with np.errstate(over="ignore"):
                return np.exp(log_p + log_q - log_p0)
        return weighted

    below = expect_quadrature(make_density(4.0), lambda u: np.ones_like(u),
                              "positive-line", center=4.0, scale=4.0)
    assert not below.diverged and np.isfinite(below.value)
    # finite does not mean valid: the covariance ordering already failed here
    assert below.value > 1.0
    above = expect_quadrature(make_density(5.0), lambda u: np.ones_like(u),
                              "positive-line", center=5.0, scale=5.0)
    assert above.diverged


# ---------------------------------------------------------------------------
# registry

def test_make_family_registry():
    fam = make_family(NefDescriptor("negbinom", {"successes": 4.0}))
    assert fam.name == "negbinom(n=4)"
    fam = make_family(NefDescriptor("gaussian-ksample", {"k": 3, "sigma2": 2.0}))
    assert fam.dim == 1


def test_make_family_unknown_kind():
    with pytest.raises(UnsupportedModelError, match="unknown family kind"):
        make_family(NefDescriptor("zeta", {}))
