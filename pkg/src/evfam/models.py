"""Worked model catalog: null families and alternative pairings.

Scalar natural exponential families are built from their variance function
V on the mean domain through two potentials,

    Phi(m)  = int dm / V(m)      (canonical coordinate of the mean-m member),
    Psi(m)  = int m dm / V(m)    (log-partition along the mean path),

so that beta(m; m') = Phi(m) - Phi(m'), logZ(beta; m') = Psi(m) - Psi(m')
with m = Phi^{-1}(beta + Phi(m')), and D(P_m || P_m') follows from duality.
Every closed form in the catalog (Poisson, gamma, negative binomial, the
ABM class V(m) = m (1 + m/s)^r, Tweedie powers V(m) = a m^g with g >= 1,
inverse Gaussian) is an instance of this one mechanism, which keeps the
algebra in a single place.

Pairings bundle a null family with a tilted alternative family anchored at
the alternative's sufficient-statistic mean.  The simple e-value of a
pairing at anchor mu is q_mu(u) / p_mu(u), the density ratio of the two
members sharing that mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit, gammaln, logit, xlog1py, xlogy

from .domains import DomainDescriptor, box_domain, full_space, positive_orthant
from .errors import DomainError, UnsupportedModelError
from .families import ExpFamilyDescriptor, SupportSpec, family_from_root_cumulant
from .tilt import CarrierAlternative, TiltedFamily, build_tilted_family

__all__ = [
    "NefDescriptor",
    "Pairing",
    "make_family",
    "poisson_family",
    "gamma_family",
    "negbinom_family",
    "abm_family",
    "tweedie_family",
    "inverse_gaussian_family",
    "gaussian_location_family",
    "gaussian_scale_family",
    "ksample_null_family",
    "ksample_pairing",
    "gaussian_location_pairing",
    "gaussian_location_constrained",
    "gaussian_scale_pairing",
    "nef_pairing",
    "negbinom_vs_poisson",
    "abm_vs_poisson",
    "tweedie_pair",
    "ig_vs_exp_pairing",
    "ig_divergence_threshold",
    "ig_regime",
]


# ---------------------------------------------------------------------------
# density building blocks (vectorized, used as family carriers)

def _pois_logpmf(y, mean):
    y = np.asarray(y, dtype=float)
    return xlogy(y, mean) - mean - gammaln(y + 1.0)


def _bern_logpmf(y, p):
    y = np.asarray(y, dtype=float)
    return xlogy(y, p) + xlog1py(1.0 - y, -p)


def _norm_logpdf(y, mean, var):
    y = np.asarray(y, dtype=float)
    return -0.5 * ((y - mean) ** 2 / var + np.log(2.0 * np.pi * var))


def _gamma_logpdf(y, shape, mean):
    y = np.asarray(y, dtype=float)
    scale = mean / shape
    return xlogy(shape - 1.0, y) - y / scale - gammaln(shape) - shape * np.log(scale)


def _negbinom_logpmf(y, n, mean):
    y = np.asarray(y, dtype=float)
    q = mean / (n + mean)
    return gammaln(y + n) - gammaln(n) - gammaln(y + 1.0) + n * np.log1p(-q) + xlogy(y, q)


def _invgauss_logpdf(y, mean, lam):
    y = np.asarray(y, dtype=float)
    return 0.5 * (np.log(lam) - np.log(2.0 * np.pi) - 3.0 * np.log(y)) \
        - lam * (y - mean) ** 2 / (2.0 * mean ** 2 * y)


def _scalar_stat(u: np.ndarray) -> np.ndarray:
    return np.asarray(u, dtype=float).reshape(-1, 1)


def _sum_stat(u: np.ndarray) -> np.ndarray:
    return np.asarray(u, dtype=float).sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# scalar NEFs from variance-function potentials

def _nef_from_potentials(
    name: str,
    variance: Callable[[float], float],
    phi: Callable[[float], float],
    psi: Callable[[float], float],
    phi_sup: float,
    mean_domain: DomainDescriptor,
    phi_inv: Callable[[float], float] | None = None,
    suff_stat: Callable | None = None,
    carrier: Callable | None = None,
    sampler: Callable | None = None,
    support: SupportSpec | None = None,
    element_ndim: int = 0,
    log_partition_closed: Callable[[float, float], float] | None = None,
) -> ExpFamilyDescriptor:
    """One-dimensional family from its mean-domain potentials.

    ``phi_sup`` is the supremum of Phi over the mean domain; the canonical
    domain at anchor m' is the open interval (-inf, phi_sup - Phi(m')),
    reflecting that Phi(0+) = -inf for every catalog variance function.
    When ``phi_inv`` is missing the mean map inverts Phi by bracketed root
    finding (Phi is strictly increasing, slope 1/V).  A direct
    ``log_partition_closed(beta, anchor_mean)`` bypasses the potential
    composition where that composition cancels badly near a mean boundary.
    """
    lo, hi = float(mean_domain.lower[0]), float(mean_domain.upper[0])

    def invert(x: float) -> float:
        if phi_inv is not None:
            return float(phi_inv(x))
        low = lo + 1e-12 * max(1.0, abs(lo)) if np.isfinite(lo) else -1.0
        if np.isfinite(lo):
            width = (hi - lo) if np.isfinite(hi) else 1.0
            low = lo + 1e-14 * width
            while phi(low) > x:
                low = lo + (low - lo) * 1e-3
        high = hi - 1e-14 * (hi - lo) if np.isfinite(hi) else max(2.0 * abs(low), 1.0)
        if not np.isfinite(hi):
            while phi(high) < x:
                high *= 4.0
                if not np.isfinite(high):
                    raise OverflowError(f"{name}: mean beyond float range")
        return float(brentq(lambda t: phi(t) - x, low, high,
                            xtol=1e-300, rtol=8.9e-16, maxiter=1000))

    def log_partition(beta: np.ndarray, anchor: np.ndarray) -> float:
        x = float(beta[0]) + phi(float(anchor[0]))
        if x >= phi_sup:
            return float("inf")
        if log_partition_closed is not None:
            return log_partition_closed(float(beta[0]), float(anchor[0]))
        try:
            with np.errstate(over="ignore"):
                return psi(invert(x)) - psi(float(anchor[0]))
        except (OverflowError, ValueError):
            # inside the domain but past the float range (or the inverted mean
            # rounds onto the boundary); inf is the honest value
            return float("inf")

    def mean_map(beta: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        x = float(beta[0]) + phi(float(anchor[0]))
        if x >= phi_sup:
            raise DomainError(f"{name}: canonical point at or beyond the domain boundary")
        try:
            return np.array([invert(x)])
        except OverflowError as exc:
            raise DomainError(str(exc)) from None

    def cov_map(beta: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        m = mean_map(beta, anchor)[0]
        return np.array([[variance(m)]])

    def beta_map(mu: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        return np.array([phi(float(mu[0])) - phi(float(anchor[0]))])

    def canonical_domain(anchor: np.ndarray) -> DomainDescriptor:
        upper = phi_sup - phi(float(anchor[0]))
        return box_domain([-np.inf], [upper])

    return ExpFamilyDescriptor(
        name=name,
        dim=1,
        suff_stat=suff_stat if suff_stat is not None else _scalar_stat,
        log_partition=log_partition,
        mean_domain=mean_domain,
        canonical_domain=canonical_domain,
        carrier_log_density=carrier,
        mean_map=mean_map,
        cov_map=cov_map,
        beta_map=beta_map,
        sampler=sampler,
        support=support,
        element_ndim=element_ndim,
    )


def poisson_family() -> ExpFamilyDescriptor:
    """Poisson counts; V(m) = m, logZ(beta; m') = m' (e^beta - 1)."""
    return _nef_from_potentials(
        "poisson",
        variance=lambda m: m,
        phi=math.log,
        phi_inv=math.exp,
        psi=lambda m: m,
        phi_sup=float("inf"),
        mean_domain=positive_orthant(1),
        carrier=lambda u, anchor: _pois_logpmf(u, anchor[0]),
        sampler=lambda mean, n, rng: rng.poisson(mean[0], n).astype(float),
        support=SupportSpec("countable-vector", axes=1),
    )


def gamma_family(shape: float) -> ExpFamilyDescriptor:
    """Gamma with fixed shape; V(m) = m^2 / shape.  shape = 1 is exponential."""
    if shape <= 0:
        raise UnsupportedModelError("gamma family needs shape > 0")
    return _nef_from_potentials(
        f"gamma(shape={shape:g})",
        variance=lambda m: m * m / shape,
        phi=lambda m: -shape / m,
        phi_inv=lambda x: -shape / x,
        psi=lambda m: shape * math.log(m),
        phi_sup=0.0,
        mean_domain=positive_orthant(1),
        carrier=lambda u, anchor: _gamma_logpdf(u, shape, anchor[0]),
        sampler=lambda mean, n, rng: rng.gamma(shape, mean[0] / shape, n),
        support=SupportSpec("positive-scalar"),
    )


def negbinom_family(successes: float) -> ExpFamilyDescriptor:
    """Negative binomial with fixed success count; V(m) = m + m^2 / successes."""
    if successes <= 0:
        raise UnsupportedModelError("negative binomial family needs successes > 0")
    n = float(successes)
    return _nef_from_potentials(
        f"negbinom(n={n:g})",
        variance=lambda m: m * (1.0 + m / n),
        phi=lambda m: math.log(m / (n + m)),
        phi_inv=lambda x: n * math.exp(x) / (1.0 - math.exp(x)),
        psi=lambda m: n * math.log(n + m),
        phi_sup=0.0,
        mean_domain=positive_orthant(1),
        carrier=lambda u, anchor: _negbinom_logpmf(u, n, anchor[0]),
        sampler=lambda mean, n_draws, rng: rng.negative_binomial(n, n / (n + mean[0]), n_draws).astype(float),
        support=SupportSpec("countable-vector", axes=1),
    )


def abm_family(s: float, r: int) -> ExpFamilyDescriptor:
    """The class V(m) = m (1 + m/s)^r for integer r >= 0.

    r = 0 is Poisson and r = 1 the negative binomial with successes s; those
    instances keep their densities and samplers.  For r >= 2 the family is
    density-free here: canonical maps, log-partitions and divergences all
    come from the potentials, which is what the condition battery needs.

    Partial fractions give 1/V(t) = 1/t - sum_{k=1}^r s^{k-1} / (s+t)^k and
    t/V(t) = s^r / (s+t)^r, from which Phi and Psi below follow by direct
    integration.
    """
    if s <= 0:
        raise UnsupportedModelError("abm family needs s > 0")
    if r < 0 or int(r) != r:
        raise UnsupportedModelError("abm family needs integer r >= 0")
    r = int(r)
    if r == 0:
        return poisson_family()

    def phi(t: float) -> float:
        val = math.log(t) - math.log(s + t)
        for k in range(2, r + 1):
            val += s ** (k - 1) / ((k - 1) * (s + t) ** (k - 1))
        return val

    def psi(t: float) -> float:
        if r == 1:
            return s * math.log(s + t)
        return -s ** r / ((r - 1) * (s + t) ** (r - 1))

    phi_inv = (lambda x: s * math.exp(x) / (1.0 - math.exp(x))) if r == 1 else None

    carrier = sampler = support = None
    if r == 1:
        carrier = lambda u, anchor: _negbinom_logpmf(u, s, anchor[0])
        sampler = lambda mean, n_draws, rng: rng.negative_binomial(s, s / (s + mean[0]), n_draws).astype(float)
        support = SupportSpec("countable-vector", axes=1)

    return _nef_from_potentials(
        f"abm(s={s:g},r={r})",
        variance=lambda m: m * (1.0 + m / s) ** r,
        phi=phi,
        phi_inv=phi_inv,
        psi=psi,
        phi_sup=0.0,
        mean_domain=positive_orthant(1),
        carrier=carrier,
        sampler=sampler,
        support=support,
    )


def tweedie_family(a: float, power: float) -> ExpFamilyDescriptor:
    """Power variance V(m) = a m^power on (0, inf), power >= 1 only.

    power in [0, 1) is rejected because no exponential families have such
    variance functions, and power < 0 because those families are not
    regular.  Densities attach only where the instance is a familiar
    family: power 1 with a = 1 (Poisson), power 2 (gamma with shape 1/a),
    power 3 (inverse Gaussian with lam = 1/a); other instances support the
    canonical maps and divergences but no density evaluation.
    """
    if a <= 0:
        raise UnsupportedModelError("tweedie family needs a > 0")
    if power < 0:
        raise UnsupportedModelError(
            "tweedie variance power < 0: family is not regular, outside scope")
    if power < 1:
        raise UnsupportedModelError(
            "tweedie variance power in [0, 1): no exponential families of this form")
    if power == 1 and a == 1.0:
        return poisson_family()
    if power == 2:
        return gamma_family(1.0 / a)
    if power == 3:
        return inverse_gaussian_family(1.0 / a)

    if power == 1:
        phi = lambda m: math.log(m) / a
        phi_inv = lambda x: math.exp(a * x)
        phi_sup = float("inf")
    else:
        phi = lambda m: m ** (1.0 - power) / (a * (1.0 - power))
        phi_inv = lambda x: ((1.0 - power) * a * x) ** (1.0 / (1.0 - power))
        phi_sup = 0.0
    psi = (lambda m: math.log(m) / a) if power == 2 else (lambda m: m ** (2.0 - power) / (a * (2.0 - power)))

    return _nef_from_potentials(
        f"tweedie(a={a:g},power={power:g})",
        variance=lambda m: a * m ** power,
        phi=phi,
        phi_inv=phi_inv,
        psi=psi,
        phi_sup=phi_sup,
        mean_domain=positive_orthant(1),
    )


def inverse_gaussian_family(lam: float) -> ExpFamilyDescriptor:
    """Inverse Gaussian with fixed shape lam; V(m) = m^3 / lam."""
    if lam <= 0:
        raise UnsupportedModelError("inverse Gaussian family needs lam > 0")
    return _nef_from_potentials(
        f"invgauss(lam={lam:g})",
        variance=lambda m: m ** 3 / lam,
        phi=lambda m: -lam / (2.0 * m * m),
        phi_inv=lambda x: math.sqrt(-lam / (2.0 * x)),
        psi=lambda m: -lam / m,
        phi_sup=0.0,
        mean_domain=positive_orthant(1),
        carrier=lambda u, anchor: _invgauss_logpdf(u, anchor[0], lam),
        sampler=lambda mean, n, rng: rng.wald(mean[0], lam, n),
        support=SupportSpec("positive-scalar"),
    )


# ---------------------------------------------------------------------------
# Gaussian families

def gaussian_location_family(cov) -> ExpFamilyDescriptor:
    """Multivariate normal with known covariance, mean as the parameter."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = cov.shape[0]
    if cov.shape != (d, d) or not np.allclose(cov, cov.T):
        raise UnsupportedModelError("location family needs a symmetric covariance")
    chol = np.linalg.cholesky(cov)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))

    def carrier(u: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        resid = np.linalg.solve(chol, (np.asarray(u, dtype=float) - anchor).T)
        return -0.5 * (np.sum(resid ** 2, axis=0) + d * np.log(2.0 * np.pi) + logdet)

    def sampler(mean: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
        return mean + rng.standard_normal((n, d)) @ chol.T

    return ExpFamilyDescriptor(
        name=f"gaussian-location(d={d})",
        dim=d,
        suff_stat=lambda u: np.asarray(u, dtype=float).reshape(-1, d),
        log_partition=lambda beta, anchor: float(beta @ anchor + 0.5 * beta @ cov @ beta),
        mean_domain=full_space(d),
        canonical_domain=lambda anchor: full_space(d),
        carrier_log_density=carrier,
        mean_map=lambda beta, anchor: anchor + cov @ beta,
        cov_map=lambda beta, anchor: cov,
        beta_map=lambda mu, anchor: np.linalg.solve(cov, mu - anchor),
        sampler=sampler,
        support=SupportSpec("real-vector", axes=d),
        element_ndim=1,
    )


def gaussian_scale_family() -> ExpFamilyDescriptor:
    """Centered normals parameterized by variance; statistic t(u) = u^2.

    As a family in the mean of u^2 this has V(m) = 2 m^2, so the potentials
    are Phi(m) = -1/(2m), Psi(m) = log(m)/2, giving the familiar
    logZ(beta; v) = -log(1 - 2 beta v)/2 on beta < 1/(2v).
    """
    return _nef_from_potentials(
        "gaussian-scale",
        variance=lambda m: 2.0 * m * m,
        phi=lambda m: -0.5 / m,
        phi_inv=lambda x: -0.5 / x,
        psi=lambda m: 0.5 * math.log(m),
        phi_sup=0.0,
        mean_domain=positive_orthant(1),
        suff_stat=lambda u: np.asarray(u, dtype=float).reshape(-1, 1) ** 2,
        carrier=lambda u, anchor: _norm_logpdf(u, 0.0, anchor[0]),
        sampler=lambda mean, n, rng: rng.normal(0.0, math.sqrt(mean[0]), n),
        support=SupportSpec("real-scalar"),
    )


# ---------------------------------------------------------------------------
# k-sample null families (iid arms, statistic = sum of arms)

def ksample_null_family(kind: str, k: int, sigma2: float = 1.0) -> ExpFamilyDescriptor:
    """Null for a k-sample comparison: k iid arms, mean of the arm total.

    The member with total mean m has arm mean m/k; the variance function of
    the total follows from the arm law (m for Poisson arms, m (1 - m/k) for
    Bernoulli, k sigma2 constant for Gaussian).
    """
    if k < 2:
        raise UnsupportedModelError("k-sample families need k >= 2")
    if kind == "poisson":
        return _nef_from_potentials(
            f"poisson-{k}sample",
            variance=lambda m: m,
            phi=math.log,
            phi_inv=math.exp,
            psi=lambda m: m,
            phi_sup=float("inf"),
            mean_domain=positive_orthant(1),
            suff_stat=_sum_stat,
            carrier=lambda u, anchor: _pois_logpmf(u, anchor[0] / k).sum(axis=1),
            sampler=lambda mean, n, rng: rng.poisson(mean[0] / k, (n, k)).astype(float),
            support=SupportSpec("countable-vector", axes=k),
            element_ndim=1,
        )
    if kind == "bernoulli":
        def points() -> np.ndarray:
            grid = np.indices((2,) * k).reshape(k, -1).T
            return grid.astype(float)
        return _nef_from_potentials(
            f"bernoulli-{k}sample",
            variance=lambda m: m * (1.0 - m / k),
            phi=lambda m: math.log(m) - math.log(k - m),
            phi_inv=lambda x: k * expit(x),
            psi=lambda m: -k * math.log(k - m),
            phi_sup=float("inf"),
            mean_domain=box_domain([0.0], [float(k)]),
            suff_stat=_sum_stat,
            carrier=lambda u, anchor: _bern_logpmf(u, anchor[0] / k).sum(axis=1),
            sampler=lambda mean, n, rng: (rng.random((n, k)) < mean[0] / k).astype(float),
            support=SupportSpec("finite", axes=k, points=points),
            element_ndim=1,
            # the potential route cancels in k - m near the upper boundary
            log_partition_closed=lambda beta, m: k * math.log1p(m / k * math.expm1(beta)),
        )
    if kind == "gaussian":
        if sigma2 <= 0:
            raise UnsupportedModelError("gaussian k-sample needs sigma2 > 0")
        return _nef_from_potentials(
            f"gaussian-{k}sample",
            variance=lambda m: k * sigma2,
            phi=lambda m: m / (k * sigma2),
            phi_inv=lambda x: k * sigma2 * x,
            psi=lambda m: m * m / (2.0 * k * sigma2),
            phi_sup=float("inf"),
            mean_domain=full_space(1),
            suff_stat=_sum_stat,
            carrier=lambda u, anchor: _norm_logpdf(u, anchor[0] / k, sigma2).sum(axis=1),
            sampler=lambda mean, n, rng: rng.normal(mean[0] / k, math.sqrt(sigma2), (n, k)),
            support=SupportSpec("real-vector", axes=k),
            element_ndim=1,
        )
    raise UnsupportedModelError(f"unknown k-sample kind {kind!r}")


# ---------------------------------------------------------------------------
# pairings

@dataclass(frozen=True)
class Pairing:
    """A null family with a tilted alternative anchored at the same mean."""

    name: str
    null: ExpFamilyDescriptor
    tilted: TiltedFamily
    params: dict
    notes: dict = field(default_factory=dict)


def _validate_arm_means(kind: str, alt_means: np.ndarray) -> None:
    if kind == "bernoulli":
        if np.any(alt_means <= 0.0) or np.any(alt_means >= 1.0):
            raise DomainError("bernoulli arm means must lie in (0, 1)")
    elif kind == "poisson":
        if np.any(alt_means <= 0.0):
            raise DomainError("poisson arm means must be positive")


def ksample_pairing(kind: str, alt_means, sigma2: float = 1.0) -> Pairing:
    """Product alternative with unequal arm means against the iid null.

    The simple e-value at the shared total mean is the classic k-sample
    ratio prod_i p_{m_i}(u_i) / p_{mbar}(u_i) with mbar the arm average.
    Tilting the product alternative by the total moves Poisson arms
    proportionally, Gaussian arms by a common shift, and Bernoulli arms
    along coupled logistic curves.
    """
    alt_means = np.asarray(alt_means, dtype=float)
    k = alt_means.size
    null = ksample_null_family(kind, k, sigma2=sigma2)
    _validate_arm_means(kind, alt_means)
    mu_star = float(alt_means.sum())

    if kind == "poisson":
        ratios = alt_means / mu_star
        family = _nef_from_potentials(
            f"poisson-{k}sample-alt",
            variance=lambda m: m,
            phi=math.log,
            phi_inv=math.exp,
            psi=lambda m: m,
            phi_sup=float("inf"),
            mean_domain=positive_orthant(1),
            suff_stat=_sum_stat,
            carrier=lambda u, anchor: _pois_logpmf(u, ratios * anchor[0]).sum(axis=1),
            sampler=lambda mean, n, rng: rng.poisson(ratios * mean[0], (n, k)).astype(float),
            support=SupportSpec("countable-vector", axes=k),
            element_ndim=1,
        )
        mgf_log = lambda beta: mu_star * math.expm1(beta[0])
    elif kind == "gaussian":
        offsets = alt_means - mu_star / k
        family = _nef_from_potentials(
            f"gaussian-{k}sample-alt",
            variance=lambda m: k * sigma2,
            phi=lambda m: m / (k * sigma2),
            phi_inv=lambda x: k * sigma2 * x,
            psi=lambda m: m * m / (2.0 * k * sigma2),
            phi_sup=float("inf"),
            mean_domain=full_space(1),
            suff_stat=_sum_stat,
            carrier=lambda u, anchor: _norm_logpdf(u, offsets + anchor[0] / k, sigma2).sum(axis=1),
            sampler=lambda mean, n, rng: rng.normal(offsets + mean[0] / k, math.sqrt(sigma2), (n, k)),
            support=SupportSpec("real-vector", axes=k),
            element_ndim=1,
        )
        mgf_log = lambda beta: mu_star * beta[0] + 0.5 * k * sigma2 * beta[0] ** 2
    elif kind == "bernoulli":
        logits = np.asarray(logit(alt_means), dtype=float)

        def arm_means_at(gamma: float) -> np.ndarray:
            return expit(logits + gamma)

        def root_gamma(mu: np.ndarray) -> np.ndarray:
            target = float(mu[0])
            f = lambda g: float(arm_means_at(g).sum()) - target
            lo, hi = -1.0, 1.0
            while f(lo) > 0.0:
                lo *= 2.0
            while f(hi) < 0.0:
                hi *= 2.0
            return np.array([brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16)])

        def root_cumulant(beta: np.ndarray) -> float:
            return float(np.sum(np.log1p(alt_means * np.expm1(beta[0]))))

        def root_mean(beta: np.ndarray) -> np.ndarray:
            return np.array([float(arm_means_at(beta[0]).sum())])

        def root_cov(beta: np.ndarray) -> np.ndarray:
            w = arm_means_at(beta[0])
            return np.array([[float(np.sum(w * (1.0 - w)))]])

        def root_carrier(u: np.ndarray) -> np.ndarray:
            return _bern_logpmf(u, alt_means).sum(axis=1)

        def sampler(mean: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
            w = arm_means_at(float(root_gamma(mean)[0]))
            return (rng.random((n, k)) < w).astype(float)

        def points() -> np.ndarray:
            return np.indices((2,) * k).reshape(k, -1).T.astype(float)

        family = family_from_root_cumulant(
            f"bernoulli-{k}sample-alt",
            dim=1,
            suff_stat=_sum_stat,
            root_anchor=[mu_star],
            root_cumulant=root_cumulant,
            root_domain=full_space(1),
            mean_domain=box_domain([0.0], [float(k)]),
            root_carrier_log_density=root_carrier,
            root_mean=root_mean,
            root_cov=root_cov,
            root_beta=root_gamma,
            sampler=sampler,
            support=SupportSpec("finite", axes=k, points=points),
            element_ndim=1,
        )
        mgf_log = root_cumulant
    else:
        raise UnsupportedModelError(f"unknown k-sample kind {kind!r}")

    carrier = CarrierAlternative(
        name=f"{kind}-product({', '.join(f'{m:g}' for m in alt_means)})",
        log_density=lambda u: np.asarray(family.carrier_log_density(u, family.vec(mu_star)), dtype=float),
        mean_of_suff_stat=np.array([mu_star]),
        mgf_log=mgf_log,
        sampler=lambda n, rng: family.sampler(family.vec(mu_star), n, rng),
        known_family=family,
    )
    tilted = build_tilted_family(null, carrier)
    return Pairing(
        name=f"ksample-{kind}",
        null=null,
        tilted=tilted,
        params={"kind": kind, "k": k, "alt_means": alt_means.tolist(), "sigma2": sigma2},
    )


def gaussian_location_pairing(cov_null, cov_alt, alt_mean) -> Pairing:
    """Gaussian mean testing with distinct known covariances.

    The tilted alternative family is the location family with the
    alternative covariance, so the covariance-ordering condition reduces to
    cov_null - cov_alt being positive semidefinite, independently of the
    mean point.
    """
    null = gaussian_location_family(cov_null)
    family = gaussian_location_family(cov_alt)
    alt_mean = family.vec(alt_mean)
    cov_alt = np.atleast_2d(np.asarray(cov_alt, dtype=float))
    carrier = CarrierAlternative(
        name=f"gaussian({np.array2string(alt_mean, precision=3)})",
        log_density=lambda u: np.asarray(family.carrier_log_density(u, alt_mean), dtype=float),
        mean_of_suff_stat=alt_mean,
        mgf_log=lambda beta: float(beta @ alt_mean + 0.5 * beta @ cov_alt @ beta),
        sampler=lambda n, rng: family.sampler(alt_mean, n, rng),
        known_family=family,
    )
    tilted = build_tilted_family(null, carrier)
    return Pairing(
        name="gaussian-location",
        null=null,
        tilted=tilted,
        params={"cov_null": np.atleast_2d(cov_null).tolist(),
                "cov_alt": cov_alt.tolist(), "alt_mean": alt_mean.tolist()},
    )


def gaussian_location_constrained(cov, d0: int, alt_mean) -> Pairing:
    """Gaussian location null with the first d0 mean coordinates pinned to zero.

    Projecting onto the sufficient statistic T = (Sigma^{-1} U)_{free}, both
    the constrained null and the alternative family are location families
    with the same covariance (Sigma^{-1})_{free,free}, so the covariance
    difference vanishes identically: the simple e-value exists and, when the
    alternative also has zero constrained block, equals one.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = cov.shape[0]
    if not 0 < d0 < d:
        raise UnsupportedModelError("constrained location pairing needs 0 < d0 < dim")
    alt_mean = np.asarray(alt_mean, dtype=float).reshape(d)
    free = slice(d0, d)
    prec = np.linalg.inv(cov)
    a_rows = prec[free, :]
    stat_cov = prec[free, free]
    chol = np.linalg.cholesky(cov)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    dprime = d - d0
    embed = np.zeros((d, dprime))
    embed[free, :] = np.eye(dprime)

    def mvn_logpdf(u: np.ndarray, mean: np.ndarray) -> np.ndarray:
        resid = np.linalg.solve(chol, (np.asarray(u, dtype=float) - mean).T)
        return -0.5 * (np.sum(resid ** 2, axis=0) + d * np.log(2.0 * np.pi) + logdet)

    def location_family(u_mean_of: Callable[[np.ndarray], np.ndarray], tag: str) -> ExpFamilyDescriptor:
        def carrier(u: np.ndarray, anchor: np.ndarray) -> np.ndarray:
            return mvn_logpdf(u, u_mean_of(anchor))

        def sampler(mean: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
            return u_mean_of(mean) + rng.standard_normal((n, d)) @ chol.T

        return ExpFamilyDescriptor(
            name=f"gaussian-constrained-{tag}(d={d},d0={d0})",
            dim=dprime,
            suff_stat=lambda u: np.asarray(u, dtype=float).reshape(-1, d) @ a_rows.T,
            log_partition=lambda beta, anchor: float(beta @ anchor + 0.5 * beta @ stat_cov @ beta),
            mean_domain=full_space(dprime),
            canonical_domain=lambda anchor: full_space(dprime),
            carrier_log_density=carrier,
            mean_map=lambda beta, anchor: anchor + stat_cov @ beta,
            cov_map=lambda beta, anchor: stat_cov,
            beta_map=lambda mu, anchor: np.linalg.solve(stat_cov, mu - anchor),
            sampler=sampler,
            support=SupportSpec("real-vector", axes=d),
            element_ndim=1,
        )

    # null members have U-mean (0, nu) with T-mean C nu; alternative members
    # shift alt_mean inside the free coordinates only (Sigma A^T = embedding).
    null = location_family(lambda t_mean: embed @ np.linalg.solve(stat_cov, t_mean), "null")
    mu_star = a_rows @ alt_mean
    family = location_family(lambda t_mean: alt_mean + embed @ np.linalg.solve(stat_cov, t_mean - mu_star), "alt")

    carrier = CarrierAlternative(
        name="gaussian-constrained-alt",
        log_density=lambda u: mvn_logpdf(u, alt_mean),
        mean_of_suff_stat=mu_star,
        mgf_log=lambda beta: float(beta @ mu_star + 0.5 * beta @ stat_cov @ beta),
        sampler=lambda n, rng: family.sampler(mu_star, n, rng),
        known_family=family,
    )
    tilted = build_tilted_family(null, carrier)
    return Pairing(
        name="gaussian-location-constrained",
        null=null,
        tilted=tilted,
        params={"cov": cov.tolist(), "d0": d0, "alt_mean": alt_mean.tolist()},
        notes={"alt_in_null": bool(np.allclose(alt_mean[:d0], 0.0))},
    )


def gaussian_scale_pairing(m: float, s2: float) -> Pairing:
    """Normal alternative N(m, s2) against the centered-normal scale null.

    The tilted family consists of normals N(c m / (c - beta), 1/(2(c - beta)))
    with c = 1/(2 s2); its second-moment mean and variance have the closed
    forms coded below, and the inverse mean map solves a quadratic in
    t = c - beta.  The anchor mean is s2 + m^2 and the member at that anchor
    is the alternative itself.
    """
    if s2 <= 0:
        raise UnsupportedModelError("gaussian scale pairing needs s2 > 0")
    null = gaussian_scale_family()
    c = 0.5 / s2
    cm2 = c * c * m * m
    mu_star = s2 + m * m

    def member_params(t: float) -> tuple[float, float]:
        return c * m / t, 0.5 / t

    def root_cumulant(beta: np.ndarray) -> float:
        t = c - float(beta[0])
        return -0.5 * math.log(2.0 * s2 * t) + m * m * float(beta[0]) / (2.0 * s2 * t)

    def root_mean(beta: np.ndarray) -> np.ndarray:
        t = c - float(beta[0])
        return np.array([(2.0 * cm2 + t) / (2.0 * t * t)])

    def root_cov(beta: np.ndarray) -> np.ndarray:
        t = c - float(beta[0])
        return np.array([[(4.0 * cm2 + t) / (2.0 * t ** 3)]])

    def root_beta(mu: np.ndarray) -> np.ndarray:
        target = float(mu[0])
        t = (1.0 + math.sqrt(1.0 + 16.0 * target * cm2)) / (4.0 * target)
        return np.array([c - t])

    def root_carrier(u: np.ndarray) -> np.ndarray:
        return _norm_logpdf(u, m, s2)

    def sampler(mean: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
        loc, var = member_params(c - float(root_beta(mean)[0]))
        return rng.normal(loc, math.sqrt(var), n)

    family = family_from_root_cumulant(
        f"gaussian-scale-alt(m={m:g},s2={s2:g})",
        dim=1,
        suff_stat=lambda u: np.asarray(u, dtype=float).reshape(-1, 1) ** 2,
        root_anchor=[mu_star],
        root_cumulant=root_cumulant,
        root_domain=box_domain([-np.inf], [c]),
        mean_domain=positive_orthant(1),
        root_carrier_log_density=root_carrier,
        root_mean=root_mean,
        root_cov=root_cov,
        root_beta=root_beta,
        sampler=sampler,
        support=SupportSpec("real-scalar"),
    )
    carrier = CarrierAlternative(
        name=f"normal(m={m:g},s2={s2:g})",
        log_density=root_carrier,
        mean_of_suff_stat=np.array([mu_star]),
        mgf_log=root_cumulant,
        mgf_domain=box_domain([-np.inf], [c]),
        sampler=lambda n, rng: rng.normal(m, math.sqrt(s2), n),
        known_family=family,
    )
    tilted = build_tilted_family(null, carrier)
    return Pairing(
        name="gaussian-scale",
        null=null,
        tilted=tilted,
        params={"m": m, "s2": s2},
        notes={"tilt_member_params": member_params},
    )


def nef_pairing(null: ExpFamilyDescriptor, alt: ExpFamilyDescriptor, mu_star: float,
                name: str, params: dict, notes: dict | None = None) -> Pairing:
    """Pair two scalar NEFs on the same observation space at a shared anchor mean."""
    anchor = alt.vec(mu_star)
    log_density = None
    if alt.carrier_log_density is not None:
        log_density = lambda u: np.asarray(alt.carrier_log_density(u, anchor), dtype=float)
    sampler = None
    if alt.sampler is not None:
        sampler = lambda n, rng: alt.sampler(anchor, n, rng)
    carrier = CarrierAlternative(
        name=f"{alt.name}@{mu_star:g}",
        log_density=log_density,
        mean_of_suff_stat=anchor,
        mgf_log=lambda beta: alt.log_partition(beta, anchor),
        sampler=sampler,
        known_family=alt,
    )
    tilted = build_tilted_family(null, carrier)
    return Pairing(name=name, null=null, tilted=tilted, params=params, notes=notes or {})


def negbinom_vs_poisson(successes: float, mu_star: float) -> Pairing:
    """Negative binomial null against a Poisson alternative at mean mu_star."""
    return nef_pairing(
        negbinom_family(successes), poisson_family(), mu_star,
        name="negbinom-vs-poisson",
        params={"successes": successes, "mu": mu_star},
    )


def abm_vs_poisson(s: float, r: int, mu_star: float) -> Pairing:
    """ABM null V(m) = m (1 + m/s)^r against a Poisson alternative."""
    return nef_pairing(
        abm_family(s, r), poisson_family(), mu_star,
        name="abm-vs-poisson",
        params={"s": s, "r": r, "mu": mu_star},
    )


def tweedie_pair(null_ag: tuple[float, float], alt_ag: tuple[float, float], mu_star: float = 1.0) -> Pairing:
    """Two Tweedie power families at a shared anchor mean.

    The variance ordering a_p m^{g_p} >= a_q m^{g_q} holds on all of
    (0, inf) only when the powers coincide; otherwise the two variance
    curves cross and the battery refutes on any grid wide enough to
    straddle the crossing.
    """
    ap, gp = null_ag
    aq, gq = alt_ag
    if gp != gq:
        order = "crosses"
    else:
        order = "dominates" if ap >= aq else "dominated"
    return nef_pairing(
        tweedie_family(ap, gp), tweedie_family(aq, gq), mu_star,
        name="tweedie-pair",
        params={"null": [ap, gp], "alt": [aq, gq], "mu": mu_star},
        notes={"variance_order": order},
    )


def ig_divergence_threshold(lam: float, mu: float) -> float:
    """Null mean above which E_{P_mu'}[q_mu / p_mu] is infinite; inf if never."""
    rate = 1.0 / mu - lam / (2.0 * mu * mu)
    if rate <= 0.0:
        return float("inf")
    return 1.0 / rate


def ig_regime(lam: float, mu: float) -> str:
    if mu > lam:
        return "not-local"
    if 2.0 * mu > lam:
        return "local-not-global"
    return "local-all-finite"


def ig_vs_exp_pairing(lam: float, mu: float) -> Pairing:
    """Inverse Gaussian alternative against the exponential null.

    Three regimes in the anchor mean mu: for mu <= lam/2 every null
    expectation of the simple e-value is finite; for lam/2 < mu <= lam the
    local covariance ordering still holds but expectations diverge beyond
    the threshold null mean 1 / (1/mu - lam/(2 mu^2)); for mu > lam even the
    local check fails.
    """
    if lam <= 0 or mu <= 0:
        raise UnsupportedModelError("inverse-Gaussian-vs-exponential needs lam > 0 and mu > 0")
    return nef_pairing(
        gamma_family(1.0), inverse_gaussian_family(lam), mu,
        name="ig-vs-exp",
        params={"lam": lam, "mu": mu},
        notes={
            "regime": ig_regime(lam, mu),
            "divergence_threshold": ig_divergence_threshold(lam, mu),
        },
    )


# ---------------------------------------------------------------------------
# descriptor-driven construction

@dataclass(frozen=True)
class NefDescriptor:
    """Named catalog family plus its parameters, for config-driven use."""

    kind: str
    params: dict = field(default_factory=dict)


_FAMILY_BUILDERS: dict[str, Callable[..., ExpFamilyDescriptor]] = {
    "poisson": poisson_family,
    "gamma": gamma_family,
    "negbinom": negbinom_family,
    "abm": abm_family,
    "tweedie": tweedie_family,
    "inverse-gaussian": inverse_gaussian_family,
    "gaussian-location": gaussian_location_family,
    "gaussian-scale": gaussian_scale_family,
    "poisson-ksample": lambda k: ksample_null_family("poisson", k),
    "bernoulli-ksample": lambda k: ksample_null_family("bernoulli", k),
    "gaussian-ksample": lambda k, sigma2=1.0: ksample_null_family("gaussian", k, sigma2),
}


def make_family(descriptor: NefDescriptor) -> ExpFamilyDescriptor:
    """Instantiate a catalog family from its descriptor."""
    builder = _FAMILY_BUILDERS.get(descriptor.kind)
    if builder is None:
        known = ", ".join(sorted(_FAMILY_BUILDERS))
        raise UnsupportedModelError(f"unknown family kind {descriptor.kind!r} (known: {known})")
    return builder(**descriptor.params)
