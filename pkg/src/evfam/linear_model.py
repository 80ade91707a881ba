"""Testing one regression coefficient with unknown variance and nuisance slopes.

Observations are y in R^n from N(X gamma, sigma2 I) with a fixed design X
whose column 0 holds the tested covariate.  Writing theta = gamma_0 /
sigma2, the distributions with a common theta form a (d+1)-dimensional
exponential family in the statistic

    T(y) = (sum_i y_i^2, sum_i y_i x_{i1}, ..., sum_i y_i x_{id});

the tested coordinate is absorbed into the carrier exp(theta sum_i y_i
x_{i0}) and does not enter T.  The null is the theta = 0 slice.  All
theta-families share the mean space {mu : mu_0 > mu_f' G_ff^{-1} mu_f}
with G_ff the Gram matrix of the nuisance columns, which is convex (the
region above a positive quadratic).

Projecting an alternative member onto the null solves the least-squares
normal equations in the nuisance columns and inflates the variance by the
mean squared fitted-value gap; the likelihood ratio against that projection
is the simple e-value for the member.  The covariance difference between
same-mean null and alternative members has blocks

    dA = A* - A°,  dB = 2 (sigma*^2 - sigma°^2) Xf' nu*,
    dC = (sigma*^2 - sigma°^2) G_ff,

and its positive semidefiniteness is checked both by eigenvalues and by the
Schur complement of the dC block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import DomainDescriptor
from .errors import DataError, DomainError
from .families import ExpFamilyDescriptor, SupportSpec
from .models import Pairing
from .tilt import CarrierAlternative, TiltedFamily, build_tilted_family

__all__ = [
    "LinearModelDesign",
    "LinearModelParams",
    "LinModelPsdReport",
    "linmodel_family",
    "params_from_mean",
    "mean_of_params",
    "covariance_of_params",
    "project_onto_null",
    "linmodel_evalue",
    "linmodel_psd_check",
    "linmodel_pairing",
]


@dataclass(frozen=True)
class LinearModelDesign:
    """Fixed design matrix, column 0 = tested covariate, columns 1.. = nuisance."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if x.ndim != 2:
            raise DataError("design must be a 2-d array")
        n, p = x.shape
        if p < 1 or n < p:
            raise DataError(f"design needs n >= d+1 >= 1 columns, got shape {x.shape}")
        sv = np.linalg.svd(x, compute_uv=False)
        if sv[-1] <= max(n, p) * np.finfo(float).eps * sv[0]:
            raise DataError("design matrix is rank deficient")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1] - 1

    @property
    def nuisance(self) -> np.ndarray:
        return self.x[:, 1:]

    @property
    def gram_ff(self) -> np.ndarray:
        return self.nuisance.T @ self.nuisance

    @property
    def gram_f0(self) -> np.ndarray:
        return self.nuisance.T @ self.x[:, 0]


@dataclass(frozen=True)
class LinearModelParams:
    """One member: noise variance and full coefficient vector."""

    sigma2: float
    gamma: np.ndarray

    def __post_init__(self) -> None:
        if self.sigma2 <= 0:
            raise DomainError("sigma2 must be positive")
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))

    @property
    def theta(self) -> float:
        return float(self.gamma[0] / self.sigma2)


def _fitted(design: LinearModelDesign, params: LinearModelParams) -> np.ndarray:
    return design.x @ params.gamma


def mean_of_params(design: LinearModelDesign, params: LinearModelParams) -> np.ndarray:
    nu = _fitted(design, params)
    return np.concatenate([[design.n * params.sigma2 + nu @ nu], design.nuisance.T @ nu])


def covariance_of_params(design: LinearModelDesign, params: LinearModelParams) -> np.ndarray:
    """Covariance of T(Y) under the member, assembled from its blocks."""
    s2 = params.sigma2
    nu = _fitted(design, params)
    top = 2.0 * s2 * (2.0 * nu @ nu + design.n * s2)
    side = 2.0 * s2 * (design.nuisance.T @ nu)
    cov = np.empty((design.d + 1, design.d + 1))
    cov[0, 0] = top
    cov[0, 1:] = side
    cov[1:, 0] = side
    cov[1:, 1:] = s2 * design.gram_ff
    return cov


def _solve_ff(design: LinearModelDesign, rhs: np.ndarray) -> np.ndarray:
    if design.d == 0:
        return np.zeros(0)
    return np.linalg.solve(design.gram_ff, rhs)


def _nuisance_quadratic(design: LinearModelDesign, mu_f: np.ndarray) -> float:
    if design.d == 0:
        return 0.0
    return float(mu_f @ _solve_ff(design, mu_f))


def _mean_domain(design: LinearModelDesign) -> DomainDescriptor:
    def predicate(mu: np.ndarray) -> bool:
        return float(mu[0]) > _nuisance_quadratic(design, mu[1:])

    lower = np.full(design.d + 1, -np.inf)
    lower[0] = 0.0
    return DomainDescriptor("custom-predicate", design.d + 1, lower, None,
                            predicate=predicate, convex=True)


def params_from_mean(design: LinearModelDesign, theta: float, mu) -> LinearModelParams:
    """Invert the mean map within the family of a fixed theta.

    The nuisance normal equations make gamma affine in v = sigma2, so the
    first mean coordinate becomes a quadratic in v with a negative value at
    v = 0 whenever mu is in the mean space; its unique positive root is the
    member's variance.
    """
    mu = np.asarray(mu, dtype=float).reshape(design.d + 1)
    p = _solve_ff(design, mu[1:])
    q = _solve_ff(design, design.gram_f0) * theta
    gamma_a = np.concatenate([[0.0], p])
    gamma_b = np.concatenate([[theta], -q])
    fa = design.x @ gamma_a
    fb = design.x @ gamma_b
    a2 = float(fb @ fb)
    a1 = design.n + 2.0 * float(fa @ fb)
    a0 = float(fa @ fa) - float(mu[0])
    if a0 >= 0.0:
        raise DomainError(f"mean {mu} outside the linear-model mean space")
    if a2 <= 1e-14 * max(1.0, a1 * a1):
        v = -a0 / a1
    else:
        v = (-a1 + math.sqrt(a1 * a1 - 4.0 * a2 * a0)) / (2.0 * a2)
    return LinearModelParams(sigma2=v, gamma=gamma_a + v * gamma_b)


def _log_density(design: LinearModelDesign, params: LinearModelParams, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1, design.n)
    resid = y - _fitted(design, params)
    return -0.5 * (np.sum(resid ** 2, axis=1) / params.sigma2
                   + design.n * math.log(2.0 * math.pi * params.sigma2))


def project_onto_null(design: LinearModelDesign, params: LinearModelParams) -> LinearModelParams:
    """Closest null member: least-squares fit in the nuisance columns.

    The fitted values match on every nuisance column and the projected
    variance absorbs the squared fit gap, sigma*^2 = sigma^2 +
    ||nu - nu*||^2 / n, so the projection never shrinks the variance.
    """
    nu = _fitted(design, params)
    gamma_f = _solve_ff(design, design.nuisance.T @ nu)
    gamma_null = np.concatenate([[0.0], gamma_f])
    gap = nu - design.x @ gamma_null
    return LinearModelParams(sigma2=params.sigma2 + float(gap @ gap) / design.n, gamma=gamma_null)


def linmodel_evalue(design: LinearModelDesign, params: LinearModelParams, y) -> np.ndarray | float:
    """Simple e-value: member density over its null projection, at data y."""
    y_arr = np.asarray(y, dtype=float)
    single = y_arr.ndim == 1
    null_params = project_onto_null(design, params)
    vals = np.exp(_log_density(design, params, y_arr) - _log_density(design, null_params, y_arr))
    return float(vals[0]) if single else vals


def linmodel_family(design: LinearModelDesign, theta: float) -> ExpFamilyDescriptor:
    """The exponential family of N(X gamma, sigma2 I) laws with fixed theta."""
    n, d = design.n, design.d
    mean_domain = _mean_domain(design)
    param_cache: dict[bytes, LinearModelParams] = {}

    def params_at(mu: np.ndarray) -> LinearModelParams:
        key = mu.tobytes()
        hit = param_cache.get(key)
        if hit is None:
            hit = params_from_mean(design, theta, mu)
            param_cache[key] = hit
        return hit

    def natural_of(params: LinearModelParams) -> np.ndarray:
        return np.concatenate([[-0.5 / params.sigma2], params.gamma[1:] / params.sigma2])

    def params_of_natural(eta: np.ndarray) -> LinearModelParams:
        s2 = -0.5 / eta[0]
        return LinearModelParams(sigma2=s2, gamma=s2 * np.concatenate([[theta], eta[1:]]))

    def potential(params: LinearModelParams) -> float:
        nu = _fitted(design, params)
        return float(nu @ nu) / (2.0 * params.sigma2) + 0.5 * n * math.log(2.0 * math.pi * params.sigma2)

    def suff_stat(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(-1, n)
        return np.column_stack([np.sum(y ** 2, axis=1), y @ design.nuisance])

    def log_partition(beta: np.ndarray, anchor: np.ndarray) -> float:
        eta0 = natural_of(params_at(anchor))
        eta = eta0 + beta
        if eta[0] >= 0.0:
            return float("inf")
        return potential(params_of_natural(eta)) - potential(params_of_natural(eta0))

    def canonical_domain(anchor: np.ndarray) -> DomainDescriptor:
        lam0 = -0.5 / params_at(anchor).sigma2
        upper = np.full(d + 1, np.inf)
        upper[0] = -lam0
        return DomainDescriptor("half-space-product", d + 1, None, upper)

    def mean_map(beta: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        eta = natural_of(params_at(anchor)) + beta
        return mean_of_params(design, params_of_natural(eta))

    def cov_map(beta: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        eta = natural_of(params_at(anchor)) + beta
        return covariance_of_params(design, params_of_natural(eta))

    def beta_map(mu: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        return natural_of(params_at(mu)) - natural_of(params_at(anchor))

    def carrier(y: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        return _log_density(design, params_at(anchor), y)

    def sampler(mean: np.ndarray, n_draws: int, rng: np.random.Generator) -> np.ndarray:
        params = params_at(np.asarray(mean, dtype=float))
        return _fitted(design, params) + rng.standard_normal((n_draws, n)) * math.sqrt(params.sigma2)

    return ExpFamilyDescriptor(
        name=f"linmodel(n={n},d={d},theta={theta:g})",
        dim=d + 1,
        suff_stat=suff_stat,
        log_partition=log_partition,
        mean_domain=mean_domain,
        canonical_domain=canonical_domain,
        carrier_log_density=carrier,
        mean_map=mean_map,
        cov_map=cov_map,
        beta_map=beta_map,
        sampler=sampler,
        support=SupportSpec("real-vector", axes=n),
        element_ndim=1,
    )


@dataclass(frozen=True)
class LinModelPsdReport:
    """Covariance ordering at one mean point, with the Schur cross-check."""

    passed: bool
    mu: np.ndarray
    min_eigenvalue: float
    threshold: float
    schur_margin: float
    variance_gap: float
    null_params: LinearModelParams
    alt_params: LinearModelParams


def linmodel_psd_check(design: LinearModelDesign, theta: float, mu,
                       tol: float = 1e-9) -> LinModelPsdReport:
    """Compare same-mean null and theta-family covariances at ``mu``.

    Verifies the difference by its eigenvalues and independently by the
    Schur complement of its nuisance block; the two must agree in sign.
    """
    mu = np.asarray(mu, dtype=float).reshape(design.d + 1)
    null_params = params_from_mean(design, 0.0, mu)
    alt_params = params_from_mean(design, theta, mu)
    delta = covariance_of_params(design, null_params) - covariance_of_params(design, alt_params)
    gap = null_params.sigma2 - alt_params.sigma2
    eigs = np.linalg.eigvalsh(delta)
    scale = float(np.max(np.abs(np.linalg.eigvalsh(covariance_of_params(design, null_params)))))
    if design.d == 0 or abs(gap) * float(np.max(np.abs(design.gram_ff))) < 1e-300:
        schur = float(delta[0, 0])
    else:
        schur = float(delta[0, 0] - delta[1:, 0] @ np.linalg.solve(delta[1:, 1:], delta[1:, 0]))
    return LinModelPsdReport(
        passed=bool(eigs[0] >= -tol * scale),
        mu=mu,
        min_eigenvalue=float(eigs[0]),
        threshold=-tol * scale,
        schur_margin=schur,
        variance_gap=gap,
        null_params=null_params,
        alt_params=alt_params,
    )


def linmodel_pairing(design: LinearModelDesign, sigma2: float, gamma) -> Pairing:
    """Alternative member (sigma2, gamma) against the theta = 0 null family."""
    params = LinearModelParams(sigma2=sigma2, gamma=np.asarray(gamma, dtype=float).reshape(design.d + 1))
    theta = params.theta
    null = linmodel_family(design, 0.0)
    family = linmodel_family(design, theta)
    mu_star = mean_of_params(design, params)
    carrier = CarrierAlternative(
        name=f"linmodel-member(theta={theta:g})",
        log_density=lambda y: _log_density(design, params, y),
        mean_of_suff_stat=mu_star,
        sampler=lambda n_draws, rng: family.sampler(mu_star, n_draws, rng),
        known_family=family,
    )
    tilted: TiltedFamily = build_tilted_family(null, carrier)
    projection = project_onto_null(design, params)
    return Pairing(
        name="linmodel",
        null=null,
        tilted=tilted,
        params={"n": design.n, "d": design.d, "sigma2": sigma2,
                "gamma": params.gamma.tolist()},
        notes={"theta": theta, "projection": projection, "alt_params": params},
    )
