"""Regular exponential families in mean-value parameterization.

A family member anchored at the mean vector ``mu_star`` has density

    p_{beta; mu_star}(u) = exp(beta . t(u) - logZ(beta; mu_star)) * p_{mu_star}(u)

with respect to the anchor member itself, so that logZ(0; mu_star) = 0 and
grad_beta logZ(0; mu_star) = mu_star.  All families here are regular and
steep: the gradient of the log-partition is a bijection between the open
canonical domain and the open mean domain, and its Jacobian (the sufficient
statistic covariance) is positive definite in the interior.

A descriptor bundles the callable handles (sufficient statistic, anchored
log-partition, carrier log-density) plus optional closed forms for the mean
map, covariance map and inverse mean map.  Operations fall back to damped
Newton inversion and central finite differences when a closed form is not
provided, so a family defined only through its log-partition still supports
the full API.

Numerical contracts:

* mean/canonical inversion converges when the mean residual satisfies
  ||mean(beta) - mu||_inf <= 1e-9 * (1 + ||mu||_inf);
* KL divergences between members are evaluated through the convex-duality
  identity D(P_mu || P_mu') = beta . mu - logZ(beta; mu') with
  beta = canonical_from_mean(mu; mu'), never by a separate formula;
* log-partitions return +inf outside the canonical domain instead of
  raising, so that domain boundaries can be probed safely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import DomainDescriptor
from .errors import ConvergenceError, DomainError, UnsupportedModelError
from .numdiff import fd_gradient, fd_hessian, fd_jacobian
from .util import as_batch

__all__ = [
    "SupportSpec",
    "ExpFamilyDescriptor",
    "ParamPoint",
    "log_partition_at",
    "mean_from_canonical",
    "canonical_from_mean",
    "covariance_at_canonical",
    "covariance_at_mean",
    "kl_between_means",
    "reparameterize",
    "log_density",
    "family_from_root_cumulant",
]

MEAN_TOL = 1e-9
NEWTON_MAX_ITER = 200
NEWTON_MAX_HALVINGS = 60


@dataclass(frozen=True)
class SupportSpec:
    """Shape of the sample space, used to pick expectation strategies.

    kind is one of:
      "finite"           -- finitely many elements, ``points()`` enumerates them;
      "countable-vector" -- product of copies of {0, 1, 2, ...};
      "real-scalar"      -- scalar observations on the real line;
      "positive-scalar"  -- scalar observations on (0, inf);
      "real-vector"      -- observations in R^axes.
    """

    kind: str
    axes: int = 1
    points: Callable[[], np.ndarray] | None = None


@dataclass(frozen=True)
class ExpFamilyDescriptor:
    """Callable bundle defining one anchored exponential family.

    ``suff_stat`` maps a batch of sample-space elements to an (m, dim)
    array.  ``log_partition(beta, anchor)`` and ``carrier_log_density(u,
    anchor)`` implement the anchored normalization above; the carrier at an
    anchor is the log-density of the member whose mean is that anchor.
    ``canonical_domain`` maps an anchor to the open set of valid tilts.

    The optional ``mean_map`` / ``cov_map`` / ``beta_map`` entries are
    closed forms for grad logZ, its Hessian and the inverse mean map;
    ``sampler(mean, n, rng)`` draws from the member with the given mean.
    ``stochastic`` marks families whose log-partition is a Monte Carlo
    estimate, which blocks hard certification downstream.
    """

    name: str
    dim: int
    suff_stat: Callable[[np.ndarray], np.ndarray]
    log_partition: Callable[[np.ndarray, np.ndarray], float]
    mean_domain: DomainDescriptor
    canonical_domain: Callable[[np.ndarray], DomainDescriptor]
    carrier_log_density: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    mean_map: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    cov_map: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    beta_map: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    sampler: Callable[[np.ndarray, int, np.random.Generator], np.ndarray] | None = None
    support: SupportSpec | None = None
    element_ndim: int = 0
    stochastic: bool = False

    def vec(self, x) -> np.ndarray:
        """Coerce a parameter to a float vector of the family dimension."""
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if arr.shape != (self.dim,):
            raise ValueError(f"{self.name}: parameter shape {arr.shape}, expected ({self.dim},)")
        return arr


@dataclass
class ParamPoint:
    """One family member: anchor plus canonical coordinate, mean on demand."""

    anchor: np.ndarray
    canonical: np.ndarray
    _mean: np.ndarray | None = field(default=None, repr=False)

    def mean_in(self, fam: ExpFamilyDescriptor) -> np.ndarray:
        if self._mean is None:
            self._mean = mean_from_canonical(fam, self.canonical, self.anchor)
        return self._mean


def _require_mean(fam: ExpFamilyDescriptor, mu: np.ndarray, label: str = "mean") -> np.ndarray:
    mu = fam.vec(mu)
    if not fam.mean_domain.contains(mu):
        raise DomainError(f"{fam.name}: {label} {mu} outside mean domain")
    return mu


def log_partition_at(fam: ExpFamilyDescriptor, beta, anchor) -> float:
    """Anchored log-partition; +inf outside the canonical domain."""
    beta = fam.vec(beta)
    anchor = _require_mean(fam, anchor, "anchor")
    if not fam.canonical_domain(anchor).contains(beta):
        return float("inf")
    val = float(fam.log_partition(beta, anchor))
    if np.isnan(val):
        raise ConvergenceError(f"{fam.name}: log-partition returned NaN at beta={beta}")
    return val


def mean_from_canonical(fam: ExpFamilyDescriptor, beta, anchor) -> np.ndarray:
    """Mean of the tilted member, i.e. grad_beta logZ(beta; anchor)."""
    beta = fam.vec(beta)
    anchor = _require_mean(fam, anchor, "anchor")
    if not fam.canonical_domain(anchor).contains(beta):
        raise DomainError(f"{fam.name}: beta {beta} outside canonical domain at anchor {anchor}")
    if fam.mean_map is not None:
        return np.asarray(fam.mean_map(beta, anchor), dtype=float)
    grad = fd_gradient(lambda b: log_partition_at(fam, b, anchor), beta)
    if not np.all(np.isfinite(grad)):
        raise DomainError(f"{fam.name}: finite-difference mean undefined at beta={beta} "
                          "(too close to the domain boundary)")
    return grad


def covariance_at_canonical(fam: ExpFamilyDescriptor, beta, anchor) -> np.ndarray:
    """Sufficient-statistic covariance of the tilted member (symmetric PD)."""
    beta = fam.vec(beta)
    anchor = _require_mean(fam, anchor, "anchor")
    if not fam.canonical_domain(anchor).contains(beta):
        raise DomainError(f"{fam.name}: beta {beta} outside canonical domain at anchor {anchor}")
    if fam.cov_map is not None:
        cov = np.asarray(fam.cov_map(beta, anchor), dtype=float)
    elif fam.mean_map is not None:
        cov = fd_jacobian(lambda b: mean_from_canonical(fam, b, anchor), beta)
    else:
        cov = fd_hessian(lambda b: log_partition_at(fam, b, anchor), beta)
    cov = np.atleast_2d(cov)
    return 0.5 * (cov + cov.T)


def covariance_at_mean(fam: ExpFamilyDescriptor, mu) -> np.ndarray:
    """Covariance of the member with mean ``mu`` (anchor it there, tilt zero)."""
    mu = _require_mean(fam, mu)
    return covariance_at_canonical(fam, np.zeros(fam.dim), mu)


def _newton_invert(fam: ExpFamilyDescriptor, mu: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    domain = fam.canonical_domain(anchor)
    beta = np.zeros(fam.dim)
    current = mean_from_canonical(fam, beta, anchor)
    tol = MEAN_TOL * (1.0 + float(np.max(np.abs(mu))))
    err = float(np.linalg.norm(current - mu))
    for _ in range(NEWTON_MAX_ITER):
        if float(np.max(np.abs(current - mu))) <= tol:
            return beta
        jac = covariance_at_canonical(fam, beta, anchor)
        try:
            step = np.linalg.solve(jac, current - mu)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"{fam.name}: singular covariance during inversion") from exc
        scale = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            cand = beta - scale * step
            if domain.contains(cand):
                cand_mean = mean_from_canonical(fam, cand, anchor)
                cand_err = float(np.linalg.norm(cand_mean - mu))
                if np.isfinite(cand_err) and cand_err < err:
                    beta, current, err = cand, cand_mean, cand_err
                    break
            scale *= 0.5
        else:
            raise ConvergenceError(f"{fam.name}: damped Newton stalled inverting mean {mu}")
    raise ConvergenceError(f"{fam.name}: mean inversion did not converge for {mu} "
                           f"(residual {err:.3e})")


def canonical_from_mean(fam: ExpFamilyDescriptor, mu, anchor) -> np.ndarray:
    """Canonical coordinate of the member with mean ``mu``, relative to ``anchor``."""
    mu = _require_mean(fam, mu)
    anchor = _require_mean(fam, anchor, "anchor")
    if fam.beta_map is not None:
        return np.asarray(fam.beta_map(mu, anchor), dtype=float)
    return _newton_invert(fam, mu, anchor)


def kl_between_means(fam: ExpFamilyDescriptor, mu, mu_prime) -> float:
    """D(P_mu || P_mu') via duality: beta . mu - logZ(beta; mu')."""
    mu = _require_mean(fam, mu)
    mu_prime = _require_mean(fam, mu_prime)
    beta = canonical_from_mean(fam, mu, mu_prime)
    logz = log_partition_at(fam, beta, mu_prime)
    if not np.isfinite(logz):
        raise ConvergenceError(f"{fam.name}: log-partition divergent inside the mean image")
    return float(beta @ mu - logz)


def reparameterize(fam: ExpFamilyDescriptor, beta, anchor_from, anchor_to) -> np.ndarray:
    """Express the member (beta; anchor_from) relative to anchor_to.

    Canonical coordinates relative to different anchors differ by the
    canonical coordinate of one anchor seen from the other, so the member is
    unchanged: log-densities agree pointwise.
    """
    beta = fam.vec(beta)
    shift = canonical_from_mean(fam, anchor_from, anchor_to)
    return beta + shift


def log_density(fam: ExpFamilyDescriptor, beta, anchor, u):
    """Log-density of the tilted member at sample point(s) ``u``.

    Accepts a single element or a batch with one leading axis; returns a
    float or an array accordingly.
    """
    if fam.carrier_log_density is None:
        raise UnsupportedModelError(f"{fam.name}: no density evaluation available")
    beta = fam.vec(beta)
    anchor = _require_mean(fam, anchor, "anchor")
    logz = log_partition_at(fam, beta, anchor)
    if not np.isfinite(logz):
        raise DomainError(f"{fam.name}: beta {beta} outside canonical domain at anchor {anchor}")
    batch, single = as_batch(u, fam.element_ndim)
    stats = np.asarray(fam.suff_stat(batch), dtype=float)
    vals = stats @ beta - logz + np.asarray(fam.carrier_log_density(batch, anchor), dtype=float)
    return float(vals[0]) if single else vals


def family_from_root_cumulant(
    name: str,
    dim: int,
    suff_stat: Callable[[np.ndarray], np.ndarray],
    root_anchor,
    root_cumulant: Callable[[np.ndarray], float],
    root_domain: DomainDescriptor,
    mean_domain: DomainDescriptor,
    root_carrier_log_density: Callable[[np.ndarray], np.ndarray] | None = None,
    root_mean: Callable[[np.ndarray], np.ndarray] | None = None,
    root_cov: Callable[[np.ndarray], np.ndarray] | None = None,
    root_beta: Callable[[np.ndarray], np.ndarray] | None = None,
    sampler: Callable[[np.ndarray, int, np.random.Generator], np.ndarray] | None = None,
    support: SupportSpec | None = None,
    element_ndim: int = 0,
    stochastic: bool = False,
) -> ExpFamilyDescriptor:
    """Build an anchored family from a single cumulant at one root anchor.

    ``root_cumulant`` is K(beta) = log E[exp(beta . X)] under the root
    member, so K(0) = 0 and K'(0) = root_anchor.  Re-anchoring at a mean mu
    shifts by gamma(mu), the root coordinate solving K'(gamma) = mu:

        logZ(beta; mu) = K(beta + gamma(mu)) - K(gamma(mu)),
        carrier(u; mu) = gamma(mu) . t(u) - K(gamma(mu)) + root carrier(u).

    gamma is found by the closed form when given, otherwise by Newton
    inversion of K'; solved anchors are cached, so grid sweeps that revisit
    anchors do not repeat the solve.
    """
    root_anchor = np.atleast_1d(np.asarray(root_anchor, dtype=float))

    def eval_cumulant(beta: np.ndarray) -> float:
        if not root_domain.contains(beta):
            return float("inf")
        return float(root_cumulant(beta))

    def eval_root_mean(beta: np.ndarray) -> np.ndarray:
        if root_mean is not None:
            return np.asarray(root_mean(beta), dtype=float)
        return fd_gradient(eval_cumulant, beta)

    def eval_root_cov(beta: np.ndarray) -> np.ndarray:
        if root_cov is not None:
            return np.atleast_2d(np.asarray(root_cov(beta), dtype=float))
        if root_mean is not None:
            return np.atleast_2d(fd_jacobian(eval_root_mean, beta))
        return np.atleast_2d(fd_hessian(eval_cumulant, beta))

    gamma_cache: dict[bytes, np.ndarray] = {}

    def gamma_of(anchor: np.ndarray) -> np.ndarray:
        key = anchor.tobytes()
        hit = gamma_cache.get(key)
        if hit is not None:
            return hit
        if root_beta is not None:
            gamma = np.asarray(root_beta(anchor), dtype=float)
        else:
            gamma = _solve_root_gamma(anchor)
        gamma_cache[key] = gamma
        return gamma

    def _solve_root_gamma(target: np.ndarray) -> np.ndarray:
        beta = np.zeros(dim)
        current = eval_root_mean(beta)
        tol = MEAN_TOL * (1.0 + float(np.max(np.abs(target))))
        err = float(np.linalg.norm(current - target))
        for _ in range(NEWTON_MAX_ITER):
            if float(np.max(np.abs(current - target))) <= tol:
                return beta
            try:
                step = np.linalg.solve(eval_root_cov(beta), current - target)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(f"{name}: singular curvature during re-anchoring") from exc
            scale = 1.0
            for _ in range(NEWTON_MAX_HALVINGS):
                cand = beta - scale * step
                if root_domain.contains(cand):
                    cand_mean = eval_root_mean(cand)
                    cand_err = float(np.linalg.norm(cand_mean - target))
                    if np.isfinite(cand_err) and cand_err < err:
                        beta, current, err = cand, cand_mean, cand_err
                        break
                scale *= 0.5
            else:
                raise ConvergenceError(f"{name}: re-anchoring stalled at target mean {target}")
        raise ConvergenceError(f"{name}: re-anchoring did not converge for mean {target}")

    def log_partition(beta: np.ndarray, anchor: np.ndarray) -> float:
        gamma = gamma_of(anchor)
        return eval_cumulant(beta + gamma) - eval_cumulant(gamma)

    def canonical_domain(anchor: np.ndarray) -> DomainDescriptor:
        return root_domain.shifted(-gamma_of(anchor))

    carrier = None
    if root_carrier_log_density is not None:
        def carrier(u: np.ndarray, anchor: np.ndarray) -> np.ndarray:
            gamma = gamma_of(anchor)
            stats = np.asarray(suff_stat(u), dtype=float)
            return stats @ gamma - eval_cumulant(gamma) + np.asarray(root_carrier_log_density(u), dtype=float)

    def mean_map(beta: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        return eval_root_mean(beta + gamma_of(anchor))

    def cov_map(beta: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        return eval_root_cov(beta + gamma_of(anchor))

    beta_map = None
    if root_beta is not None:
        def beta_map(mu: np.ndarray, anchor: np.ndarray) -> np.ndarray:
            return np.asarray(root_beta(mu), dtype=float) - gamma_of(anchor)

    return ExpFamilyDescriptor(
        name=name,
        dim=dim,
        suff_stat=suff_stat,
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
        stochastic=stochastic,
    )
