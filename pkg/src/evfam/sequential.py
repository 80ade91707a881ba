"""Anytime-valid sequential testing built on per-round density ratios.

An e-process multiplies one nonnegative unit-mean factor per round, so its
running product can be compared against 1/alpha at any data-dependent
stopping time without inflating the type-I error.  The two-sample
Bernoulli process here picks its per-round alternative by plugging in
posterior means from earlier rounds only, which keeps every factor a valid
e-value for the equal-means null.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, xlogy

from .errors import DataError

__all__ = [
    "EProcessState",
    "eprocess_update",
    "mixture_log_evalue",
    "round_log_evalue",
    "BetaPluginEProcess",
    "SimulationResult",
    "simulate_two_sample",
]

LOG_FLOOR = -745.0


@dataclass(frozen=True)
class EProcessState:
    """Running log e-process value with its round count and running maximum."""

    log_value: float = 0.0
    rounds: int = 0
    max_log_value: float = 0.0


def eprocess_update(state: EProcessState, log_factor: float) -> EProcessState:
    """Multiply one more e-factor in, flooring the log to avoid -inf."""
    log_value = max(state.log_value + float(log_factor), LOG_FLOOR)
    return EProcessState(
        log_value=log_value,
        rounds=state.rounds + 1,
        max_log_value=max(state.max_log_value, log_value),
    )


def mixture_log_evalue(log_values) -> float:
    """Log of the arithmetic mixture of e-values given on the log scale."""
    arr = np.asarray(log_values, dtype=float)
    if arr.size == 0:
        raise DataError("mixture needs at least one component")
    return float(logsumexp(arr) - np.log(arr.size))


def round_log_evalue(m1: float, m2: float, x1, x2):
    """Log density ratio for one two-sample Bernoulli round.

    The alternative is the product Bernoulli(m1) x Bernoulli(m2); the null
    member shares its mean, so both arms use the average (m1 + m2) / 2.
    """
    m_bar = 0.5 * (m1 + m2)
    if not (0.0 < m1 < 1.0 and 0.0 < m2 < 1.0):
        raise DataError("plug-in means must lie strictly inside (0, 1)")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    out = (x1 * np.log(m1 / m_bar) + (1.0 - x1) * np.log((1.0 - m1) / (1.0 - m_bar))
           + x2 * np.log(m2 / m_bar) + (1.0 - x2) * np.log((1.0 - m2) / (1.0 - m_bar)))
    return out if out.shape else float(out)


class BetaPluginEProcess:
    """Two-sample Bernoulli e-process with Beta posterior-mean plug-ins.

    Each arm keeps a Beta(a, b) posterior over its success rate; the
    alternative for round t uses the posterior means from rounds before t.
    """

    def __init__(self, prior=(1.0, 1.0, 1.0, 1.0), alpha: float = 0.05):
        a1, b1, a2, b2 = (float(v) for v in prior)
        if min(a1, b1, a2, b2) <= 0.0:
            raise DataError("Beta prior parameters must be positive")
        if not 0.0 < alpha < 1.0:
            raise DataError("alpha must lie strictly inside (0, 1)")
        self._counts = [a1, b1, a2, b2]
        self.alpha = alpha
        self.state = EProcessState()

    def plugin_means(self) -> tuple[float, float]:
        a1, b1, a2, b2 = self._counts
        return a1 / (a1 + b1), a2 / (a2 + b2)

    def update(self, x1: int, x2: int) -> float:
        """Process one round of paired observations; returns the log factor."""
        if x1 not in (0, 1) or x2 not in (0, 1):
            raise DataError("observations must be 0 or 1")
        m1, m2 = self.plugin_means()
        log_factor = round_log_evalue(m1, m2, x1, x2)
        self.state = eprocess_update(self.state, log_factor)
        self._counts[0] += x1
        self._counts[1] += 1 - x1
        self._counts[2] += x2
        self._counts[3] += 1 - x2
        return log_factor

    @property
    def log_value(self) -> float:
        return self.state.log_value

    @property
    def crossed(self) -> bool:
        return self.state.max_log_value >= np.log(1.0 / self.alpha)


@dataclass(frozen=True)
class SimulationResult:
    """Aggregates over simulated e-process paths."""

    ever_crossed_fraction: float
    first_crossing: np.ndarray
    final_log_values: np.ndarray
    mean_log_growth: float
    tail_log_growth: float
    tail_window: int
    rounds: int
    n_paths: int
    alpha: float
    arm_means: tuple[float, float]
    seed: int


def _path_outcomes(arm_means, rounds: int, path_indices, seed: int):
    m1, m2 = arm_means
    x1 = np.empty((len(path_indices), rounds))
    x2 = np.empty((len(path_indices), rounds))
    for row, path in enumerate(path_indices):
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, path], dtype=np.uint64)))
        u = rng.random((rounds, 2))
        x1[row] = u[:, 0] < m1
        x2[row] = u[:, 1] < m2
    return x1, x2


def simulate_two_sample(arm_means, rounds: int = 500, n_paths: int = 1000,
                        alpha: float = 0.05, seed: int = 0,
                        prior=(1.0, 1.0, 1.0, 1.0), tail_window: int = 100,
                        block_size: int = 2000) -> SimulationResult:
    """Simulate the Beta plug-in e-process over independent outcome paths.

    Each path draws from its own counter-based stream keyed by (seed, path
    index), so results are reproducible regardless of blocking.  The tail
    growth rate averages the per-round log increments over the final
    ``tail_window`` rounds, after the plug-in means have settled.
    """
    m1, m2 = (float(v) for v in arm_means)
    if not (0.0 < m1 < 1.0 and 0.0 < m2 < 1.0):
        raise DataError("arm means must lie strictly inside (0, 1)")
    if tail_window <= 0 or tail_window > rounds:
        raise DataError("tail window must lie in 1..rounds")
    a1, b1, a2, b2 = (float(v) for v in prior)
    threshold = np.log(1.0 / alpha)
    t = np.arange(rounds, dtype=float)

    crossed = np.zeros(n_paths, dtype=bool)
    first_crossing = np.full(n_paths, np.nan)
    final_log = np.empty(n_paths)
    tail_sums = np.empty(n_paths)

    for start in range(0, n_paths, block_size):
        paths = range(start, min(start + block_size, n_paths))
        x1, x2 = _path_outcomes((m1, m2), rounds, paths, seed)
        prior_wins1 = np.concatenate([np.zeros((len(paths), 1)), np.cumsum(x1, axis=1)[:, :-1]], axis=1)
        prior_wins2 = np.concatenate([np.zeros((len(paths), 1)), np.cumsum(x2, axis=1)[:, :-1]], axis=1)
        p1 = (a1 + prior_wins1) / (a1 + b1 + t)
        p2 = (a2 + prior_wins2) / (a2 + b2 + t)
        p_bar = 0.5 * (p1 + p2)
        log_inc = (xlogy(x1, p1 / p_bar) + xlogy(1.0 - x1, (1.0 - p1) / (1.0 - p_bar))
                   + xlogy(x2, p2 / p_bar) + xlogy(1.0 - x2, (1.0 - p2) / (1.0 - p_bar)))
        log_path = np.maximum(np.cumsum(log_inc, axis=1), LOG_FLOOR)
        over = log_path >= threshold
        block_crossed = over.any(axis=1)
        crossed[paths.start:paths.stop] = block_crossed
        hits = np.argmax(over, axis=1) + 1.0
        first_crossing[paths.start:paths.stop] = np.where(block_crossed, hits, np.nan)
        final_log[paths.start:paths.stop] = log_path[:, -1]
        before_tail = log_path[:, rounds - tail_window - 1] if tail_window < rounds else 0.0
        tail_sums[paths.start:paths.stop] = log_path[:, -1] - before_tail

    return SimulationResult(
        ever_crossed_fraction=float(crossed.mean()),
        first_crossing=first_crossing,
        final_log_values=final_log,
        mean_log_growth=float(final_log.mean() / rounds),
        tail_log_growth=float(tail_sums.mean() / tail_window),
        tail_window=tail_window,
        rounds=rounds,
        n_paths=n_paths,
        alpha=alpha,
        arm_means=(m1, m2),
        seed=seed,
    )
