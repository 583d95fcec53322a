"""Seeded Brownian path sampling, the drifted-barrier survival set, hitting
times, and Monte Carlo probability estimation with a reflection-principle
oracle.

Determinism contract: every quantity here is a pure function of the seed and
the parameters.  Ensemble members draw from independent substreams keyed by
``(seed, path_index)``, so estimates are independent of evaluation order.
Refining ``dt`` under the same seed produces a *different* discrete path
(increments are drawn per grid interval, not via bridge refinement).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BrownianPath",
    "GoodSetParams",
    "GoodSetEstimate",
    "path_seed",
    "sample_path",
    "good_set_indicator",
    "hitting_time",
    "good_set_probability",
    "max_exp_noise",
    "survival_paper_bound",
    "survival_exact",
]


@dataclass(frozen=True)
class BrownianPath:
    """Discrete sample of a standard Brownian motion with W(0) = 0.

    The final grid interval may be shorter than the nominal step when the
    horizon is not an integer multiple of ``dt``; the increments are always
    exact Gaussians with variance equal to the interval length.
    """

    times: np.ndarray
    values: np.ndarray
    seed: object
    dt: float

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have matching shapes")
        if self.times[0] != 0.0 or self.values[0] != 0.0:
            raise ValueError("paths must start at W(0) = 0")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def value_at(self, t: float) -> float:
        """W at a grid time (linear interpolation between grid points)."""
        if t < 0.0 or t > self.horizon + 1e-12:
            raise ValueError(f"time {t} outside the path horizon {self.horizon}")
        return float(np.interp(t, self.times, self.values))


@dataclass(frozen=True)
class GoodSetParams:
    """Barrier parameters: survival means alpha + beta*t - nu*W(t) >= 0."""

    alpha: float
    beta: float
    nu: float

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0 or self.nu <= 0.0:
            raise ValueError("alpha, beta, nu must all be positive")


def path_seed(seed, index: int) -> np.random.SeedSequence:
    """Independent substream key for ensemble member ``index``."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def _time_grid(T: float, dt: float) -> np.ndarray:
    n_full = int(math.floor(T / dt + 1e-9))
    times = dt * np.arange(n_full + 1)
    if times[-1] < T - 1e-12 * max(T, 1.0):
        times = np.append(times, T)
    else:
        times[-1] = min(times[-1], T)
    return times


def sample_path(T: float, dt: float, seed) -> BrownianPath:
    """Sample W on the grid {0, dt, 2dt, ..., T} with exact N(0, h) increments."""
    if T <= 0.0 or dt <= 0.0:
        raise ValueError(f"horizon and step must be positive, got T={T}, dt={dt}")
    rng = np.random.default_rng(seed)
    times = _time_grid(T, dt)
    incr = rng.standard_normal(len(times) - 1) * np.sqrt(np.diff(times))
    values = np.concatenate([[0.0], np.cumsum(incr)])
    return BrownianPath(times=times, values=values, seed=seed, dt=dt)


def good_set_indicator(path: BrownianPath, p: GoodSetParams):
    """Grid-level survival check of alpha + beta*t - nu*W(t) >= 0.

    Returns ``(survived, first_violation_time)``; the time is None when the
    path survives.  Excursions between grid points are invisible to this
    check, which therefore over-estimates survival (quantified by the exact
    infinite-horizon value in :func:`good_set_probability`).
    """
    margin = p.alpha + p.beta * path.times - p.nu * path.values
    bad = np.nonzero(margin < 0.0)[0]
    if bad.size == 0:
        return True, None
    return False, float(path.times[bad[0]])


def hitting_time(path: BrownianPath, radius, nu: float):
    """First grid time with nu*W(t) > phi(t), or None within the horizon.

    ``radius`` is anything with a ``value(t)`` method (a radius schedule) or
    a plain callable t -> phi(t).
    """
    phi = radius.value if hasattr(radius, "value") else radius
    phis = np.asarray([phi(t) for t in path.times])
    if phis[0] <= 0.0:
        raise ValueError("radius must be positive at t = 0")
    bad = np.nonzero(nu * path.values > phis)[0]
    if bad.size == 0:
        return None
    return float(path.times[bad[0]])


def survival_paper_bound(p: GoodSetParams) -> float:
    """Lower bound 1 - exp(-alpha*beta/nu^2) for the survival probability."""
    return 1.0 - math.exp(-p.alpha * p.beta / p.nu ** 2)


def survival_exact(p: GoodSetParams) -> float:
    """Exact infinite-horizon survival probability 1 - exp(-2*alpha*beta/nu^2).

    The running maximum of nu*W(t) - beta*t is exponentially distributed
    with rate 2*beta/nu^2 (reflection principle), so the barrier alpha is
    never reached with probability 1 - exp(-2*alpha*beta/nu^2).
    """
    return 1.0 - math.exp(-2.0 * p.alpha * p.beta / p.nu ** 2)


@dataclass(frozen=True)
class GoodSetEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    std_error: float
    paper_bound: float
    exact_value: float
    n_paths: int
    n_survived: int
    T: float
    dt: float
    seed: object = field(default=None, compare=False)

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "std_error": self.std_error,
            "paper_bound": self.paper_bound,
            "exact_value": self.exact_value,
            "n_paths": self.n_paths,
            "n_survived": self.n_survived,
            "T": self.T,
            "dt": self.dt,
        }


def binomial_ci(successes: int, n: int, z: float = 1.96):
    """Normal-approximation binomial confidence interval (p_hat, half-width)."""
    p_hat = successes / n
    half = z * math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / n) / n)
    return p_hat, half


def good_set_probability(p: GoodSetParams, T: float, dt: float, n_paths: int,
                         seed=0) -> GoodSetEstimate:
    """Monte Carlo survival frequency on [0, T] with the closed-form anchors.

    The finite-horizon estimate approaches the infinite-horizon exact value
    from above as T grows and always dominates the lower bound
    ``survival_paper_bound`` up to sampling error.
    """
    if n_paths < 100:
        raise ValueError(f"need at least 100 paths, got {n_paths}")
    times = _time_grid(T, dt)
    sqrt_diffs = np.sqrt(np.diff(times))
    barrier = (p.alpha + p.beta * times[1:]) / p.nu
    survived = 0
    for i in range(n_paths):
        rng = np.random.default_rng(path_seed(seed, i))
        w = np.cumsum(rng.standard_normal(len(sqrt_diffs)) * sqrt_diffs)
        if not np.any(w > barrier):
            survived += 1
    p_hat, half = binomial_ci(survived, n_paths)
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / n_paths) / n_paths)
    return GoodSetEstimate(
        estimate=p_hat,
        ci_low=p_hat - half,
        ci_high=p_hat + half,
        std_error=se,
        paper_bound=survival_paper_bound(p),
        exact_value=survival_exact(p),
        n_paths=n_paths,
        n_survived=survived,
        T=T,
        dt=dt,
        seed=seed,
    )


def max_exp_noise(path: BrownianPath, nu: float, T: float | None = None) -> float:
    """Maximum of exp(nu*W(t)) over grid times up to T (damping-case sup of
    the inverse noise multiplier)."""
    if T is None:
        T = path.horizon
    if path.horizon < T - 1e-12:
        raise ValueError(f"path horizon {path.horizon} shorter than T={T}")
    mask = path.times <= T + 1e-12
    return float(np.exp(nu * np.max(path.values[mask])))
