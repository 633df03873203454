"""Exceedance reports with exact binomial bounds, and moment reports."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from ..errors import DomainError


def clopper_pearson_upper(k, R, level=0.99):
    """One-sided exact upper confidence bound for a binomial proportion."""
    if not (0 <= k <= R) or R < 1:
        raise DomainError("need 0 <= k <= R and R >= 1")
    if k == R:
        return 1.0
    return float(beta_dist.ppf(level, k + 1, R - k))


@dataclass
class ExceedanceReport:
    R: int
    k: int
    level: float
    p_upper: float
    p_theory: float
    passed: bool
    vacuous: bool
    label: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def frequency(self):
        return self.k / self.R


def report_from_indicators(indicators, theory, level=0.99, label="", min_R=100, **extra):
    ind = np.asarray(indicators, dtype=bool)
    R = int(ind.size)
    if R < min_R:
        raise DomainError(f"need at least {min_R} replications")
    k = int(ind.sum())
    pt = min(1.0, float(theory))
    pu = clopper_pearson_upper(k, R, level)
    vac = theory >= 1.0
    return ExceedanceReport(R, k, level, pu, pt, vac or pu <= pt, vac, label, dict(extra))


def verify_inequality(sampler, threshold, theory, R, level=0.99, label=""):
    """sampler(rep) returns the statistic; exceedance is statistic >= threshold."""
    stats = np.array([sampler(r) for r in range(R)], dtype=float)
    rep = report_from_indicators(stats >= threshold, theory, level, label)
    rep.extra["max_statistic"] = float(stats.max())
    return rep


@dataclass
class MomentReport:
    q: float
    R: int
    estimate: float
    ci_low: float
    ci_high: float
    theory: float
    passed: bool


def moment_report(excess, q, theory, level=0.99, n_boot=2000, seed=0, min_R=1000):
    """Plug-in E(excess)_+^q with a percentile bootstrap interval.

    `excess` holds per-replication values sup[stat - threshold].
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    x = np.maximum(np.asarray(excess, dtype=float), 0.0) ** q
    R = x.size
    if R < min_R:
        raise DomainError(f"need at least {min_R} replications")
    est = float(x.mean())
    if np.all(x == 0):
        lo = hi = 0.0
    else:
        rng = np.random.default_rng(seed)
        # resample in chunks so memory stays near 2^22 indices
        step = max(1, (1 << 22) // R)
        means = np.concatenate([x[rng.integers(0, R, size=(min(step, n_boot - s), R))].mean(axis=1)
                                for s in range(0, n_boot, step)])
        lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return MomentReport(q, R, est, float(lo), float(hi), float(theory), bool(hi <= theory))
