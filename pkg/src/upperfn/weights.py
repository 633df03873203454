"""Weights s with sum_k s(2^{k/2}) <= 1 and their certification."""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ClassSError, DomainError

SIX_PI2 = 6.0 / math.pi ** 2
CERT_MARGIN = 1e-9


@dataclass(frozen=True)
class WeightFunction:
    fn: object
    normalization_factor: float = 1.0
    certified: bool = False
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.normalization_factor * self.fn(x)


def s_star_raw(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("s* is defined for x > 0")
    out = SIX_PI2 / (1.0 + np.log(x) ** 2)
    return float(out) if out.ndim == 0 else out


def eval_s_star(x):
    return s_star_raw(x)


def s_star():
    """The log-Cauchy weight exactly as defined (not summable to <= 1)."""
    return WeightFunction(s_star_raw, kind="s_star")


def _inv_square(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("weight defined for x > 0")
    out = SIX_PI2 / (1.0 + 2.0 * np.abs(np.log2(x))) ** 2
    return float(out) if out.ndim == 0 else out


def inverse_square_weight():
    """s(2^{k/2}) = (6/pi^2)(1+k)^{-2}."""
    return WeightFunction(_inv_square, kind="inverse_square")


def constant_weight(value):
    return WeightFunction(lambda x: value + 0.0 * np.asarray(x, dtype=float),
                          kind="constant", params={"value": value})


def dyadic_partial_sum(s, K):
    k = np.arange(K + 1)
    return float(np.sum(s(2.0 ** (k / 2.0))))


def analytic_tail(s, K):
    """Integral majorant of sum_{k>K} s(2^{k/2}) for the built-in kinds."""
    c = s.normalization_factor
    if s.kind == "s_star":
        # s*(2^{x/2}) = (6/pi^2)/(1+(a x)^2), decreasing in x >= 0
        a = math.log(2.0) / 2.0
        return c * SIX_PI2 / a * (math.pi / 2 - math.atan(a * K))
    if s.kind == "inverse_square":
        return c * SIX_PI2 / (K + 1.0)
    if s.kind == "constant":
        return math.inf if s.params["value"] > 0 else 0.0
    raise ClassSError(f"no analytic tail for weight kind '{s.kind}'")


def ensure_class_S(s, K=200, tail_bound=None):
    """Rescale s so the truncated dyadic sum plus tail stays below 1 - 1e-9."""
    if K < 1:
        raise DomainError("K must be >= 1")
    if tail_bound is None:
        tail_bound = analytic_tail(s, K)
    if not math.isfinite(tail_bound) or tail_bound > 1.0:
        raise ClassSError(f"tail bound {tail_bound} exceeds 1, cannot certify")
    total = dyadic_partial_sum(s, K) + tail_bound
    target = 1.0 - CERT_MARGIN
    c = 1.0 if total <= target else target / total
    return replace(s, normalization_factor=s.normalization_factor * c,
                   certified=True,
                   params={**s.params, "K": K, "raw_total": total})


def certification_total(s, K=200):
    """Partial sum plus analytic tail, the quantity bounded by certification."""
    return dyadic_partial_sum(s, K) + analytic_tail(s, K)


def certified_s_star(K=200):
    return ensure_class_S(s_star(), K)
