"""Structural constants for the empirical-process upper functions."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from ..errors import DomainError
from ..supremum import sup_over_scales
from ..weights import s_star_raw


def delta_star():
    """Smallest root of (48 delta)^{-1} s*(delta) = 1, with the raw s*."""
    # 48 d (1 + ln^2 d) - 6/pi^2 has derivative 48 (1 + ln d)^2 >= 0
    f = lambda d: 48.0 * d * (1.0 + math.log(d) ** 2) - 6.0 / math.pi ** 2
    return brentq(f, 1e-12, 1e-2, xtol=1e-18, rtol=4 * np.finfo(float).eps)


def _ratio(d):
    return d / s_star_raw(d)


def _C1_integrand(N, R, m, k):
    def F(d):
        r2 = _ratio(d) ** 2
        v = k * max(1.0 + math.log(9216.0 * m * r2), 0.0)
        if N > 0 and m > k:
            v += N * (m - k) * (max(math.log2(4608.0 * m * R * r2), 0.0) + 1.0)
        return v
    return F


def _C2_integrand(N, R, m, k):
    def F(d):
        r = _ratio(d)
        v = k * max(1.0 + math.log(9216.0 * m * r), 0.0)
        if N > 0 and m > k:
            v += N * (m - k) * (max(math.log2(4608.0 * m * R * r), 0.0) + 1.0)
        return v
    return F


def C1(N, R, m, k, J=200, ds=None):
    ds = delta_star() if ds is None else ds
    val, _ = sup_over_scales(lambda d: d ** -2, _C1_integrand(N, R, m, k), J=J, lo=ds)
    return val


def C2(N, R, m, k, J=200, ds=None):
    ds = delta_star() if ds is None else ds
    val, _ = sup_over_scales(lambda d: 1.0 / d, _C2_integrand(N, R, m, k), J=J, lo=ds)
    return val


def a_b(b, J=200, ds=None):
    """2 delta*^{-2} ln 2 + 2 sup_{d > delta*} (d^2 ^ d)^{-1} (96 d / s*(d))^{1/b}."""
    if b <= 1:
        raise DomainError("b must exceed 1, the sup diverges otherwise")
    ds = delta_star() if ds is None else ds
    w = lambda d: 1.0 / min(d * d, d)
    F = lambda d: (96.0 * _ratio(d)) ** (1.0 / b)
    val, _ = sup_over_scales(w, F, J=J, lo=ds)
    return 2.0 * math.log(2.0) / ds ** 2 + 2.0 * val


def c_b(b):
    return 4.0 * math.sqrt(2.0) * (2.0 ** b + 1.0) * b ** b


def modulus_slope(D, n_grid=2001):
    """sup over [0,1] of D'(z) by central differences on a fine grid."""
    z = np.linspace(0.0, 1.0, n_grid)
    h = 1e-6
    vals = [(D(min(t + h, 1.0)) - D(max(t - h, 0.0))) / (min(t + h, 1.0) - max(t - h, 0.0))
            for t in z]
    return float(np.max(vals))


def c_q(q, C_Db):
    if q < 1:
        raise DomainError("q must be >= 1")
    return math.exp((3.5 * q + 5) * math.log(2) + (q + 4) * math.log(3) + gammaln(q + 1)
                    + q * math.log(C_Db))


@dataclass
class EmpiricalConstants:
    delta_star: float
    C1: float
    C2: float
    a_b: float
    C_NRmk: float
    C_D: float
    c_b: float
    lambda1: float
    lambda2: float
    C_Db: float
    chi: int
    b: float
    N: float
    R: float
    m: int
    k: int
    provenance: dict = field(default_factory=dict)

    @property
    def beta_exp(self):
        return self.b if self.chi else 0.0

    def c_q(self, q):
        return c_q(q, self.C_Db)

    def manifest(self):
        names = ["delta_star", "C1", "C2", "a_b", "C_NRmk", "C_D", "c_b",
                 "lambda1", "lambda2", "C_Db"]
        return [(n, getattr(self, n), self.provenance.get(n, "DERIVED")) for n in names]


def structural_constants(N, R, m, k, b=2.0, chi=0, moduli=(), C_D=None, J=200):
    """All constants feeding the totally-bounded empirical upper functions.

    `moduli` are the maps D_j; C_D is max(2, sup_j sup_[0,1] D_j').
    """
    if b <= 1:
        raise DomainError("b must exceed 1")
    if chi not in (0, 1):
        raise DomainError("chi must be 0 or 1")
    if not (0 <= k <= m) or N < 0 or not math.isfinite(R) or not math.isfinite(N):
        raise DomainError("need 0 <= k <= m and finite N, R >= 0")
    ds = delta_star()
    c1 = C1(N, R, m, k, J, ds)
    c2 = C2(N, R, m, k, J, ds)
    ab = a_b(b, J, ds)
    if C_D is None:
        C_D = max([2.0] + [modulus_slope(D) for D in moduli])
    else:
        C_D = max(2.0, C_D)
    cb = c_b(b)
    lam1 = 4.0 * math.sqrt(2.0 * math.e) * max(math.sqrt(C_D), chi * cb)
    lam2 = (16.0 / 3.0) * max(C_D, 8.0 * math.e)
    cdb = max(math.sqrt(2.0 * C_D), chi * cb, (2.0 / 3.0) * max(C_D, 8.0 * math.e))
    prov = {"delta_star": "DERIVED", "C_D": "DERIVED", "c_b": "PAPER",
            "lambda1": "PAPER", "lambda2": "PAPER", "C_Db": "PAPER"}
    return EmpiricalConstants(ds, c1, c2, ab, c1 + c2 + 2 * chi * ab, C_D, cb, lam1, lam2,
                              cdb, chi, b, N, R, m, k, prov)
