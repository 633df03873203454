"""Upper functions for generalized empirical processes and LIL-type constants.

Quantities indexed by the bandwidth part h^(k) are passed as arrays over a
grid of h; tables are indexed [n, h].
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

LOG_N_MAX = 1e15


def script_L(L_maps, z):
    """sum_j log2(max(L_j(2z)/(2z), 1)) for the growth maps L_{k+1..m}."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for L in L_maps:
        out = out + np.log2(np.maximum(L(2 * z) / (2 * z), 1.0))
    return out


def price_P(consts, G_inf, G_low, scriptL=0.0):
    """(36k d*^-2 + 6) ln(1 + ln(2 G_inf/G_low)) + 36 N d*^-2 L + 18 C."""
    ds2 = consts.delta_star ** -2
    G_inf = np.asarray(G_inf, dtype=float)
    if np.any(G_inf < G_low):
        raise DomainError("G_inf below the lower envelope G_low")
    return ((36 * consts.k * ds2 + 6) * np.log1p(np.log(2 * G_inf / G_low))
            + 36 * consts.N * ds2 * np.asarray(scriptL) + 18 * consts.C_NRmk)


def price_M(consts, G_inf, G_low, q, scriptL=0.0):
    ds2 = consts.delta_star ** -2
    G_inf = np.asarray(G_inf, dtype=float)
    if np.any(G_inf < G_low):
        raise DomainError("G_inf below the lower envelope G_low")
    return ((72 * consts.k * ds2 + 2.5 * q + 1.5) * np.log(2 * G_inf / G_low)
            + 72 * consts.N * ds2 * np.asarray(scriptL) + 36 * consts.C_NRmk)


def truncated_F(F, r_trunc):
    F = np.asarray(F, dtype=float)
    if math.isinf(r_trunc):
        return F
    return np.maximum(F, math.exp(-r_trunc))


def log_penalty(Fr):
    """2 ln(1 + |ln F|); infinite where F = 0."""
    with np.errstate(divide="ignore"):
        return 2.0 * np.log1p(np.abs(np.log(Fr)))


def envelope_shape(lam1, lam2, G_inf, F, n, beta, bracket):
    """lam1 sqrt(G F n^-1 X) + lam2 G n^-1 ln^beta(n) X, broadcast over [n, h]."""
    n = np.asarray(n, dtype=float)[:, None]
    G = np.asarray(G_inf, dtype=float)[None, :]
    Fv = np.asarray(F, dtype=float)[None, :]
    X = np.asarray(bracket, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    return lam1 * np.sqrt(G * Fv * X / n) + lam2 * G * np.log(n) ** beta * X / n


def _check_range(n1, n2):
    if not (3 <= n1 <= n2 < 2 * n1):
        raise DomainError(f"need 3 <= n1 <= n2 < 2 n1, got n1={n1}, n2={n2}")


def _beta(consts, n1, n2):
    chi = 0 if n1 == n2 else 1
    if consts.chi != chi:
        raise DomainError(f"constants were built with chi={consts.chi}, range needs chi={chi}")
    return consts.b if chi else 0.0


@dataclass
class EmpiricalEnvelopes:
    n: np.ndarray
    P: np.ndarray
    M: np.ndarray
    F_r: np.ndarray
    V: np.ndarray
    U: np.ndarray
    prob_bound: float
    moment_bound: float
    beta: float
    extra: dict = field(default_factory=dict)


def thm3_envelopes(consts, G_inf, F, G_low, n1, n2, u, q=1.0, r_trunc=math.inf,
                   scriptL=0.0, n=None):
    """Probability (V) and moment (U) upper functions on the totally bounded class.

    G_inf, F are arrays over the h grid; F is the mean (n1 = n2) or the
    worst-case (n1 != n2) first absolute moment of G(h, X_i).
    """
    _check_range(n1, n2)
    if u < 1 or q < 1:
        raise DomainError("need u >= 1 and q >= 1")
    beta = _beta(consts, n1, n2)
    n = np.arange(n1, n2 + 1) if n is None else np.asarray(n)
    P = price_P(consts, G_inf, G_low, scriptL)
    M = price_M(consts, G_inf, G_low, q, scriptL)
    Fr = truncated_F(F, r_trunc)
    pen = log_penalty(Fr)
    V = envelope_shape(consts.lambda1, consts.lambda2, G_inf, Fr, n, beta, P + pen + u)
    U = envelope_shape(consts.lambda1, consts.lambda2, G_inf, Fr, n, beta, M + pen + u)
    Fsup = float(np.max(F))
    scale = max(math.sqrt(Fsup * G_low / n1), math.log(n2) ** beta * G_low / n1)
    return EmpiricalEnvelopes(n, P, M, Fr, V, U, 2419.0 * math.exp(-u),
                              consts.c_q(q) * scale ** q * math.exp(-u), beta)


def _sup_over_logn(f, lo=math.log(3.0), hi=LOG_N_MAX, n_grid=20001):
    x = np.geomspace(lo, hi, n_grid)
    v = f(x)
    i = int(np.argmax(v))
    # local refinement around the grid max
    a, b = x[max(i - 1, 0)], x[min(i + 1, n_grid - 1)]
    xx = np.geomspace(a, b, 2001)
    vv = f(xx)
    j = int(np.argmax(vv))
    if vv[j] >= v[i]:
        return float(vv[j]), float(xx[j])
    return float(v[i]), float(x[i])


@dataclass
class UpsilonResult:
    upsilon: float
    parts: dict
    b: float
    a: float

    def bound(self, j):
        return lil_bound(j)


def upsilon_lil(lam1, lam2, F_r, P_of_logn, a, b=None):
    """Assemble Upsilon = Y1 + Y2 Y3 over dyadic blocks n_l = j 2^l.

    The envelope at u = 2 ln(1 + ln n_l) <= 2 ln(1 + ln n) is divided by
    sqrt(G_inf ln(1+ln n)/n); the lam2 part is absorbed through the restricted
    set G_inf <= n (ln n)^-a with 1 < b < a/2.
    """
    if a <= 2:
        raise DomainError("a must exceed 2")
    b = 0.5 * (1.0 + a / 2.0) if b is None else b
    if not (1 < b < a / 2):
        raise DomainError("need 1 < b < a/2")
    pen = 2.0 * math.log1p(abs(math.log(F_r)))

    def X(x):
        return P_of_logn(x) + pen + 2.0 * np.log1p(x)
    r1, x1 = _sup_over_logn(lambda x: F_r * X(x) / np.log1p(x))
    r2, x2 = _sup_over_logn(lambda x: X(x) / np.log1p(x))
    r3, x3 = _sup_over_logn(lambda x: np.sqrt(np.log1p(x)) * x ** (b - a / 2.0))
    Y1 = lam1 * math.sqrt(r1)
    Y2 = lam2 * r2
    parts = {"Upsilon1": Y1, "Upsilon2": Y2, "Upsilon3": r3,
             "argmax_logn": (x1, x2, x3)}
    return UpsilonResult(Y1 + Y2 * r3, parts, b, a)


def lil_bound(j):
    if j < 3:
        raise DomainError("j must be >= 3")
    return 2419.0 / math.log(j)


def lil_upsilon(consts, F_bold, a, frak_a=0.0, frak_b=1.0, frak_c=1.0, b=None):
    """Upsilon for the non-asymptotic LIL on the totally bounded class.

    Uses G_low >= c, G_high <= c n^frak_b, script_L(z) <= frak_a ln(1 + ln z)
    and F_bold bounding every first absolute moment. Truncation level r = 0,
    so F enters through max(F_bold, 1).
    """
    if consts.chi != 1:
        raise DomainError("the block decomposition has n1 != n2; build constants with chi=1")
    b = consts.b if b is None else b
    if abs(b - consts.b) > 1e-12:
        raise DomainError("b must match the b used for the constants")
    ds2 = consts.delta_star ** -2
    k, N, C = consts.k, consts.N, consts.C_NRmk

    def P(x):
        return ((36 * k * ds2 + 6) * np.log1p(frak_b * (math.log(2.0) + x))
                + 36 * N * ds2 * frak_a * np.log1p(np.maximum(
                    math.log(2.0) + frak_b * x + math.log(frak_c), 0.0))
                + 18 * C)
    return upsilon_lil(consts.lambda1, consts.lambda2, max(F_bold, 1.0), P, a, b)


def lil_statistic(eta, n, G_inf):
    """sqrt(n) eta / sqrt(G_inf ln(1 + ln n))."""
    return math.sqrt(n) * np.asarray(eta) / np.sqrt(np.asarray(G_inf) * math.log1p(math.log(n)))


def default_b(a, shift=0.0):
    """Midpoint of (1, a/2 - shift)."""
    hi = a / 2.0 - shift
    if hi <= 1:
        raise DomainError("empty admissible interval for b")
    return 0.5 * (1.0 + hi)


# partially totally bounded class

def L_nv(mass, n, v):
    """-ln(max(mass, n^-v)) with mass the mean neighbourhood probability."""
    if v < 1:
        raise DomainError("v must be >= 1")
    mass = np.asarray(mass, dtype=float)
    if np.any(mass < -1e-12) or np.any(mass > 1 + 1e-12):
        raise DomainError("neighbourhood mass must lie in [0, 1]")
    return -np.log(np.maximum(np.clip(mass, 0.0, 1.0), float(n) ** (-v)))


@dataclass
class PartialEnvelopes:
    n: np.ndarray
    V_tilde: np.ndarray
    U_tilde: np.ndarray
    V_hat: np.ndarray
    U_hat: np.ndarray
    P_hat: np.ndarray
    M_hat: np.ndarray
    F_hat: np.ndarray
    L: np.ndarray
    prob_bound: float
    moment_bound: float
    beta: float


def thm5_envelopes(consts, G_inf, F, G_low, G_high, n1, n2, mass, v, z, q=1.0,
                   r_trunc=math.inf, scriptL=0.0, frak_n=1):
    """Upper functions with the neighbourhood term L_{n,v} and their simplified forms.

    `mass` is an array [n, h] (or [h]) of mean probabilities of the
    neighbourhood of the h_m coordinate.
    """
    _check_range(n1, n2)
    if v < 1:
        raise DomainError("v must be >= 1")
    if z < 1 or q < 1:
        raise DomainError("need z >= 1 and q >= 1")
    beta = _beta(consts, n1, n2)
    n = np.arange(n1, n2 + 1)
    mass = np.asarray(mass, dtype=float)
    if mass.ndim == 1:
        mass = np.broadcast_to(mass, (len(n), mass.size))
    L = np.vstack([L_nv(mass[i], n[i], v) for i in range(len(n))])
    P = price_P(consts, G_inf, G_low, scriptL)
    M = price_M(consts, G_inf, G_low, q, scriptL)
    Fr = truncated_F(F, r_trunc)
    pen = log_penalty(Fr)
    lam1, lam2 = consts.lambda1, consts.lambda2
    Vt = envelope_shape(lam1, lam2, G_inf, Fr, n, beta, P[None, :] + L + pen[None, :] + z)
    Ut = envelope_shape(lam1, lam2, G_inf, Fr, n, beta, M[None, :] + L + pen[None, :] + z)
    G_inf = np.asarray(G_inf, dtype=float)
    Fh = np.maximum(np.asarray(F, dtype=float), 1.0 / n2)
    shift = 2 * v * np.abs(np.log(2 * G_inf))
    Ph, Mh = P + shift, M + shift
    fpen = 2 * (v + 1) * np.abs(np.log(Fh))
    Vh = envelope_shape(lam1, lam2, G_inf, Fh, n, beta, Ph + fpen + z)
    Uh = envelope_shape(lam1, lam2, G_inf, Fh, n, beta, Mh + fpen + z)
    nn5 = frak_n ** 5
    prob = nn5 * (4838.0 * math.exp(-z) + 2.0 * n1 ** (2.0 - v))
    Fsup = float(np.max(F))
    scale = max(math.sqrt(Fsup * G_low / n1), math.log(n2) ** beta * G_low / n1)
    mom = (2 * nn5 * consts.c_q(q) * scale ** q * math.exp(-z)
           + 2 ** (q + 1) * nn5 * G_high ** q * n1 ** (2.0 - v))
    return PartialEnvelopes(n, Vt, Ut, Vh, Uh, Ph, Mh, Fh, L, prob, mom, beta)
