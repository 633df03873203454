"""Gaussian specializations: Wiener-integral L_p norms and local modulus under doubling."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .chaining import TailModel, ell
from .errors import DomainError, NumericalGuard
from .supremum import sup_over_scales
from .weights import SIX_PI2, s_star_raw

LN2 = math.log(2.0)


def gaussian_tail_model(V, rho, theta=None):
    """c = 2, A = sqrt2 V, a = sqrt2 rho, B = b = 0.

    V is an array of standard deviations, rho a matrix of intrinsic distances.
    """
    V = np.asarray(V, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n = len(V)
    return TailModel(math.sqrt(2.0) * V, np.zeros(n), math.sqrt(2.0) * rho,
                     np.zeros((n, n)), 2.0, theta)


# ---------------------------------------------------------------------------
# L_p norms of Wiener integrals

@dataclass
class WienerIntegralModel:
    d: int = 1
    p: float = 2.0
    gamma: float = 1.0
    mu: float = 1.0
    h_min: float = 2.0 ** -7
    h_max: float = 2.0 ** -3
    c0: float = 1.0
    c0_provenance: str = "assumed"

    def __post_init__(self):
        if self.gamma <= self.d / 2.0:
            raise DomainError("inapplicable: need gamma > d/2")
        if not (1.0 <= self.p < math.inf):
            raise DomainError("p must lie in [1, inf)")
        if not (0 < self.h_min <= self.h_max < 1):
            raise DomainError("need 0 < h_min <= h_max < 1")
        if self.mu < 1:
            raise DomainError("mu must be >= 1")


def special_weight(u, delta, p, d=1):
    """(3/(4 pi^2)) (1 + log2(2^{-m(u)} delta)^2)^{-1} with 2^m <= u^{d/2-d/p} < 2^{m+1}."""
    du = u ** (d / 2.0 - d / p)
    m = max(int(math.floor(math.log2(du) + 1e-12)), 0)
    return (3.0 / (4.0 * math.pi ** 2)) / (1.0 + (math.log2(delta) - m) ** 2)


def special_weight_lambda1(p, d=1, x_low=1.0, n_x=200, n_d=801):
    """Numeric sup over t in [1, sqrt2], x > x_low, delta of s(xt, .)/s(x, .)."""
    xs = x_low * np.geomspace(1.0, 1e6, n_x)
    ts = np.linspace(1.0, math.sqrt(2.0), 9)
    deltas = 2.0 ** np.linspace(-40, 40, n_d)
    best = 1.0
    for x in xs:
        base = np.array([special_weight(x, dl, p, d) for dl in deltas])
        for t in ts:
            other = np.array([special_weight(x * t, dl, p, d) for dl in deltas])
            best = max(best, float(np.max(other / base)))
    return best


def lambda1_shift_sup(n=200001):
    """1 v sup_x (1 + log2^2 x)/(1 + log2^2(x/2)), the one-step shift ratio."""
    y = np.linspace(-20, 20, n)
    r = (1 + y ** 2) / (1 + (y - 1) ** 2)
    i = int(np.argmax(r))
    # local zoom
    yy = np.linspace(y[max(i - 1, 0)], y[min(i + 1, n - 1)], 20001)
    return max(1.0, float(np.max((1 + yy ** 2) / (1 + (yy - 1) ** 2))))


def alpha_exponent(p, d, gamma):
    return min(2.0 / (p - 1.0), 2.0 - d / gamma)


def sup_power_poly(alpha):
    """sup_{x >= 0} 2^{-alpha x}(1 + x^2)^4 via the stationarity equation."""
    a = alpha * LN2
    f = lambda x: 2.0 ** (-alpha * x) * (1 + x * x) ** 4
    disc = 64.0 - 4.0 * a * a
    if disc < 0:
        return 1.0, 0.0
    x_hi = (8.0 + math.sqrt(disc)) / (2.0 * a)
    if f(x_hi) > f(0.0):
        return f(x_hi), x_hi
    return 1.0, 0.0


@dataclass
class WienerNormResult:
    constants: dict
    provenance: dict
    C1: float
    C2: float
    C3: float
    lambda1: float
    script_R0: float
    script_Rq: float
    extra: dict = field(default_factory=dict)

    def envelope(self, h):
        return self.C1 * np.asarray(h, dtype=float) ** (-self.constants["d"] / 2.0)


def thm1_pipeline(model, q=1):
    """Constant chain for the L_p-norm upper function C1 h^{-d/2}.

    For p in [1, 2) the p = 2 envelope is scaled by mu^{d(2-p)/(2p)}.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    d, gam = model.d, model.gamma
    scale = 1.0
    p = model.p
    if p < 2:
        scale = model.mu ** (d * (2 - p) / (2 * p))
        p = 2.0
    alpha = alpha_exponent(p, d, gam)
    c1 = model.c0 * 3.0 ** (4 * d) * d ** 2
    c2 = 4.0 * 144.0 ** 4 * c1
    c3 = (4.0 * math.pi ** 2 / 3.0) ** 4 * c2
    sp, xstar = sup_power_poly(alpha)
    c4 = 5.0 * c3 * sp
    c5 = c4 * 2.0 ** (d / p)
    c6 = 2.0 * 2.0 ** (d * (p - 2) / (2 * p)) * math.sqrt(32.0 * c5 + 2.0 ** (d / p) + 1.0)
    # sums over dyadic-root scales between tau_low = 1/h_max and tau_bar = 1/h_min
    eps = math.sqrt(2.0) - 1.0
    tbar, tlow = 1.0 / model.h_min, 1.0 / model.h_max
    J = int(math.floor(math.log(tbar / tlow) / math.log1p(eps) + 1e-12)) + 1
    taus = tbar * 2.0 ** (-np.arange(J + 1) / 2.0)
    ex = np.exp(-taus ** (2 * d / p))
    R0 = float(ex.sum())
    gA = math.sqrt(2.0) * taus ** (d * (p - 2) / (2 * p))
    Rq = float((gA ** q * ex).sum())
    ref = math.exp(-2.0 ** -1.5 * model.h_max ** (-2 * d / p))
    c8 = R0 / ref
    c9 = Rq / (model.h_max ** (q * d * (2 - p) / (2 * p)) * ref)
    c = 2.0
    # tail and moment bounds at z = 1
    C2 = 2.0 * c * c8 * math.exp(-1.0)
    C3 = c * 2.0 ** (2.5 * q + 1) * gamma_fn(q + 1) * c9 * eps ** (-q) * math.exp(-1.0)
    lam = special_weight_lambda1(p, d, x_low=tlow, n_x=40, n_d=401)
    consts = {"d": d, "p": model.p, "alpha": alpha, "c0": model.c0, "c1": c1, "c2": c2,
              "c3": c3, "c4": c4, "sup_x": sp, "x_star": xstar, "c5": c5, "c6": c6,
              "c8": c8, "c9": c9, "J": J, "scale_p_lt_2": scale}
    prov = {"c0": model.c0_provenance, "c1": "PAPER", "c2": "PAPER", "c3": "PAPER",
            "c4": "PAPER", "c5": "PAPER", "c6": "DERIVED", "c8": "DERIVED",
            "c9": "DERIVED", "C1": "DERIVED", "C2": "DERIVED"}
    return WienerNormResult(consts, prov, c6 * scale, C2, C3, lam, R0, Rq,
                      {"tail_factor": ref})


def wiener_norm_bounds(res, model):
    """(probability bound, moment bound) as functions of h_max only."""
    d, p = model.d, max(model.p, 2.0)
    t = math.exp(-2.0 ** -1.5 * model.h_max ** (-2 * d / p))
    return res.C2 * t, res.C3 * model.h_max ** (d * (2 - p) / (2 * p)) * t


# ---------------------------------------------------------------------------
# local modulus under doubling

@dataclass
class DoublingModulusModel:
    N_d: float = 2.0
    beta: float = 0.5
    c_low: float = math.sqrt(2.0)
    c_high: float = math.sqrt(2.0)
    r: float = 0.5
    name: str = "custom"

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError("beta must be positive")
        if not (0 < self.c_low <= self.c_high):
            raise DomainError("need 0 < c_low <= c_high")
        if self.N_d < 1:
            raise DomainError("N_d must be >= 1")

    def psi_bounds(self, u):
        u = np.asarray(u, dtype=float)
        return self.c_low * u ** self.beta, self.c_high * u ** self.beta


def doubling_constant(beta, c_low, c_high, N_d, J=200, rtol=1e-7):
    """ln(N_d) sup_delta delta^{-2} 1{X>0}(X/beta + 1),
    X = log2(48 c_high/c_low) + log2(delta/s*(delta)).

    X <= 0 means a single ball already covers, so the entropy vanishes there.
    """
    k = math.log2(48.0 * c_high / c_low)

    def F(dl):
        X = k + math.log2(dl / s_star_raw(dl))
        return X / beta + 1.0 if X > 0 else 0.0
    val, arg = sup_over_scales(lambda dl: dl ** -2.0, F, J=J, rtol=rtol)
    return math.log(N_d) * val, arg


def intrinsic_constant(N, J=200):
    """Intrinsic-metric constant: beta = 1, c_low = c_high = sqrt2."""
    return doubling_constant(1.0, math.sqrt(2.0), math.sqrt(2.0), N, J)[0]


def intrinsic_constant_direct(N, J=200):
    """Same constant from the closed display with 3 + 2 log2(pi)."""
    k = 3.0 + 2.0 * math.log2(math.pi)

    def F(dl):
        X = k + math.log2(dl * (1 + math.log(dl) ** 2))
        return X + 1.0 if X > 0 else 0.0
    val, _ = sup_over_scales(lambda dl: dl ** -2.0, F, J=J)
    return math.log(N) * val


def z_of_r(r):
    return math.log1p(math.log1p(abs(math.log(r))))


def modulus_a(C, beta, r, n_grid=4000, decades=300):
    """a(r) = (1+eps)^{1+2beta} sup_{Delta <= r} sqrt(num/den)."""
    z = z_of_r(r)
    eps = 1.0 / z
    k = (1.0 + 1.0 / eps) ** 2
    e1 = (1.0 + eps) ** 2

    def ratio(Dl):
        num = 2.0 * k * C + e1 * (ell(2.0 * r / Dl) + z)
        den = math.log1p(abs(math.log(Dl)))
        return num / den
    # the log of Delta runs down to -decades*ln10; ratio is smooth in log Delta
    xs = np.log(r) - np.linspace(0.0, decades * math.log(10.0), n_grid)
    vals = np.array([ratio(math.exp(x)) for x in xs])
    i = int(np.argmax(vals))
    best = vals[i]
    if 0 < i < n_grid - 1:
        fine = np.linspace(xs[i + 1], xs[i - 1], 2001)
        best = max(best, max(ratio(math.exp(x)) for x in fine))
    return (1.0 + eps) ** (1 + 2 * beta) * math.sqrt(best), xs[i]


def modulus_p(r):
    z = z_of_r(r)
    eps = 1.0 / z
    return (2.0 + math.log1p(math.log1p(eps)) ** -2) / (1.0 + math.log1p(abs(math.log(r))))


@dataclass
class ModulusResult:
    C: float
    a: float
    p: float
    z: float
    eps: float
    bound: float
    model: DoublingModulusModel
    extra: dict = field(default_factory=dict)

    def envelope(self, deltas):
        D = np.asarray(deltas, dtype=float)
        m = self.model
        return m.c_high * D ** m.beta * np.sqrt(np.log1p(np.abs(np.log(D)))) * self.a

    def vhat(self, deltas):
        """c_high (1+eps)^{1+2beta} Delta^beta sqrt(2(1+1/eps)^2 C + (1+eps)^2 [ell(2r/Delta) + z])."""
        m = self.model
        k = (1 + 1 / self.eps) ** 2
        e1 = (1 + self.eps) ** 2
        return np.array([m.c_high * (1 + self.eps) ** (1 + 2 * m.beta) * Dl ** m.beta
                         * math.sqrt(2 * k * self.C + e1 * (ell(2 * m.r / Dl) + self.z))
                         for Dl in np.atleast_1d(deltas)])


def doubling_modulus_pipeline(model, J=200):
    r = model.r
    if not (0 < r < 1):
        raise DomainError("r must lie in (0, 1)")
    C, arg = doubling_constant(model.beta, model.c_low, model.c_high, model.N_d, J)
    a, xarg = modulus_a(C, model.beta, r)
    p = modulus_p(r)
    z = z_of_r(r)
    eps = 1.0 / z
    return ModulusResult(C, a, p, z, eps, min(1.0, 8.0 * p), model,
                      {"C_argmax": arg, "a_argmax_logDelta": xarg, "bound_raw": 8.0 * p,
                       "vacuous": 8.0 * p >= 1.0})


def example_catalog(name, **params):
    if name == "levy":
        return DoublingModulusModel(N_d=params.get("N_d", 2.0), beta=0.5,
                                    c_low=math.sqrt(2.0), c_high=math.sqrt(2.0),
                                    r=params.get("r", 0.5), name="levy")
    if name == "fbm":
        a = params.get("alpha", 1.0)
        if not (0 < a <= 2):
            raise DomainError("fbm alpha must lie in (0, 2]")
        return DoublingModulusModel(N_d=params.get("N_d", 2.0), beta=a / 2.0,
                                    c_low=math.sqrt(2.0), c_high=math.sqrt(2.0),
                                    r=params.get("r", 0.5), name="fbm")
    if name == "ou":
        s = params.get("sigma", 1.0)
        lam = params.get("lam", 1.0)
        return DoublingModulusModel(N_d=params.get("N_d", 2.0), beta=0.5,
                                    c_low=s * math.sqrt(2.0) * math.exp(-1.0 - lam / 2.0),
                                    c_high=s * math.sqrt(2.0), r=params.get("r", 0.5),
                                    name="ou")
    raise DomainError(f"unknown example '{name}'")
