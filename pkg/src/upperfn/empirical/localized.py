"""Localized kernel processes: model assembly, covers, support checks and constants.

G(r, z, xbar; x) = g(z, x) K_r(rho(x, xbar)) with K_r(.) = V_r^{-1} K(./r),
V_r = prod r_l^{gamma_l}.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import DomainError
from .constants import structural_constants
from .envelopes import (_beta, _check_range, _sup_over_logn, envelope_shape, log_penalty,
                        truncated_F, upsilon_lil)
from .model import GClassModel


# kernels on R (symmetric, evaluated at |u|)

@dataclass
class Kernel:
    fn: object
    sup_norm: float
    L1: float
    support: float = math.inf
    name: str = "custom"
    L1_provenance: str = "analytic"

    def __call__(self, u):
        return self.fn(np.abs(np.asarray(u, dtype=float)))


def triangular_kernel():
    return Kernel(lambda u: np.maximum(1.0 - u, 0.0), 1.0, 2.0, 1.0, "triangular")


def epanechnikov_kernel():
    return Kernel(lambda u: np.where(u <= 1.0, 0.75 * (1.0 - u * u), 0.0), 0.75, 3.0, 1.0,
                  "epanechnikov")


def box_kernel():
    return Kernel(lambda u: np.where(u <= 0.5, 1.0, 0.0), 1.0, math.inf, 0.5, "box",
                  "not ratio-Lipschitz")


def gaussian_kernel():
    k = Kernel(lambda u: np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi),
               1.0 / math.sqrt(2 * math.pi), 0.0, math.inf, "gaussian", "grid estimate")
    k.L1 = estimate_ratio_lipschitz(k)
    return k


def estimate_ratio_lipschitz(K, T=12.0, n=4001):
    """sup |K(t)-K(s)| (1 + |t|^|s|)/|t-s| over a grid of pairs in [0, T], times 1.01."""
    t = np.linspace(0.0, T, n)
    v = K(t)
    best = 0.0
    for lag in (1, 2, 5, 20, 100, 500, n // 2, n - 1):
        a, b = t[:-lag], t[lag:]
        r = np.abs(v[lag:] - v[:-lag]) * (1.0 + a) / (b - a)
        best = max(best, float(r.max()))
    return 1.01 * best


def check_ratio_lipschitz(K, L1, n_pairs=20000, T=None, seed=0):
    """Return a violating pair (t, s) or None."""
    T = (3.0 * K.support if math.isfinite(K.support) else 12.0) if T is None else T
    rng = np.random.default_rng(seed)
    t = rng.uniform(-T, T, n_pairs)
    s = rng.uniform(-T, T, n_pairs)
    lhs = np.abs(K(t) - K(s))
    rhs = L1 * np.abs(t - s) / (1.0 + np.minimum(np.abs(t), np.abs(s)))
    bad = np.flatnonzero(lhs > rhs + 1e-12)
    return None if bad.size == 0 else (float(t[bad[0]]), float(s[bad[0]]))


def K_check(K, t, T=60.0, n=200001):
    """sup_{|u| > t} |K(u)| for symmetric K on R."""
    if math.isfinite(K.support) and t >= K.support:
        return 0.0
    hi = K.support if math.isfinite(K.support) else T
    u = np.linspace(t, max(hi, t), n)[1:]
    return float(np.max(np.abs(K(u)))) if u.size else 0.0


def estimate_L2(K, gamma=1.0, n=4001):
    """sup_t t^{1+gamma} Kcheck(t) on a grid (d = 1)."""
    hi = K.support if math.isfinite(K.support) else 60.0
    t = np.linspace(0.0, hi, n)
    u = np.linspace(0.0, hi, 200001)
    a = np.abs(K(u))
    # reverse running max gives sup over |u| >= t
    rmax = np.maximum.accumulate(a[::-1])[::-1]
    idx = np.searchsorted(u, t, side="right")
    kc = np.where(idx < u.size, rmax[np.minimum(idx, u.size - 1)], 0.0)
    return float(np.max(t ** (1 + gamma) * kc))


# localized model

@dataclass
class KernelLocalizedModel:
    kernel: Kernel
    d: int = 1
    gammas: tuple = (1.0,)
    g_sup: float = 1.0
    L_alpha: float = 0.0
    alpha: float = 1.0
    r_min: object = None
    r_max: object = None
    L_measure: tuple = (2.0,)
    f_inf: float = 1.0
    L2: float = None
    pointwise: bool = True

    def __post_init__(self):
        if len(self.gammas) != self.d or len(self.L_measure) != self.d:
            raise DomainError("gammas and L_measure need d entries")
        if self.r_min is None:
            self.r_min = lambda n: np.full(self.d, 1.0 / n)
        if self.r_max is None:
            self.r_max = lambda n: np.ones(self.d)
        if self.L2 is None:
            if self.d != 1:
                raise DomainError("L2 must be supplied for d > 1")
            self.L2 = estimate_L2(self.kernel, self.gammas[0])

    @property
    def gK(self):
        return self.g_sup * self.kernel.sup_norm

    @property
    def gamma_min(self):
        return min(self.gammas)

    def V(self, r):
        r = np.atleast_2d(np.asarray(r, dtype=float))
        return np.prod(r ** np.asarray(self.gammas)[None, :], axis=1)

    def G_inf(self, r):
        return self.gK / self.V(r)

    def G_low(self, n):
        return self.gK / float(self.V(self.r_max(n))[0])

    def G_high(self, n):
        return self.gK / float(self.V(self.r_min(n))[0])

    def rho(self, r, rp):
        """max_l gamma_l |ln(r_l / r'_l)|."""
        r, rp = np.asarray(r, float), np.asarray(rp, float)
        return float(np.max(np.asarray(self.gammas) * np.abs(np.log(r) - np.log(rp))))

    def D0(self, z):
        return (math.exp(self.d * z) - 1.0
                + self.kernel.L1 / self.kernel.sup_norm * (math.exp(z / self.gamma_min) - 1.0))

    def D_z(self, z):
        return self.L_alpha / self.g_sup * z

    def D_x(self, z):
        return self.kernel.L1 / self.kernel.sup_norm * z

    def C_D(self):
        """max(2, sup over [0,1] of the modulus derivatives), in closed form."""
        d0 = (self.d * math.exp(self.d)
              + self.kernel.L1 / self.kernel.sup_norm / self.gamma_min * math.exp(1.0 / self.gamma_min))
        return max(2.0, d0, self.L_alpha / self.g_sup, self.kernel.L1 / self.kernel.sup_norm)

    def L_maps(self):
        if self.pointwise:
            return (lambda z: z,)
        return (lambda z: z, lambda z: z ** 2)

    def script_L_zero(self):
        return self.pointwise

    def F_bound(self):
        """2^d f_inf |g| L2 prod 2^gamma_l L^(l)."""
        return (2.0 ** self.d * self.f_inf * self.g_sup * self.L2
                * float(np.prod([2.0 ** g * L for g, L in zip(self.gammas, self.L_measure)])))

    def G(self, r, xbar, x):
        """g_sup K_r(|x - xbar|) for d = 1 (g constant)."""
        r = float(np.atleast_1d(r)[0])
        return self.g_sup * self.kernel(np.abs(np.asarray(x) - xbar) / r) / r ** self.gammas[0]


def localized_model(kernel, d=1, gammas=(1.0,), g_sup=1.0, L_alpha=0.0, alpha=1.0,
                    r_min=None, r_max=None, L_measure=None, f_inf=1.0, L2=None,
                    pointwise=True, check_pairs=20000):
    """Assemble the localized model; rejects kernels failing the ratio-Lipschitz check."""
    if not math.isfinite(kernel.L1):
        raise DomainError(f"kernel '{kernel.name}' is not ratio-Lipschitz")
    bad = check_ratio_lipschitz(kernel, kernel.L1, check_pairs)
    if bad is not None:
        raise DomainError(f"ratio-Lipschitz condition fails at pair {bad}")
    if L_measure is None:
        # Lebesgue measure of a closed ball of radius r on R is 2r
        L_measure = tuple(2.0 for _ in range(d))
    model = KernelLocalizedModel(kernel, d, tuple(gammas), g_sup, L_alpha, alpha, r_min,
                                 r_max, tuple(L_measure), f_inf, L2, pointwise)
    return model


def as_gclass(model):
    """View of the localized model as a generic G-class (k = d)."""
    D = (model.D0, model.D_z) if model.pointwise else (model.D0, model.D_z, model.D_x)
    return GClassModel(G=lambda h, x: model.G(h[0], h[1], x),
                       G_inf=lambda h: float(model.G_inf(h[0])[0]),
                       m=model.d + (1 if model.pointwise else 2), k=model.d,
                       G_low=model.G_low, G_high=model.G_high, D_maps=D,
                       L_maps=model.L_maps(), name="localized")


def F_quadrature(model, density, r, xbar):
    """|g| int |K_r(|x - xbar|)| f(x) dx for d = 1 and iid data."""
    if model.d != 1:
        raise DomainError("quadrature F implemented for d = 1")
    r = float(np.atleast_1d(r)[0])
    a, b = density.support
    K = model.kernel
    lo, hi = a, b
    if math.isfinite(K.support):
        lo, hi = max(a, xbar - r * K.support), min(b, xbar + r * K.support)
    if hi <= lo:
        return 0.0
    f = lambda x: float(np.abs(K(abs(x - xbar) / r))) * float(density.pdf(x))
    pts = [p for p in (xbar,) if lo < p < hi]
    val, _ = integrate.quad(f, lo, hi, points=pts or None, limit=400, epsabs=1e-12,
                            epsrel=1e-10)
    return model.g_sup * val / r ** model.gammas[0]


def expected_K(model, density, r, xbar):
    """E K_r(|X - xbar|) (signed), the centering of the kernel process."""
    r = float(np.atleast_1d(r)[0])
    a, b = density.support
    K = model.kernel
    lo, hi = a, b
    if math.isfinite(K.support):
        lo, hi = max(a, xbar - r * K.support), min(b, xbar + r * K.support)
    if hi <= lo:
        return 0.0
    f = lambda x: float(K(abs(x - xbar) / r)) * float(density.pdf(x))
    pts = [p for p in (xbar,) if lo < p < hi]
    val, _ = integrate.quad(f, lo, hi, points=pts or None, limit=400, epsabs=1e-13,
                            epsrel=1e-11)
    return val / r ** model.gammas[0]


# pointwise upper functions

@dataclass
class LocalizedEnvelopes:
    n: np.ndarray
    P: np.ndarray
    M: np.ndarray
    V: np.ndarray
    U: np.ndarray
    prob_bound: float
    moment_bound: float
    beta: float
    lam1: float
    lam2: float


def _rgrid(model, r):
    r = np.asarray(r, dtype=float)
    if r.ndim == 1:
        r = r[:, None] if model.d == 1 else r[None, :]
    return r


def _check_r_in_range(model, r, n_values, lo_fn):
    for n in n_values:
        lo, hi = np.asarray(lo_fn(n)), np.asarray(model.r_max(n))
        if np.any(r < lo[None, :] * (1 - 1e-12)) or np.any(r > hi[None, :] * (1 + 1e-12)):
            raise DomainError(f"bandwidth outside [r_min(n), r_max(n)] at n={n}")


def bold_lambdas(consts, model):
    return math.sqrt(model.gK) * consts.lambda1, model.gK * consts.lambda2


def thm7_envelopes(consts, model, n1, n2, r, F, u, q=1.0, r_trunc=math.inf):
    """Pointwise upper functions V, U on [n, r] tables for the localized process."""
    _check_range(n1, n2)
    if u < 1 or q < 1:
        raise DomainError("need u >= 1 and q >= 1")
    beta = _beta(consts, n1, n2)
    r = _rgrid(model, r)
    n = np.arange(n1, n2 + 1)
    _check_r_in_range(model, r, n, model.r_min)
    gam = np.asarray(model.gammas)
    ds2 = consts.delta_star ** -2
    S = np.array([[np.sum(gam * np.log(2 * np.asarray(model.r_max(nn)) / rr)) for rr in r]
                  for nn in n])
    P = (36 * model.d * ds2 + 6) * np.log1p(S) + 18 * consts.C_NRmk
    M = (72 * model.d * ds2 + 2.5 * q + 1.5) * S + 36 * consts.C_NRmk
    Fr = truncated_F(F, r_trunc)
    pen = log_penalty(Fr)[None, :]
    Vr = model.V(r)
    L1b, L2b = bold_lambdas(consts, model)
    # envelope_shape with G_inf = 1/V_r and unit lambdas scaled by bold lambdas
    V = envelope_shape(L1b, L2b, 1.0 / Vr, Fr, n, beta, P + pen + u)
    U = envelope_shape(L1b, L2b, 1.0 / Vr, Fr, n, beta, M + pen + u)
    Vmax = float(model.V(model.r_max(n1))[0])
    Fsup = float(np.max(F))
    cq = consts.c_q(q) * max(math.sqrt(model.gK), model.gK) ** q
    scale = max(math.sqrt(Fsup / (n1 * Vmax)), math.log(n2) ** beta / (Vmax * n1))
    return LocalizedEnvelopes(n, P, M, V, U, 2419.0 * math.exp(-u),
                              cq * scale ** q * math.exp(-u), beta, L1b, L2b)


# covers and the support condition

@dataclass
class CoverRd:
    """Closed sup-norm balls of radius radius/2 centred on radius * Z^d."""
    d: int
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("cover radius must be positive")

    @property
    def frak_n(self):
        return 3 ** self.d

    def cell_bounds(self, i):
        c = self.radius * np.asarray(i, dtype=float)
        return c - self.radius / 2, c + self.radius / 2

    def cells_containing(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        base = np.round(t / self.radius).astype(int)
        out = []
        for off in np.ndindex(*(3,) * self.d):
            i = base + np.asarray(off) - 1
            if np.all(np.abs(t - self.radius * i) <= self.radius / 2 + 1e-12):
                out.append(tuple(int(v) for v in i))
        return out

    def neighbours(self, i):
        """Cells meeting cell i: lattice offsets in {-1, 0, 1}^d."""
        i = np.asarray(i, dtype=int)
        return [tuple(int(v) for v in i + np.asarray(off) - 1)
                for off in np.ndindex(*(3,) * self.d)]

    def intersects(self, i, k):
        return bool(np.max(np.abs(np.asarray(i) - np.asarray(k))) <= 1)

    def cell_distance(self, i, k):
        gap = np.abs(np.asarray(i) - np.asarray(k)) * self.radius - self.radius
        return float(max(np.max(gap), 0.0))

    def neighbourhood_cells(self, t):
        cells = set()
        for i in self.cells_containing(t):
            cells.update(self.neighbours(i))
        return sorted(cells)

    def in_neighbourhood(self, t, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        for k in self.neighbourhood_cells(t):
            lo, hi = self.cell_bounds(k)
            if np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12):
                return True
        return False

    def neighbourhood_mass_1d(self, t, cdf):
        """P(X in neighbourhood of t) for d = 1 (the neighbourhood is an interval)."""
        cells = self.neighbourhood_cells(t)
        lo = self.cell_bounds(cells[0])[0][0]
        hi = self.cell_bounds(cells[-1])[1][0]
        return float(cdf(hi) - cdf(lo))


@dataclass
class SupportCheck:
    passed: bool
    witness: tuple = None
    t: float = None
    checked: dict = field(default_factory=dict)


def support_check(model, n, t, n_r=64, n_u=2001):
    """sup_{r in R(n)} sup_{|u| > t} |K(u/r)| <= |K|_inf / n on a grid (d = 1).

    Coordinates with |u_l| = 0 are read as inside the box; the condition is
    checked on |u| > t.
    """
    if model.d != 1:
        raise DomainError("support check implemented for d = 1")
    lo = float(np.asarray(model.r_min(2 * n))[0])
    hi = float(np.asarray(model.r_max(n))[0])
    rs = np.geomspace(lo, hi, n_r)
    K = model.kernel
    thr = K.sup_norm / n
    for r in rs:
        # |K(u/r)| for |u| > t equals Kcheck(t/r); also scan a u-grid for a witness
        kc = K_check(K, t / r)
        if kc > thr * (1 + 1e-12):
            ub = (K.support * r) if math.isfinite(K.support) else 60.0 * r
            u = np.linspace(t, max(ub, t * 1.0001), n_u)[1:]
            v = np.abs(K(u / r))
            i = int(np.argmax(v))
            return SupportCheck(False, (float(r), float(u[i])), t, {"threshold": thr})
    return SupportCheck(True, None, t, {"threshold": thr, "r_range": (lo, hi)})


def cover_and_support(d, radius, model, n, t=None):
    """Lattice cover with overlap 3^d and the support condition at margin t < radius."""
    cover = CoverRd(d, radius)
    t = radius * (1 - 1e-9) if t is None else t
    if t >= radius:
        raise DomainError("the support margin must be below the cover radius")
    return cover, support_check(model, n, t)


# sup-norm upper functions

def supnorm_C(consts, model, N=None):
    N = consts.N if N is None else N
    return (72 * N * consts.delta_star ** -2 * abs(math.log2(model.gK))
            + 36 * consts.C_NRmk)


def M_hat(consts, model, r, q, v, small=False):
    """Displayed M_hat_{q,v}(r); with small=True the probability-only variant."""
    r = _rgrid(model, r)
    Vr = model.V(r)
    ds2 = consts.delta_star ** -2
    N, d = consts.N, model.d
    C = supnorm_C(consts, model)
    if small:
        return ((36 * d + 54 * N) * ds2 + 2 * v + 6) * np.log(2 / Vr) + C / 2
    return ((72 * d + 108 * N) * ds2 + 2.5 * q + 2 * v + 1.5) * np.log(2 / Vr) + C


def M_hat_simplified(consts, model, n, q, v, p):
    """r-free bound of M_hat - C when V_{r_min(n)} >= n^-p, p >= 1.

    The additive constant C is not included; add supnorm_C for a bound on M_hat.
    """
    ds2 = consts.delta_star ** -2
    coef = (72 * model.d + 108 * consts.N) * ds2 + 2.5 * q + 2 * v + 1.5
    return coef * p * math.log(2 * n)


@dataclass
class SupNormEnvelopes:
    n: np.ndarray
    M_hat: np.ndarray
    F_hat: np.ndarray
    U: np.ndarray
    prob_bound: float
    moment_bound: float
    beta: float


def supnorm_envelopes(consts, model, cover, n1, n2, r, F, v, z, q=1.0, small_M=False):
    """Sup-norm upper function U_hat on [n, r] tables, F taken as sup over xbar."""
    _check_range(n1, n2)
    if v < 1 or z < 1 or q < 1:
        raise DomainError("need v >= 1, z >= 1, q >= 1")
    beta = _beta(consts, n1, n2)
    r = _rgrid(model, r)
    n = np.arange(n1, n2 + 1)
    _check_r_in_range(model, r, n, model.r_min)
    Mh = M_hat(consts, model, r, q, v, small_M)
    Fh = np.maximum(np.asarray(F, dtype=float), 1.0 / n2)
    X = Mh + 2 * (v + 1) * np.abs(np.log(Fh)) + z
    L1b, L2b = bold_lambdas(consts, model)
    U = envelope_shape(L1b, L2b, 1.0 / model.V(r), Fh, n, beta, X)
    nn5 = cover.frak_n ** 5
    prob = nn5 * (4838.0 * math.exp(-z) + 2.0 * n1 ** (2.0 - v))
    Vmax = float(model.V(model.r_max(n1))[0])
    Vmin = float(model.V(model.r_min(n1))[0])
    cq = consts.c_q(q) * max(math.sqrt(model.gK), model.gK) ** q
    scale = max(math.sqrt(float(np.max(Fh)) / (n1 * Vmax)), math.log(n2) ** beta / (Vmax * n1))
    mom = 2 * nn5 * cq * scale ** q + 2 ** (q + 1) * nn5 * Vmin ** (-q) * n1 ** (2.0 - v)
    return SupNormEnvelopes(n, Mh, Fh, U, prob, mom, beta)


# laws of (iterated) logarithm for the localized process

def pointwise_ll_statistic(zeta, n, V):
    return np.sqrt(n * np.asarray(V)) * np.asarray(zeta) / math.sqrt(math.log1p(math.log(n)))


def supnorm_ll_statistic(zeta, n, V):
    V = np.asarray(V, dtype=float)
    den = np.maximum(np.log(1.0 / V), math.log(math.log(n)))
    return np.sqrt(n * V) * np.asarray(zeta) / np.sqrt(den)


def admissible(n, V, a):
    """n^-1 (ln n)^a <= V <= 1."""
    V = np.asarray(V, dtype=float)
    return (V >= math.log(n) ** a / n) & (V <= 1.0)


def pointwise_ll_upsilon(consts, model, a, b=None, F_bold=None):
    """Upsilon for the pointwise LIL with r_max = 1, V_r >= 1/n."""
    if consts.chi != 1:
        raise DomainError("build constants with chi=1 for the block decomposition")
    b = consts.b if b is None else b
    F_bold = model.F_bound() if F_bold is None else F_bold
    ds2 = consts.delta_star ** -2
    G = float(np.sum(model.gammas))

    def P(x):
        return (36 * model.d * ds2 + 6) * np.log1p(G * math.log(2.0) + x) + 18 * consts.C_NRmk
    L1b, L2b = bold_lambdas(consts, model)
    return upsilon_lil(L1b, L2b, max(F_bold, 1.0), P, a, b)


def xlogx_cap(F):
    """sup over x in (0, F] of x |ln x|."""
    c = F * abs(math.log(F))
    if F >= 1.0 / math.e:
        c = max(c, 1.0 / math.e)
    return c


@dataclass
class LLResult:
    upsilon: float
    parts: dict
    b: float
    a: float
    frak_n: int

    def bound(self, j):
        if j < 3:
            raise DomainError("j must be >= 3")
        return 4840.0 * self.frak_n ** 5 / math.log(j)


def supnorm_ll_upsilon(consts, model, cover, a, b=None, F_bold=None, q=1.0, v=3.0):
    """Upsilon for the sup-norm law of logarithm, assembled from U_hat with v = 3,
    z = 2 ln(1 + ln n_l), normaliser sqrt((nV)^-1 (ln(1/V) v lnln n)).
    """
    if a <= 4:
        raise DomainError("a must exceed 4")
    b = consts.b if b is None else b
    if not (1 < b < a / 2 - 1):
        raise DomainError("need 1 < b < a/2 - 1")
    if consts.chi != 1 or abs(consts.b - b) > 1e-12:
        raise DomainError("constants must be built with chi=1 and the same b")
    F_bold = model.F_bound() if F_bold is None else F_bold
    Fb = max(F_bold, 1.0 / 3.0)
    ds2 = consts.delta_star ** -2
    cM = (72 * model.d + 108 * consts.N) * ds2 + 2.5 * q + 2 * v + 1.5
    C = supnorm_C(consts, model)
    capx = xlogx_cap(Fb)
    L1b, L2b = bold_lambdas(consts, model)

    # worst L = ln(1/V) for the sqrt part sits at L = lnln n
    def r1(x):
        ll = np.log(x)
        return (Fb * (cM * (math.log(2.0) + ll) + C + 2 * np.log1p(x)) + 2 * (v + 1) * capx) / ll
    # bracket <= Y3 ln n using ln(1/V) <= ln n and |ln F_hat| <= max(|ln F|, ln 2n)
    def r3(x):
        return (cM * (math.log(2.0) + x) + C
                + 2 * (v + 1) * np.maximum(abs(math.log(Fb)), math.log(2.0) + x)
                + 2 * np.log1p(x)) / x
    def r4(x):
        return x ** (b + 1 - a / 2.0) / np.sqrt(np.log(x))
    s1, _ = _sup_over_logn(r1)
    s3, _ = _sup_over_logn(r3)
    s4, _ = _sup_over_logn(r4)
    Y1 = L1b * math.sqrt(s1)
    parts = {"Upsilon1": Y1, "Upsilon3": s3, "Upsilon4": s4, "lambda2": L2b}
    return LLResult(Y1 + L2b * s3 * s4, parts, b, a, cover.frak_n)
