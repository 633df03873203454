"""Generic upper-function engine on finite index sets.

Index sets are finite discretizations. A TailModel stores A, B as arrays
over the index set and the semi-metrics a, b as distance matrices.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from .entropy import capacity_a, capacity_b, closed_form_provider, greedy_provider
from .errors import DomainError, NumericalGuard
from .weights import certified_s_star

SQRT2M1 = math.sqrt(2.0) - 1.0
_EPS_TOL = 1e-12


def ell(u):
    """ln(1 + ln u) + 2 ln(1 + ln(1 + ln u)), u >= 1."""
    if u < 1:
        raise DomainError("ell requires u >= 1")
    l1 = math.log1p(math.log(u))
    return l1 + 2.0 * math.log1p(l1)


def ell_clamped(u):
    # arguments slightly below 1 arise from (1+eps)-inflated scales; clamp up
    return ell(max(u, 1.0))


def u_eps_s(y, kappa, e, eps):
    """kappa1 sqrt(2(1+1/eps)^2 e + y) + kappa2 (2(1+1/eps)^2 e + y)."""
    k1, k2 = kappa
    if y < 0 or k1 < 0 or k2 < 0 or e < 0:
        raise DomainError("u_eps_s needs nonnegative inputs")
    if eps <= 0:
        raise DomainError("eps must be positive")
    inner = 2.0 * (1.0 + 1.0 / eps) ** 2 * e + y
    return k1 * math.sqrt(inner) + k2 * inner


def _check_eps(eps, hi, name):
    if not (0.0 < eps <= hi + _EPS_TOL):
        raise DomainError(f"{name}: eps must lie in (0, {hi:.6g}]")


def prop1_bounds(c, eps, y, q=None, U=None):
    """(probability bound, moment bound or None) for the suprema inequality."""
    _check_eps(eps, SQRT2M1, "prop1")
    if y < 1:
        raise DomainError("prop1: y must be >= 1")
    tail = math.exp(-y / (1.0 + eps) ** 2)
    prob = 2.0 * c * tail
    mom = None
    if q is not None:
        if q < 1 or U is None:
            raise DomainError("moment bound needs q >= 1 and U")
        mom = 2.0 * c * gamma_fn(q + 1) * ((1.0 + eps) ** 2 * U / y) ** q * tail
    return prob, mom


@dataclass
class TailModel:
    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: float
    theta: object = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        n = len(self.A)
        if self.B.shape != (n,) or self.a.shape != (n, n) or self.b.shape != (n, n):
            raise DomainError("TailModel shapes do not match")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.B))):
            raise DomainError("A and B must be finite")
        if self.c <= 0:
            raise DomainError("tail constant must be positive")

    @classmethod
    def from_functions(cls, theta, A, B, a, b, c):
        th = list(theta)
        n = len(th)
        Am = np.array([A(t) for t in th], dtype=float)
        Bm = np.array([B(t) for t in th], dtype=float)
        am = np.zeros((n, n))
        bm = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                am[i, j] = am[j, i] = a(th[i], th[j])
                bm[i, j] = bm[j, i] = b(th[i], th[j])
        return cls(Am, Bm, am, bm, c, th)

    @property
    def n(self):
        return len(self.A)

    @property
    def A_bar(self):
        return float(self.A.max())

    @property
    def B_bar(self):
        return float(self.B.max())

    @property
    def A_low(self):
        return float(self.A.min())

    @property
    def B_low(self):
        return float(self.B.min())

    @property
    def b_zero(self):
        return bool(np.all(self.B == 0) and np.all(self.b == 0))

    def check_semimetrics(self, tol=1e-10, n_triples=2000, seed=0):
        rng = np.random.default_rng(seed)
        for M in (self.a, self.b):
            if np.any(M < -tol) or not np.allclose(M, M.T, atol=tol):
                return False
            if self.n < 3:
                continue
            i, j, k = rng.integers(0, self.n, size=(3, n_triples))
            if np.any(M[i, k] > M[i, j] + M[j, k] + tol):
                return False
        return True


@dataclass
class EnvelopeTable:
    kind: str
    values: np.ndarray
    params: dict
    theoretical_bound: float
    index: object = None
    extra: dict = field(default_factory=dict)


class _LevelCapacity:
    """Capacities of sublevel sets, cached by membership mask."""

    def __init__(self, D, s, power):
        self.D = D
        self.s = s
        self.power = power
        self.cache = {}

    def __call__(self, mask, kappa):
        key = (mask.tobytes(), float(kappa))
        if key not in self.cache:
            idx = np.flatnonzero(mask)
            if len(idx) <= 1 or kappa == 0:
                val = 0.0
            else:
                E = greedy_provider(D=self.D[np.ix_(idx, idx)])
                fn = capacity_a if self.power == 2 else capacity_b
                val = fn(self.s, kappa, E)
            self.cache[key] = val
        return self.cache[key]


def first_type_prob_factor(eps):
    return (1.0 + math.log1p(math.log1p(eps)) ** -2) ** 2


def first_type_envelopes(model, eps, z, q=1, r=None, s1=None, s2=None,
                         E_override=None):
    """First-type upper functions V (probability) and U (moments).

    E_override(u, v) may replace the level-set capacity function by any
    upper bound; its use is recorded in the table params.
    """
    _check_eps(eps, SQRT2M1, "first type")
    if z < 1:
        raise DomainError("z must be >= 1")
    r = q if r is None else r
    s1 = s1 or certified_s_star()
    s2 = s2 or s1
    A, B = model.A, model.B
    Alow = model.A_low
    bzero = model.b_zero
    if Alow <= 0 and model.A_bar > 0:
        raise DomainError("first-type requires A_low > 0")
    Blow = model.B_low
    if not bzero and Blow <= 0:
        raise DomainError("first-type requires B_low > 0 unless B and b vanish")
    capA = _LevelCapacity(model.a, s1, 2)
    capB = _LevelCapacity(model.b, s2, 1)
    k = (1.0 + 1.0 / eps) ** 2
    e1 = (1.0 + eps) ** 2
    P = np.zeros(model.n)
    M = np.zeros(model.n)
    Es = np.zeros(model.n)
    for i in range(model.n):
        uA = (1.0 + eps) * A[i] / Alow
        uB = 1.0 if bzero else (1.0 + eps) * B[i] / Blow
        if E_override is not None:
            Ev = float(E_override(uA, uB))
        else:
            Ev = capA(A <= Alow * uA * (1 + 1e-14), Alow * uA)
            if not bzero:
                Ev += capB(B <= Blow * uB * (1 + 1e-14), Blow * uB)
        Es[i] = Ev
        lsum = ell(uA) + (0.0 if bzero else ell(uB))
        P[i] = 2.0 * k * Ev + e1 * lsum
        logAB = math.log(uA) + (0.0 if bzero else math.log(uB))
        M[i] = e1 * (2.0 * k * Ev + (eps + r) * logAB)
    V = e1 * (A * np.sqrt(P + e1 * z) + B * (P + e1 * z))
    U = e1 * (A * np.sqrt(M + e1 * z) + B * (M + e1 * z))
    prob = 2.0 * model.c * first_type_prob_factor(eps) * math.exp(-z)
    mom = (model.c * 2.0 ** (2.5 * q + 2) * gamma_fn(q + 1) * eps ** (-q - 4)
           * max(Alow, Blow) ** q * math.exp(-z))
    params = {"z": z, "eps": eps, "q": q, "r": r, "weights": (s1.kind, s2.kind),
              "E_source": "override" if E_override is not None else "greedy"}
    tV = EnvelopeTable("first_type_V", V, params, prob, model.theta,
                       {"P": P, "E": Es})
    tU = EnvelopeTable("first_type_U", U, params, mom, model.theta,
                       {"M": M, "E": Es})
    return tV, tU, {"probability": prob, "moment": mom}


# ---------------------------------------------------------------------------
# second type

def R_default(r, eps, tau1_bar, tau2_bar, b_zero=False):
    """Default R_r family: ell-based for r = 0, logarithmic for r > 0."""
    def R(u, v):
        if r == 0:
            val = ell_clamped(tau1_bar / u)
            if not b_zero:
                val += ell_clamped(tau2_bar / v)
            return val
        val = eps * max(math.log(tau1_bar / u), 0.0)
        if not b_zero:
            val += eps * max(math.log(tau2_bar / v), 0.0)
        return val
    return R


@dataclass
class PartitionFamily:
    """Cells Theta_alpha of a finite index set with scales tau1, tau2.

    members[i] lists model indices of cell i. s1, s2 are either weights or
    maps u -> weight; g_A, g_B default to the exact sup envelopes.
    """
    model: TailModel
    members: list
    tau1: np.ndarray
    tau2: np.ndarray
    s1: object = None
    s2: object = None
    g_A: object = None
    g_B: object = None
    lambda1: float = 1.0
    lambda2: float = 1.0
    R: object = None
    alphas: object = None

    def __post_init__(self):
        self.tau1 = np.asarray(self.tau1, dtype=float)
        self.tau2 = np.asarray(self.tau2, dtype=float)
        if self.lambda1 < 1 or self.lambda2 < 1:
            raise DomainError("lambda constants must be >= 1")
        if self.s1 is None:
            self.s1 = certified_s_star()
        if self.s2 is None:
            self.s2 = self.s1
        if self.g_A is None:
            self.g_A = self._sup_env(self.tau1, self.model.A)
        if self.g_B is None:
            self.g_B = self._sup_env(self.tau2, self.model.B)
        cover = np.zeros(self.model.n, dtype=bool)
        for m in self.members:
            cover[np.asarray(m, dtype=int)] = True
        if not cover.all():
            raise DomainError("cells must cover the index set")

    def union_mask(self, tau, u):
        mask = np.zeros(self.model.n, dtype=bool)
        for m, t in zip(self.members, tau):
            if t <= u * (1 + 1e-14):
                mask[np.asarray(m, dtype=int)] = True
        return mask

    def _sup_env(self, tau, F):
        order = np.argsort(tau)
        ts = tau[order]
        vals = np.array([F[np.asarray(self.members[i], dtype=int)].max() if len(self.members[i]) else 0.0
                         for i in order])
        run = np.maximum.accumulate(vals)

        def g(u):
            i = int(np.searchsorted(ts, u * (1 + 1e-14), side="right")) - 1
            return float(run[i]) if i >= 0 else 0.0
        return g

    def weight(self, which, u):
        s = self.s1 if which == 1 else self.s2
        return s(u) if callable(s) and not hasattr(s, "normalization_factor") else s


def script_R(fam, eps, r, R=None):
    """sum_j sum_k [g_A(tau1_bar d_j) v g_B(tau2_bar d_k)]^r exp(-R_r(...))."""
    t1b, t1l = fam.tau1.max(), fam.tau1.min()
    t2b, t2l = fam.tau2.max(), fam.tau2.min()
    bzero = fam.model.b_zero
    if t1l <= 0 or (not bzero and t2l <= 0):
        raise NumericalGuard("script_R", "zero scale makes the sum infinite")
    R = R or fam.R or R_default(r, eps, t1b, t2b, bzero)
    base = math.log1p(eps)
    J = int(math.floor(math.log(t1b / t1l) / base + 1e-12)) + 1
    K = 0 if bzero else int(math.floor(math.log(t2b / t2l) / base + 1e-12)) + 1
    total = 0.0
    for j in range(J + 1):
        u = t1b * (1.0 + eps) ** (-j)
        for k in range(K + 1):
            v = t2b * (1.0 + eps) ** (-k)
            g = fam.g_A(u) if bzero else max(fam.g_A(u), fam.g_B(v))
            total += (g ** r if r > 0 else 1.0) * math.exp(-R(u, v))
    if not math.isfinite(total):
        raise NumericalGuard("script_R", "summability condition fails")
    return total, J, K


def R_cap(eps, r=0, g_max=None, b_zero=False):
    """Closed-form caps of script_R for the default family."""
    base = 2.0 + math.log1p(math.log1p(eps)) ** -2
    if r == 0:
        return base if b_zero else base ** 2
    return 4.0 * g_max ** r * eps ** -4


def second_type_envelope(fam, eps, z, r=0, q=None):
    """Upper function over cells alpha plus its probability or moment bound."""
    _check_eps(eps, math.sqrt(2.0), "second type")
    if z < 1:
        raise DomainError("z must be >= 1")
    model = fam.model
    bzero = model.b_zero
    t1b, t2b = fam.tau1.max(), fam.tau2.max()
    R = fam.R or R_default(r, eps, t1b, t2b, bzero)
    cache = {}

    def E_prime(u, v):
        key = (u, v)
        if key in cache:
            return cache[key]
        m1 = fam.union_mask(fam.tau1, u)
        val = 0.0
        idx = np.flatnonzero(m1)
        kap = fam.g_A(u) / fam.lambda1
        if len(idx) > 1 and kap > 0:
            E = greedy_provider(D=model.a[np.ix_(idx, idx)])
            val += capacity_a(fam.weight(1, u), kap, E)
        if not bzero:
            m2 = fam.union_mask(fam.tau2, v)
            idx = np.flatnonzero(m2)
            kap = fam.g_B(v) / fam.lambda2
            if len(idx) > 1 and kap > 0:
                E = greedy_provider(D=model.b[np.ix_(idx, idx)])
                val += capacity_b(fam.weight(2, v), kap, E)
        cache[key] = val
        return val

    k = (1.0 + 1.0 / eps) ** 2
    vals = np.zeros(len(fam.members))
    Ehat = np.zeros_like(vals)
    Rhat = np.zeros_like(vals)
    for i in range(len(fam.members)):
        u, v = (1 + eps) * fam.tau1[i], (1 + eps) * fam.tau2[i]
        Ehat[i] = E_prime(u, v)
        Rhat[i] = R(u, v)
        inner = 2.0 * k * Ehat[i] + Rhat[i] + z
        gA = fam.g_A((1 + eps) ** 2 * fam.tau1[i])
        gB = 0.0 if bzero else fam.g_B((1 + eps) ** 2 * fam.tau2[i])
        vals[i] = (1 + eps) * gA * math.sqrt(inner) + (1 + eps) ** 2 * gB * inner
    sR, J, K = script_R(fam, eps, r, R)
    if r == 0:
        bound = 2.0 * model.c * sR * math.exp(-z)
    else:
        qq = r if q is None else q
        bound = (model.c * 2.0 ** (2.5 * qq + 1) * gamma_fn(qq + 1) * sR
                 * eps ** (-qq) * math.exp(-z))
    params = {"z": z, "eps": eps, "r": r, "J": J, "K": K, "script_R": sR}
    return EnvelopeTable("second_type", vals, params, bound, fam.alphas,
                         {"E_hat": Ehat, "R_hat": Rhat}), {"probability" if r == 0 else "moment": bound,
                                                          "script_R": sR}


# ---------------------------------------------------------------------------
# modulus of continuity

def modulus_prob_bound(c, eps, z, b_zero=False, single_ell_form=False):
    base = 2.0 + math.log1p(math.log1p(eps)) ** -2
    if single_ell_form:
        return 4.0 * c * base * math.exp(-z)
    return 4.0 * c * base ** 2 * math.exp(-z)


def modulus_envelopes(model, d, deltas, eps, z, theta0=None, s1=None, s2=None,
                      E_override=None, single_ell_form=None):
    """Upper function Delta -> V_hat for the local (theta0 given) or global modulus.

    d is the distance matrix defining the balls. For the global modulus the
    pair set is handled through its sup envelopes and the entropy doubling
    bound E2(s) <= 2 E(s/2) on the whole set.
    E_override(Delta) may supply an upper bound of the capacity term.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if z < 1:
        raise DomainError("z must be >= 1")
    d = np.asarray(d, dtype=float)
    s1 = s1 or certified_s_star()
    s2 = s2 or s1
    bzero = model.b_zero
    deltas = np.asarray(deltas, dtype=float)
    glob = theta0 is None
    if glob:
        D = float(d.max())
        c_eff = 2.0 * model.c

        def gA(u):
            m = d <= u * (1 + 1e-14)
            return float(model.a[m].max())

        def gB(u):
            m = d <= u * (1 + 1e-14)
            return float(model.b[m].max())

        def level(u):
            return np.ones(model.n, dtype=bool)

    else:
        dist0 = d[theta0]
        D = float(d.max())
        c_eff = model.c

        def gA(u):
            m = dist0 <= u * (1 + 1e-14)
            return float(model.a[theta0, m].max())

        def gB(u):
            m = dist0 <= u * (1 + 1e-14)
            return float(model.b[theta0, m].max())

        def level(u):
            return dist0 <= u * (1 + 1e-14)

    if np.any(deltas <= 0) or np.any(deltas > D * (1 + 1e-12)):
        raise DomainError("Delta must lie in (0, diameter]")

    def cap(Mtx, mask, kappa, power, s):
        idx = np.flatnonzero(mask)
        if len(idx) <= 1 or kappa == 0:
            return 0.0
        E0 = greedy_provider(D=Mtx[np.ix_(idx, idx)])
        if glob:
            # doubling bound for the pair set under 2 (x v y)
            E = closed_form_provider(lambda t: 2.0 * E0(t / 2.0), 2.0 * E0.diameter)
        else:
            E = E0
        fn = capacity_a if power == 2 else capacity_b
        return fn(s, kappa, E)

    Ehat = np.zeros(len(deltas))
    for i, Dl in enumerate(deltas):
        if E_override is not None:
            Ehat[i] = float(E_override(Dl))
            continue
        u = (1 + eps) * Dl
        m = level(u)
        Ehat[i] = cap(model.a, m, gA(u), 2, s1)
        if not bzero:
            Ehat[i] += cap(model.b, m, gB(u), 1, s2)
    if single_ell_form is None:
        # simplified form needs b = 0 and d = a, stated for the local case
        single_ell_form = (not glob) and bzero and bool(np.allclose(model.a, d))
    k = (1.0 + 1.0 / eps) ** 2
    e1 = (1.0 + eps) ** 2
    vals = np.zeros(len(deltas))
    if single_ell_form:
        Esup = float(Ehat.max())
        for i, Dl in enumerate(deltas):
            vals[i] = (1 + eps) ** 3 * Dl * math.sqrt(4.0 * k * Esup + e1 * (ell(D / Dl) + z))
        bound = modulus_prob_bound(c_eff, eps, z, single_ell_form=True)
    else:
        for i, Dl in enumerate(deltas):
            inner = 2.0 * k * Ehat[i] + e1 * (2.0 * ell(D / Dl) + z)
            vals[i] = (1 + eps) * gA(e1 * Dl) * math.sqrt(inner)
            if not bzero:
                vals[i] += e1 * gB(e1 * Dl) * inner
        bound = modulus_prob_bound(c_eff, eps, z)
    kind = "global_modulus" if glob else "local_modulus"
    params = {"z": z, "eps": eps, "diameter": D, "c": c_eff, "single_ell_form": single_ell_form}
    return EnvelopeTable(kind, vals, params, bound, deltas, {"E_hat": Ehat})
