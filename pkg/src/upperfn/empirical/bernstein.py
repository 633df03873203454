"""Bernstein-type variance and range quantities of a generalized empirical process."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..errors import DomainError


@dataclass
class Density1D:
    """Bounded density on an interval, with a sampler for the MC fallback."""
    pdf: object
    support: tuple
    sampler: object = None
    f_inf: float = None
    name: str = "custom"


def uniform_density(a=0.0, b=1.0):
    return Density1D(lambda x: np.where((x >= a) & (x <= b), 1.0 / (b - a), 0.0),
                     (a, b), lambda rng, n: rng.uniform(a, b, n), 1.0 / (b - a), "uniform")


def beta22_density():
    return Density1D(lambda x: np.where((x >= 0) & (x <= 1), 6.0 * x * (1.0 - x), 0.0),
                     (0.0, 1.0), lambda rng, n: rng.beta(2.0, 2.0, n), 1.5, "beta22")


def expect(fn, density, points=None, rng=None, n_mc=200000):
    """E fn(X) by adaptive quadrature; MC with standard error if quad fails.

    Returns (value, error, method).
    """
    a, b = density.support
    g = lambda x: float(fn(x)) * float(density.pdf(x))
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(g, a, b, points=points, limit=400,
                                      epsabs=1e-12, epsrel=1e-10)
            return val, err, "quadrature"
        except integrate.IntegrationWarning:
            pass
    if density.sampler is None:
        raise DomainError("quadrature failed and the density has no sampler")
    rng = np.random.default_rng(0) if rng is None else rng
    x = density.sampler(rng, n_mc)
    v = np.asarray(fn(x), dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(n_mc)), "monte_carlo"


def _sup_abs(fn, density, n_grid=20001):
    a, b = density.support
    x = np.linspace(a, b, n_grid)
    return float(np.max(np.abs(fn(x))))


@dataclass
class BernsteinQuantities:
    A2: float
    B_inf: float
    a_f: float
    b_inf: float
    method: str
    error: float


def bernstein_quantities(G, density, h, hprime, n, points=None, G_sup=None):
    """(A_f^2(h), B_inf(h), a_f(h,h'), b_inf(h,h')) for iid data.

    G(h, x) must be vectorized in x. Sups over x use a dense grid on the
    support unless G_sup(h) gives the exact value.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    g1 = lambda x: G(h, x)
    diff = lambda x: G(h, x) - G(hprime, x)
    m2, e1, meth1 = expect(lambda x: g1(x) ** 2, density, points)
    d2, e2, meth2 = expect(lambda x: diff(x) ** 2, density, points)
    A2 = 2.0 * m2 / n
    a_f = math.sqrt(max(2.0 * d2 / n, 0.0))
    sup_h = G_sup(h) if G_sup is not None else _sup_abs(g1, density)
    B = (4.0 / 3.0) * sup_h / n
    bd = (4.0 / 3.0) * _sup_abs(diff, density) / n
    method = meth1 if meth1 == meth2 else "mixed"
    return BernsteinQuantities(A2, B, a_f, bd, method, max(e1, e2))


def bernstein_tail(z, A2, B):
    """2 exp(-z^2/(A^2 + z B))."""
    return min(1.0, 2.0 * math.exp(-z * z / (A2 + z * B)))
