"""Samplers for the processes behind the upper-function checks."""
import math

import numpy as np

from ..errors import DomainError, NumericalGuard

MAX_CHOL = 4096


# kernel density process

def kde_centering(kernel, density, h_grid, x_grid):
    """E K_h(X - x) by quadrature, shape [h, x]."""
    from scipy import integrate
    a, b = density.support
    out = np.zeros((len(h_grid), len(x_grid)))
    for i, h in enumerate(h_grid):
        for j, x in enumerate(x_grid):
            lo, hi = a, b
            if math.isfinite(kernel.support):
                lo, hi = max(a, x - h * kernel.support), min(b, x + h * kernel.support)
            if hi <= lo:
                continue
            f = lambda t: float(kernel(abs(t - x) / h)) * float(density.pdf(t))
            pts = [x] if lo < x < hi else None
            val, _ = integrate.quad(f, lo, hi, points=pts, limit=400, epsabs=1e-13,
                                    epsrel=1e-11)
            out[i, j] = val / h
    return out


def kde_kernel_matrix(kernel, X, h_grid, x_grid):
    """K_h(X_i - x) as an array [i, h, x]."""
    X = np.asarray(X, dtype=float)
    h = np.asarray(h_grid, dtype=float)[None, :, None]
    x = np.asarray(x_grid, dtype=float)[None, None, :]
    return kernel(np.abs(X[:, None, None] - x) / h) / h


def simulate_kernel_density_process(h_grid, x_grid, n, density, kernel, rng, centering=None):
    """n^-1 sum_i [K_h(X_i - x) - E K_h(X - x)] on the [h, x] grid."""
    if centering is None:
        centering = kde_centering(kernel, density, h_grid, x_grid)
    X = density.sampler(rng, n)
    return kde_kernel_matrix(kernel, X, h_grid, x_grid).mean(axis=0) - centering


def kde_running_process(h_grid, x_grid, n_max, density, kernel, rng, centering=None):
    """xi_h(x)(n) for every n = 1..n_max via cumulative sums, shape [n, h, x]."""
    if centering is None:
        centering = kde_centering(kernel, density, h_grid, x_grid)
    X = density.sampler(rng, n_max)
    S = np.cumsum(kde_kernel_matrix(kernel, X, h_grid, x_grid), axis=0)
    n = np.arange(1, n_max + 1)[:, None, None]
    return S / n - centering[None]


# white noise field

class WhiteNoiseField:
    """xi_h(t) = h^-d int K((t-u)/h) b(du), d = 1, on a fixed t grid.

    The noise lives on cells of width `mesh` covering the t range padded by
    h_max/2; each cell carries an independent N(0, mesh) increment.
    """

    def __init__(self, h_grid, t_grid, kernel, mesh):
        self.h = np.asarray(h_grid, dtype=float)
        self.t = np.asarray(t_grid, dtype=float)
        if mesh > self.h.min() / 8:
            raise DomainError("mesh coarser than h/8, discretization bias guard")
        self.mesh = mesh
        pad = self.h.max() / 2 + mesh
        lo, hi = self.t.min() - pad, self.t.max() + pad
        m = int(math.ceil((hi - lo) / mesh))
        self.u = lo + mesh * (np.arange(m) + 0.5)
        self.mats = [kernel(np.abs(self.t[:, None] - self.u[None, :]) / h) / h for h in self.h]

    def sample(self, rng, size=1):
        w = rng.standard_normal((self.u.size, size)) * math.sqrt(self.mesh)
        return np.stack([M @ w for M in self.mats])  # [h, t, size]

    def norms(self, rng, p=2.0, mu=1.0, size=1):
        """||xi_h||_p over [-mu/2, mu/2] by the midpoint rule on the t grid."""
        xi = self.sample(rng, size)
        inside = np.abs(self.t) <= mu / 2 + 1e-12
        dt = mu / inside.sum()
        return (np.sum(np.abs(xi[:, inside, :]) ** p, axis=1) * dt) ** (1.0 / p)  # [h, size]

    def variance(self, kernel_sq_integral):
        """Exact pointwise variance h^-1 int K^2 for interior t."""
        return kernel_sq_integral / self.h


def simulate_white_noise_field(h_grid, t_grid, kernel, mesh, rng, p=2.0, mu=1.0):
    field = WhiteNoiseField(h_grid, t_grid, kernel, mesh)
    xi = field.sample(rng)[..., 0]
    inside = np.abs(field.t) <= mu / 2 + 1e-12
    dt = mu / inside.sum()
    nrm = (np.sum(np.abs(xi[:, inside]) ** p, axis=1) * dt) ** (1.0 / p)
    return xi, nrm


def cos2_kernel():
    from ..empirical.localized import Kernel
    return Kernel(lambda u: np.where(u <= 0.5, np.cos(np.pi * u) ** 2, 0.0), 1.0,
                  1.5 * math.pi, 0.5, "cos2")


# Gaussian paths

def fbm_cov(t, alpha):
    t = np.asarray(t, dtype=float)
    T, S = np.meshgrid(t, t, indexing="ij")
    return 0.5 * (np.abs(T) ** alpha + np.abs(S) ** alpha - np.abs(T - S) ** alpha)


def levy_cov(points):
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] == 1 and P.shape[1] > 1:
        P = P.T
    nrm = np.sqrt((P ** 2).sum(1))
    D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    return 0.5 * (nrm[:, None] + nrm[None, :] - D)


def cholesky_factor(C, jitter=1e-12):
    if C.shape[0] > MAX_CHOL:
        raise DomainError(f"grid size above {MAX_CHOL}")
    scale = max(float(np.max(np.diag(C))), 1e-300)
    for k in range(6):
        try:
            return np.linalg.cholesky(C + jitter * scale * 10 ** k * np.eye(C.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise NumericalGuard("covariance", "not positive definite after jitter")


def ou_path(t, sigma, lam, rng, size=1):
    """Stationary OU by its exact AR(1) transition on an increasing grid."""
    t = np.asarray(t, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise DomainError("grid must be strictly increasing")
    v = sigma ** 2 / (2 * lam)
    out = np.empty((size, t.size))
    out[:, 0] = rng.standard_normal(size) * math.sqrt(v)
    for i in range(1, t.size):
        a = math.exp(-lam * (t[i] - t[i - 1]))
        out[:, i] = a * out[:, i - 1] + math.sqrt(v * (1 - a * a)) * rng.standard_normal(size)
    return out


def ou_cov(t, sigma, lam):
    t = np.asarray(t, dtype=float)
    return sigma ** 2 / (2 * lam) * np.exp(-lam * np.abs(t[:, None] - t[None, :]))


def simulate_gaussian_paths(kind, grid, rng, size=1, **params):
    """kind in {'fbm', 'ou', 'levy_grid'}; returns [size, len(grid)]."""
    if kind == "ou":
        return ou_path(grid, params.get("sigma", 1.0), params.get("lam", 1.0), rng, size)
    if kind == "fbm":
        C = fbm_cov(grid, params.get("alpha", 1.0))
    elif kind == "levy_grid":
        C = levy_cov(grid)
    else:
        raise DomainError(f"unknown path kind '{kind}'")
    L = cholesky_factor(C)
    return (L @ rng.standard_normal((L.shape[0], size))).T


# LIL / LL trackers

def lil_ll_tracker(running, j, n_max, normalizer, admissible=None):
    """sup over n in [j, n_max] of a normalized statistic, single pass.

    `running` has shape [n_max, ...] with running[n-1] the process at n;
    normalizer(n) maps it to the statistic array; admissible(n) masks it.
    """
    if j < 3:
        raise DomainError("j must be >= 3")
    if n_max > 64 * j:
        raise DomainError("n_max above the desk-scale cap 64 j")
    best = 0.0
    for n in range(j, n_max + 1):
        s = np.asarray(normalizer(n, running[n - 1]))
        if admissible is not None:
            m = admissible(n)
            if not np.any(m):
                continue
            s = s[np.asarray(m, dtype=bool)]
        best = max(best, float(np.max(s)))
    return best
