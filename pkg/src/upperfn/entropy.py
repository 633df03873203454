"""Entropy providers, greedy covers, chaining capacities and two-metric nets."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .supremum import is_decreasing_on_grid, sup_grid_refine, sup_over_scales


def entropy_doubling_ball(N_d, r, delta):
    """ln(N_d) ([log2(r/delta)]_+ + 1), literal formula for a doubling ball."""
    if N_d < 1 or r <= 0 or delta <= 0:
        raise DomainError("need N_d >= 1, r > 0, delta > 0")
    return math.log(N_d) * (max(math.log2(r / delta), 0.0) + 1.0)


def entropy_log_hyperrectangle(k, t, sigma):
    """k (ln(1 + ln t) + [1 + ln(2/sigma)]_+)."""
    if t < 1:
        raise DomainError("t must be >= 1")
    if sigma <= 0 or k < 1:
        raise DomainError("need k >= 1 and sigma > 0")
    return k * (math.log(1.0 + math.log(t)) + max(0.0, 1.0 + math.log(2.0 / sigma)))


def distance_matrix(points, metric):
    if isinstance(metric, np.ndarray):
        return np.asarray(metric, dtype=float)
    pts = list(points)
    n = len(pts)
    if metric in ("abs", "euclidean"):
        P = np.asarray(pts, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        return np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    if metric == "sup":
        P = np.asarray(pts, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        return np.abs(P[:, None, :] - P[None, :, :]).max(-1)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = metric(pts[i], pts[j])
    return D


def greedy_cover_from_matrix(D, delta):
    """First-uncovered-in-input-order greedy cover with closed balls."""
    n = D.shape[0]
    covered = np.zeros(n, dtype=bool)
    centers = []
    for i in range(n):
        if not covered[i]:
            centers.append(i)
            covered |= D[i] <= delta
    return centers


def covering_number_greedy(points, metric, delta):
    """Greedy delta-cover; returns (count, center indices)."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    pts = list(points)
    if len(pts) == 0:
        return 0, []
    D = distance_matrix(pts, metric)
    centers = greedy_cover_from_matrix(D, delta)
    return len(centers), centers


@dataclass
class EntropyProvider:
    kind: str
    params: dict
    fn: object
    diameter: float

    def __call__(self, delta):
        if delta <= 0:
            raise DomainError("entropy argument must be positive")
        if delta >= self.diameter:
            return 0.0
        return float(self.fn(delta))

    @property
    def trivial(self):
        return self.kind == "zero" or self.diameter == 0.0


def zero_entropy():
    return EntropyProvider("zero", {}, lambda d: 0.0, 0.0)


def doubling_ball_provider(N_d, r):
    # one closed ball of radius r around the centre covers everything
    def fn(delta):
        if delta >= r:
            return 0.0
        return entropy_doubling_ball(N_d, r, delta)
    return EntropyProvider("doubling_ball", {"N_d": N_d, "r": r}, fn, 2.0 * r)


def log_hyperrectangle_provider(k, t):
    diam = math.log(t)

    def fn(sigma):
        return entropy_log_hyperrectangle(k, t, sigma)
    return EntropyProvider("log_hyperrectangle", {"k": k, "t": t}, fn, diam)


def closed_form_provider(fn, diameter, **params):
    return EntropyProvider("closed_form", params, fn, diameter)


class GreedyTable:
    """Monotone greedy covering counts at every distinct pairwise distance."""

    def __init__(self, D):
        self.D = np.asarray(D, dtype=float)
        n = self.D.shape[0]
        self.n = n
        if n == 0:
            self.thresholds = np.array([0.0])
            self.counts = np.array([0])
            return
        th = np.unique(self.D)
        counts = np.array([len(greedy_cover_from_matrix(self.D, t)) for t in th])
        # any cover at radius t <= delta is also a cover at radius delta
        self.counts = np.minimum.accumulate(counts)
        self.thresholds = th

    def count(self, delta):
        i = int(np.searchsorted(self.thresholds, delta, side="right")) - 1
        if i < 0:
            return self.n
        return int(self.counts[i])


def greedy_provider(points=None, metric=None, D=None):
    if D is None:
        D = distance_matrix(points, metric)
    table = GreedyTable(D)
    diam = float(D.max()) if D.size else 0.0

    def fn(delta):
        c = table.count(delta)
        return math.log(c) if c > 0 else 0.0
    prov = EntropyProvider("greedy_finite", {"n": table.n}, fn, diam)
    prov.table = table
    return prov


def restrict_greedy(D, mask):
    idx = np.flatnonzero(mask)
    return greedy_provider(D=np.asarray(D)[np.ix_(idx, idx)])


def _capacity(s, kappa, E, power, J=200):
    if kappa == 0 or E.trivial:
        return 0.0
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    phi = lambda d: kappa * s(d) / (48.0 * d)
    w = lambda d: d ** (-power)
    F = lambda d: E(phi(d))
    grid = 2.0 ** (np.arange(-J, J + 1, 4) / 2.0)
    if is_decreasing_on_grid(phi, grid):
        val, _ = sup_over_scales(w, F, J=J)
        return val
    val, _ = sup_grid_refine(lambda d: w(d) * F(d), grid[0], grid[-1], n=4001)
    return val


def capacity_a(s, kappa, E, J=200):
    """sup_delta delta^{-2} E(kappa s(delta) / (48 delta))."""
    return _capacity(s, kappa, E, 2, J)


def capacity_b(s, kappa, E, J=200):
    """sup_delta delta^{-1} E(kappa s(delta) / (48 delta))."""
    return _capacity(s, kappa, E, 1, J)


def chaining_capacity(s1, s2, kappa, E_a, E_b, J=200):
    return capacity_a(s1, kappa[0], E_a, J) + capacity_b(s2, kappa[1], E_b, J)


@dataclass
class DoubleNet:
    centers: list
    radii: tuple
    cardinality_bound: int
    cells: dict = field(default_factory=dict)


def line_cover(x):
    """Exact minimal closed-ball cover for points on a line, centres at data points.

    Returns cover(D, delta) -> centre indices; D is ignored, distances are
    |x_i - x_j| in the order of `x`.
    """
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")

    def cover(D, delta):
        xs = x[order]
        centers, i, n = [], 0, xs.size
        while i < n:
            # centre at the furthest point within delta of the leftmost uncovered one
            j = int(np.searchsorted(xs, xs[i] + delta, side="right")) - 1
            centers.append(int(order[j]))
            i = int(np.searchsorted(xs, xs[j] + delta, side="right"))
        return centers
    return cover


def build_double_net(points, d1, d2, radius_pairs, covers=None):
    """Net whose members are close in both metrics at every radius pair.

    For each pair, covers at half radius in each metric assign every point to
    its first covering centre. Points sharing all assignments form a cell; the
    first point of each cell is kept. `covers` = (cover1, cover2), each mapping
    (D, delta) to centre indices; greedy covers by default, so the cardinality
    bound is the product of the cover sizes actually used.
    """
    pts = list(points)
    n = len(pts)
    D1 = distance_matrix(pts, d1)
    D2 = distance_matrix(pts, d2)
    c1, c2 = covers or (greedy_cover_from_matrix, greedy_cover_from_matrix)
    labels = [[] for _ in range(n)]
    bound = 1
    for (r1, r2) in radius_pairs:
        if r1 <= 0 or r2 <= 0:
            raise DomainError("radii must be positive")
        for D, r, cov in ((D1, r1, c1), (D2, r2, c2)):
            cen = cov(D, r / 2.0)
            bound *= len(cen)
            C = np.array(cen)
            for i in range(n):
                labels[i].append(int(C[np.argmax(D[i, C] <= r / 2.0)]))
    cells = {}
    for i in range(n):
        cells.setdefault(tuple(labels[i]), i)
    centers = sorted(cells.values())
    rad = (min(p[0] for p in radius_pairs), min(p[1] for p in radius_pairs))
    return DoubleNet(centers, rad, bound, cells)
