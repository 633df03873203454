"""Generic description of a generalized empirical process G(h, x)."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass
class GClassModel:
    """G(h, x) with h = (h^(k), h_(k)) and the envelope G_inf(h^(k)).

    D_maps holds (D_0, D_{k+1}, ..., D_m); L_maps holds (L_{k+1}, ..., L_m).
    G_low(n) and G_high(n) are inf and sup of G_inf over the bandwidth set at n.
    """
    G: object
    G_inf: object
    m: int
    k: int
    G_low: object
    G_high: object
    D_maps: tuple = ()
    L_maps: tuple = ()
    N: float = 0.0
    R: float = 1.0
    name: str = "custom"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (1 <= self.k <= self.m):
            raise DomainError("need 1 <= k <= m")
        if len(self.L_maps) not in (0, self.m - self.k):
            raise DomainError("L_maps must have m - k entries")

    def check_boundedness(self, hs, xs, tol=1e-12):
        """|G(h, x)| <= G_inf(h^(k)) on sampled points; returns a witness or None."""
        for h in hs:
            v = np.abs(np.asarray(self.G(h, xs), dtype=float))
            bound = self.G_inf(h)
            i = int(np.argmax(v))
            if v[i] > bound * (1 + tol):
                return (h, xs[i], float(v[i]), float(bound))
        return None

    def check_ratio(self, n, hk_samples, G_j, G_j_low):
        """G_inf(h)/G_low(n) >= G_{j,n}(h_j)/G_low_{j,n} for sampled h^(k)."""
        for hk in hk_samples:
            lhs = self.G_inf(hk) / self.G_low(n)
            for j in range(self.k):
                if G_j[j](hk[j]) / G_j_low[j](n) > lhs * (1 + 1e-12):
                    return (hk, j)
        return None


def check_nesting(H_tilde, H, m_values, sample):
    """Union of H_tilde(n) over n in [m, 2m] inside H(m) on sampled points.

    H_tilde(n) and H(n) return (lo, hi) boxes per coordinate; `sample` is
    the number of points drawn per box.
    """
    rng = np.random.default_rng(0)
    for m in m_values:
        lo_m, hi_m = (np.asarray(a) for a in H(m))
        for n in range(m, 2 * m + 1):
            lo, hi = (np.asarray(a) for a in H_tilde(n))
            pts = rng.uniform(lo, hi, size=(sample, lo.size))
            if np.any(pts < lo_m - 1e-15) or np.any(pts > hi_m + 1e-15):
                return (m, n)
    return None
