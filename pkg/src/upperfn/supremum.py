"""Suprema of w(x) F(x) with w nonincreasing and F nondecreasing.

On [l, r] the product is at most w(l) F(r), so a geometric branch-and-bound
brackets the sup to a relative gap, including sups sitting on a jump of F.
The upper end of the bracket is returned, which is the safe side for
anything fed into an upper function.
"""
import heapq
import math

import numpy as np

from .errors import CapacityInfinite, NumericalGuard


def _eval(f, x):
    v = float(f(x))
    return v if math.isfinite(v) else math.inf


def sup_monotone_product(w, F, lo, hi, n_seed=401, rtol=1e-7, max_iter=1000000,
                         include_lo_limit=True, seed=None):
    """sup over x in (lo, hi] of w(x) F(x).

    `lo` is an open end; with include_lo_limit the limit w(lo) F(lo+) is
    included. Returns (upper, argmax, attained).
    """
    xs = np.geomspace(lo, hi, n_seed) if seed is None else np.asarray(seed, float)
    wv = np.array([_eval(w, x) for x in xs])
    Fv = np.array([_eval(F, x) for x in xs])
    vals = wv * Fv
    vals[np.isnan(vals)] = 0.0
    best_i = int(np.argmax(vals))
    best, arg = float(vals[best_i]), float(xs[best_i])
    if include_lo_limit:
        v0 = _eval(w, xs[0]) * _eval(F, xs[0] * (1 + 1e-15))
        if v0 > best:
            best, arg = v0, float(xs[0])
    heap = []
    for i in range(len(xs) - 1):
        ub = wv[i] * Fv[i + 1]
        if ub > best * (1 + rtol):
            heapq.heappush(heap, (-ub, xs[i], xs[i + 1], wv[i], Fv[i + 1]))
    it = 0
    while heap:
        negub, a, b, wa, Fb = heap[0]
        if -negub <= best * (1 + rtol) or b / a - 1.0 < 1e-13:
            break
        heapq.heappop(heap)
        it += 1
        if it > max_iter:
            raise NumericalGuard("supremum", "branch-and-bound did not converge")
        m = math.sqrt(a * b)
        wm, Fm = _eval(w, m), _eval(F, m)
        vm = wm * Fm
        if vm > best:
            best, arg = vm, m
        for (l, r, wl, Fr) in ((a, m, wa, Fm), (m, b, wm, Fb)):
            ub = wl * Fr
            if ub > best * (1 + rtol):
                heapq.heappush(heap, (-ub, l, r, wl, Fr))
    upper = max(best, -heap[0][0]) if heap else best
    return upper, arg, best


def is_decreasing_on_grid(f, xs):
    v = np.array([f(x) for x in xs])
    return bool(np.all(np.diff(v) <= 1e-14 * np.abs(v[:-1])))


def sup_over_scales(w, F, J=200, lo=None, rtol=1e-7, widen=True):
    """sup over delta > 0 (or delta > lo) of w(delta) F(delta).

    Scan on delta = 2^{j/2} (or lo 2^{j/2}, j >= 0). A maximum on the outer
    edge after one doubling of J is reported as a possibly infinite sup.
    The scan points then seed the branch-and-bound.
    Returns (value, argmax); argmax is None when the sup is 0.
    """
    g = lambda x: w(x) * F(x)
    for attempt in range(2):
        if lo is None:
            xs = 2.0 ** (np.arange(-J, J + 1) / 2.0)
        else:
            xs = lo * 2.0 ** (np.arange(0, 2 * J + 1) / 2.0)
        vals = np.array([g(x) for x in xs])
        if not np.all(np.isfinite(vals)):
            raise CapacityInfinite("non-finite value on the scale grid")
        i = int(np.argmax(vals))
        if vals[i] <= 0.0 and lo is None:
            return 0.0, None
        left_edge = (i == 0) and lo is None
        right_edge = i == len(xs) - 1
        if not (left_edge or right_edge):
            break
        if not widen or attempt == 1:
            raise CapacityInfinite(f"supremum attained at grid boundary (J={J})")
        J *= 2
    up, arg, _ = sup_monotone_product(w, F, xs[0], xs[-1], rtol=rtol, seed=xs,
                                      include_lo_limit=lo is not None)
    return up, arg


def sup_grid_refine(f, lo, hi, n=2001, rounds=6):
    """Plain log-grid sup with local zoom, for maps without monotone structure."""
    xs = np.geomspace(lo, hi, n)
    v = np.array([f(x) for x in xs])
    i = int(np.argmax(v))
    best, arg = float(v[i]), float(xs[i])
    for _ in range(rounds):
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, len(xs) - 1)]
        xs = np.geomspace(a, b, 101)
        v = np.array([f(x) for x in xs])
        i = int(np.argmax(v))
        if v[i] > best:
            best, arg = float(v[i]), float(xs[i])
    return best, arg
