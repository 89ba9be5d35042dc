"""Composite Gauss rules on graded panels.

Densities here have three awkward features: an algebraic branch point at
the threshold (E^p), Lorentzian peaks of width ~omega at each pole, and,
for Fourier integrals, an oscillating kernel.  Panels are graded
geometrically around every peak, subdivided to at most one kernel period,
and the panel touching zero uses Gauss-Jacobi nodes so the E^p factor is
integrated exactly.

A rule is returned as ``(nodes, weights)`` such that ``sum(w * f(x))``
approximates the integral of ``f`` itself (the Jacobi weights are divided
by ``x**p`` at their nodes), so callers never split off the power.
"""

from functools import lru_cache
import math

import numpy as np
from scipy.special import roots_jacobi

from .errors import QuadratureNonconvergence

DEFAULT_ORDER = 24
CHECK_ORDER = 16
MAX_PANELS = 400_000


@lru_cache(maxsize=None)
def gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


@lru_cache(maxsize=None)
def gauss_jacobi_left(order, power):
    """Nodes/weights on [-1, 1] for the weight (1 + x)**power."""
    return roots_jacobi(order, 0.0, power)


def composite_rule(breaks, order=DEFAULT_ORDER, left_power=0.0):
    """Nodes and weights of the composite rule on sorted ``breaks``.

    If ``breaks[0] == 0`` and ``left_power != 0`` the first panel is a
    Gauss-Jacobi panel for integrands behaving like x**left_power.
    """
    breaks = np.asarray(breaks, dtype=float)
    a = breaks[:-1]
    b = breaks[1:]
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x
    weights = half[:, None] * w
    if left_power != 0.0 and breaks[0] == 0.0:
        xj, wj = gauss_jacobi_left(order, float(left_power))
        h = breaks[1]
        nj = 0.5 * h * (1.0 + xj)
        nodes[0] = nj
        weights[0] = (0.5 * h) ** (left_power + 1.0) * wj / nj**left_power
    return nodes.ravel(), weights.ravel()


def graded_breaks(lo, hi, centers=(), halfwidths=(), max_len=None, origin_scales=()):
    """Breakpoints on [lo, hi] graded geometrically around each center.

    Around a center c with half-width w the points c +- w 2^k (k >= -1)
    are inserted, so every panel is about as long as its distance to the
    nearest peak.  ``origin_scales`` adds s 2^k grading next to ``lo``.
    ``max_len`` caps the panel length.
    """
    pts = [lo, hi]
    span = hi - lo
    for c, w in zip(centers, halfwidths):
        if lo < c < hi:
            pts.append(c)
        d = 0.5 * w
        while d < span:
            for p in (c - d, c + d):
                if lo < p < hi:
                    pts.append(p)
            d *= 2.0
    for s in origin_scales:
        d = s
        while d < span:
            pts.append(lo + d)
            d *= 2.0
    pts = np.unique(np.asarray(pts, dtype=float))
    if max_len is not None and np.isfinite(max_len):
        pts = subdivide(pts, max_len)
    return pts


def subdivide(breaks, max_len):
    """Split every panel longer than ``max_len`` into equal pieces."""
    breaks = np.asarray(breaks, dtype=float)
    lengths = np.diff(breaks)
    counts = np.maximum(1, np.ceil(lengths / max_len).astype(np.int64))
    total = int(counts.sum())
    if total > MAX_PANELS:
        raise QuadratureNonconvergence(
            f"panel budget exceeded ({total} > {MAX_PANELS}); the kernel oscillates too fast for this range"
        )
    if total == len(lengths):
        return breaks
    out = np.empty(total + 1)
    pos = 0
    for left, length, n in zip(breaks[:-1], lengths, counts):
        out[pos:pos + n] = left + length * np.arange(n) / n
        pos += n
    out[-1] = breaks[-1]
    return out


def integrate(f, breaks, left_power=0.0, order=DEFAULT_ORDER, check_order=CHECK_ORDER):
    """Integrate vectorised ``f`` over the panels; returns (value, error estimate)."""
    x, w = composite_rule(breaks, order, left_power)
    value = np.sum(w * f(x))
    if check_order is None:
        return value, 0.0
    xc, wc = composite_rule(breaks, check_order, left_power)
    coarse = np.sum(wc * f(xc))
    return value, float(abs(value - coarse))


def cap_length(breaks, t, periods=1.0):
    """Limit panels to ``periods`` periods of exp(i t x)."""
    if t == 0:
        return np.asarray(breaks, dtype=float)
    return subdivide(breaks, periods * 2.0 * math.pi / abs(t))
