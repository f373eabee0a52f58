"""Shared deterministic quadrature helpers.

Tensor Gauss-Legendre over boxes with order escalation; the returned error
estimate is the last escalation difference.  All evaluation points are fed to
the integrand as a single (n, d) array, so vectorized integrands stay fast.
"""

from __future__ import annotations

import numpy as np

from .regions import Box, Region

ABS_TOL = 1e-9
REL_TOL = 1e-7

_rule_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _rule(order: int):
    if order not in _rule_cache:
        _rule_cache[order] = np.polynomial.legendre.leggauss(order)
    return _rule_cache[order]


def gauss_box(f, lo, hi, order: int) -> float:
    """Tensor Gauss-Legendre of ``f`` over the box [lo, hi] at a fixed order."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    nodes, weights = _rule(order)
    axes_pts = [0.5 * (a + b) + 0.5 * (b - a) * nodes for a, b in zip(lo, hi)]
    axes_wts = [0.5 * (b - a) * weights for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes_pts, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = np.asarray(f(pts), dtype=float).reshape([len(nodes)] * d)
    for w in reversed(axes_wts):
        vals = vals @ w
    return float(vals)


def box_integral(f, box: Box, abs_tol: float = ABS_TOL,
                 rel_tol: float = REL_TOL) -> tuple[float, float]:
    """Adaptive-order integral over a box; returns (value, error estimate)."""
    prev = gauss_box(f, box.lo, box.hi, 8)
    for order in (16, 32, 64, 96):
        cur = gauss_box(f, box.lo, box.hi, order)
        err = abs(cur - prev)
        if not np.isfinite(cur):
            raise ArithmeticError("integral is not finite")
        if err <= max(abs_tol, rel_tol * abs(cur)):
            return cur, err
        prev = cur
    return prev, err


def region_integral(f, region: Region, abs_tol: float = ABS_TOL,
                    rel_tol: float = REL_TOL) -> tuple[float, float]:
    total, err = 0.0, 0.0
    for b in region.boxes:
        v, e = box_integral(f, b, abs_tol, rel_tol)
        total += v
        err += e
    return total, err


def midpoint_grid(lo, hi, counts):
    """Cell midpoints and the common cell volume of a uniform grid on a box."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    counts = np.asarray(counts, dtype=int)
    axes = [a + (np.arange(n) + 0.5) * (b - a) / n
            for a, b, n in zip(lo, hi, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vol = float(np.prod((hi - lo) / counts))
    return pts, vol
