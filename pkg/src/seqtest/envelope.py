"""Convex envelope of ``H`` on a uniform grid.

The optimal value satisfies ``V - 2 Psi / K = conv(H)``, so the contact
points of the envelope's affine piece are the stopping boundaries. This gives
a route to the boundaries that shares nothing with the tangent solver except
``H`` itself, and is the only route for the kinked classic penalty.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from . import analysis
from .analysis import ProblemParams
from .errors import DegenerateRegime, MultipleContinuationRegions, ParameterError
from .penalty import PenaltySpec
from .solver import BoundarySolution, Kind

GRID_EPS = 1e-9
DEPTH_TOL = 1e-11


@dataclass
class EnvelopeResult:
    grid: np.ndarray
    h_values: np.ndarray
    envelope_values: np.ndarray
    hull_indices: np.ndarray
    affine_segments: list = field(default_factory=list)
    penalty: PenaltySpec = None
    params: ProblemParams = None


def lower_hull(x, y):
    """Indices of the lower convex hull of points sorted by ``x`` (Andrew's monotone chain).

    Collinear points are dropped.
    """
    xs, ys = x.tolist(), y.tolist()
    hull = []
    for i, (px, py) in enumerate(zip(xs, ys)):
        while len(hull) >= 2:
            j, k = hull[-2], hull[-1]
            ox, oy = xs[j], ys[j]
            if (xs[k] - ox) * (py - oy) - (ys[k] - oy) * (px - ox) <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=np.intp)


def convex_envelope(p: PenaltySpec, params: ProblemParams, n: int = 100_000,
                    eps: float = GRID_EPS, depth_tol: float = DEPTH_TOL) -> EnvelopeResult:
    """Sample ``H`` on ``n`` points of ``[eps, 1 - eps]`` and take its lower hull.

    ``H`` diverges to ``+inf`` at both ends, so clipping the domain never
    removes a contact point. A kink of the penalty is inserted into the grid.
    Gaps between hull vertices count as affine segments only when ``H``
    rises more than ``depth_tol`` above the chord somewhere inside them.
    """
    if n < 1000:
        raise ParameterError(f"envelope grid needs at least 1000 points, got {n}")
    grid = np.linspace(eps, 1.0 - eps, n)
    if p.kink is not None:
        grid = np.union1d(grid, [p.kink])
    hv = np.asarray(analysis.h(p, params, grid))
    idx = lower_hull(grid, hv)
    env = np.interp(grid, grid[idx], hv[idx])
    segments = []
    for left, right in zip(idx[:-1], idx[1:]):
        if right - left < 2:
            continue
        depth = float(np.max(hv[left + 1:right] - env[left + 1:right]))
        if depth > depth_tol:
            slope = (hv[right] - hv[left]) / (grid[right] - grid[left])
            segments.append((float(grid[left]), float(grid[right]), float(slope)))
    return EnvelopeResult(grid, hv, env, idx, segments, p, params)


def _refine(p, params, x0, slope, grid):
    """Solve ``H'(x) = slope`` near the grid contact ``x0``; keep ``x0`` if not bracketed."""
    i = int(np.searchsorted(grid, x0))
    for width in (2, 8, 32):
        lo, hi = grid[max(i - width, 0)], grid[min(i + width, grid.size - 1)]
        if p.kink is not None and lo <= p.kink <= hi:
            return x0

        def f(x):
            return float(analysis.h1(p, params, x)) - slope

        if f(lo) * f(hi) < 0:
            return bisect(f, lo, hi, xtol=1e-15, maxiter=200)
    return x0


def boundaries_from_envelope(e: EnvelopeResult, refine: bool = True):
    """Left and right contact points of the single affine segment."""
    if not e.affine_segments:
        raise DegenerateRegime("envelope coincides with H: stop immediately")
    if len(e.affine_segments) > 1:
        raise MultipleContinuationRegions(
            f"{len(e.affine_segments)} affine segments: {e.affine_segments}")
    a, b, slope = e.affine_segments[0]
    if refine:
        a = _refine(e.penalty, e.params, a, slope, e.grid)
        b = _refine(e.penalty, e.params, b, slope, e.grid)
    return a, b


def solve_via_envelope(p: PenaltySpec, params: ProblemParams, n: int = 100_000) -> BoundarySolution:
    """Boundaries from the envelope, packaged like a tangent solve (``method="envelope"``)."""
    e = convex_envelope(p, params, n)
    try:
        a, b = boundaries_from_envelope(e)
    except DegenerateRegime:
        return BoundarySolution(Kind.DEGENERATE, params.K, method="envelope")
    ha, hb = (float(v) for v in analysis.h(p, params, np.array([a, b])))
    slope = (hb - ha) / (b - a)
    return BoundarySolution(Kind.TWO_BOUNDARY, params.K, a_star=a, b_star=b,
                            slope=slope, intercept=ha - a * slope, method="envelope",
                            diagnostics={"grid_points": int(e.grid.size)})
