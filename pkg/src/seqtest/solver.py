"""Common-tangent solve for the optimal stopping boundaries.

The free-boundary system reduces to finding ``A < B`` with
``H'(A) = H'(B)`` and ``H(B) - H(A) = H'(A) (B - A)``. The pair is found by
nested bisection: the inner loop solves ``H'(B) = H'(A)`` on the right convex
flank of ``H`` and the outer loop zeroes the secant residual in ``A``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis
from .analysis import CLIP, ProblemParams, u_boundaries
from .errors import BracketError, ParameterError, SolverFailure, UnsupportedPenaltyError
from .penalty import PenaltySpec, check_open_unit
from .roots import bisect_root

DEFAULT_TOL = 1e-12
RESIDUAL_TOL = 1e-10
WIDEN = 1e-10


class Kind(str, enum.Enum):
    DEGENERATE = "degenerate"
    TWO_BOUNDARY = "two_boundary"


class Decision(str, enum.Enum):
    STOP = "stop"
    CONTINUE = "continue"


@dataclass(frozen=True)
class BoundarySolution:
    """Outcome of a boundary solve.

    ``slope`` and ``intercept`` describe the common tangent of ``H``. For
    penalties without a set ``U`` (the kinked classic penalty) the
    ``pi_star_*`` and bracket fields are NaN.
    """

    kind: Kind
    K: float
    a_star: float = math.nan
    b_star: float = math.nan
    pi_star_lo: float = math.nan
    pi_star_hi: float = math.nan
    pi_under: float = math.nan
    pi_over: float = math.nan
    slope: float = math.nan
    intercept: float = math.nan
    method: str = "tangent"
    fallback: bool = False
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def degenerate(self) -> bool:
        return self.kind is Kind.DEGENERATE

    def as_dict(self) -> dict:
        out = {
            "kind": self.kind.value, "K": self.K, "A": self.a_star, "B": self.b_star,
            "pi_lo": self.pi_star_lo, "pi_hi": self.pi_star_hi,
            "pi_under": self.pi_under, "pi_over": self.pi_over,
            "slope": self.slope, "intercept": self.intercept,
            "degenerate": self.degenerate, "method": self.method, "fallback": self.fallback,
        }
        return out


def _root(f, a, b, tol):
    return bisect_root(f, a, b, xtol=tol, ftol=tol)


def _left_bracket(f, hi):
    """Push the left end toward 0 until ``f`` is negative there (``f(0+) = -inf``)."""
    lo = min(CLIP, 0.5 * hi)
    while f(lo) > 0:
        lo *= 1e-8
        if lo < 1e-300:
            raise BracketError("H' does not diverge to -inf near 0")
    return lo


def _right_bracket(f, lo):
    """Push the right end toward 1 until ``f`` is positive there."""
    gap = min(CLIP, 0.5 * (1.0 - lo))
    while f(1.0 - gap) < 0:
        gap *= 1e-2
        if gap < 1e-16:
            raise BracketError("H' does not diverge to +inf within float resolution of 1")
    return 1.0 - gap


def _check_tol(tol):
    if not (1e-14 <= tol <= 1e-6):
        raise ParameterError(f"tol must lie in [1e-14, 1e-6], got {tol!r}")


def solve(p: PenaltySpec, params: ProblemParams, tol: float = DEFAULT_TOL,
          fallback: bool = True) -> BoundarySolution:
    """Optimal stopping boundaries for a C^2 penalty.

    Returns a ``DEGENERATE`` solution when ``Ag(pi0) >= -1/K``. When the
    secant residual shows no sign change even after widening the bracket the
    boundaries are taken from the convex envelope (``fallback=True``) or
    :class:`SolverFailure` is raised.
    """
    if not p.smooth:
        raise UnsupportedPenaltyError(f"{p.name}: use envelope.solve_via_envelope")
    _check_tol(tol)
    K = params.K
    u = u_boundaries(p, params, xtol=tol)
    if not u.nonempty:
        return BoundarySolution(Kind.DEGENERATE, K)
    lo_star, hi_star = u.pi_star_lo, u.pi_star_hi

    def dh(x):
        return float(analysis.h1(p, params, x))

    def hv(x):
        return float(analysis.h(p, params, x))

    dh_lo, dh_hi = dh(lo_star), dh(hi_star)

    def shifted(target):
        return lambda x: dh(x) - target

    f_under = shifted(dh_hi)
    pi_under = _root(f_under, _left_bracket(f_under, lo_star), lo_star, tol)
    if p.symmetric:
        pi_over = 1.0 - pi_under
    else:
        f_over = shifted(dh_lo)
        pi_over = _root(f_over, hi_star, _right_bracket(f_over, hi_star), tol)

    base = dict(kind=Kind.TWO_BOUNDARY, K=K, pi_star_lo=lo_star, pi_star_hi=hi_star,
                pi_under=pi_under, pi_over=pi_over)

    if p.symmetric:
        a = _root(dh, pi_under, lo_star, tol)
        return _finish(base, a, 1.0 - a, dh, hv)

    def b_of(a):
        target = dh(a)
        if target <= dh_hi:
            return hi_star
        if target >= dh_lo:
            return pi_over
        return _root(shifted(target), hi_star, pi_over, tol)

    def secant(a):
        b = b_of(a)
        return hv(b) - hv(a) - dh(a) * (b - a)

    a_lo, a_hi = pi_under, lo_star
    for attempt in range(2):
        s_lo, s_hi = secant(a_lo), secant(a_hi)
        if s_lo * s_hi < 0:
            a = _root(secant, a_lo, a_hi, tol)
            return _finish(base, a, b_of(a), dh, hv)
        a_lo, a_hi = max(a_lo - WIDEN, CLIP), a_hi + WIDEN

    diagnostics = dict(pi_under=pi_under, pi_star_lo=lo_star, pi_star_hi=hi_star,
                       pi_over=pi_over, secant_lo=s_lo, secant_hi=s_hi)
    if not fallback:
        raise SolverFailure(f"{p.name}, K={K}: secant residual has no sign change", diagnostics)
    from .envelope import solve_via_envelope

    env = solve_via_envelope(p, params)
    return replace(env, pi_star_lo=lo_star, pi_star_hi=hi_star, pi_under=pi_under,
                   pi_over=pi_over, fallback=True, diagnostics=diagnostics)


def _finish(base, a, b, dh, hv):
    slope = dh(a)
    intercept = hv(a) - a * slope
    residuals = {"tangent": abs(dh(b) - slope),
                 "secant": abs(hv(b) - hv(a) - slope * (b - a))}
    return BoundarySolution(a_star=a, b_star=b, slope=slope, intercept=intercept,
                            diagnostics={"residuals": residuals}, **base)


def solve_penalty(p: PenaltySpec, params: ProblemParams, tol: float = DEFAULT_TOL,
                  n_grid: int = 100_000) -> BoundarySolution:
    """Route smooth penalties to :func:`solve`, kinked ones to the envelope."""
    if p.smooth:
        return solve(p, params, tol)
    from .envelope import solve_via_envelope

    return solve_via_envelope(p, params, n_grid)


def tangent_residuals(p: PenaltySpec, params: ProblemParams, sol: BoundarySolution):
    """``(|H'(A) - H'(B)|, |H(B) - H(A) - H'(A)(B - A)|)``."""
    a, b = sol.a_star, sol.b_star
    dha = float(analysis.h1(p, params, a))
    dhb = float(analysis.h1(p, params, b))
    sec = float(analysis.h(p, params, b) - analysis.h(p, params, a)) - dha * (b - a)
    return abs(dha - dhb), abs(sec)


@dataclass(frozen=True)
class ValueFunction:
    """``V = g`` off ``(A*, B*)`` and ``2 Psi / K + slope * pi + intercept`` on it."""

    solution: BoundarySolution
    penalty: PenaltySpec
    params: ProblemParams

    def __call__(self, pi):
        return value_at(self, pi)


def value_function(p: PenaltySpec, params: ProblemParams, tol: float = DEFAULT_TOL) -> ValueFunction:
    return ValueFunction(solve_penalty(p, params, tol), p, params)


def value_at(v: ValueFunction, pi):
    pi = check_open_unit(pi)
    g = v.penalty.g(pi)
    sol = v.solution
    if sol.degenerate:
        return g
    inside = (pi > sol.a_star) & (pi < sol.b_star)
    if not np.any(inside):
        return g
    x = np.where(inside, pi, 0.5)
    cont = 2.0 / sol.K * analysis.psi(x) + sol.slope * x + sol.intercept
    return np.where(inside, cont, g)[()]


def optimal_stop_decision(v: ValueFunction, pi: float) -> Decision:
    pi = check_open_unit(pi)
    sol = v.solution
    if not sol.degenerate and sol.a_star < pi < sol.b_star:
        return Decision.CONTINUE
    return Decision.STOP
