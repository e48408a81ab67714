"""Dependence of the boundaries on the information ratio ``K``."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .analysis import ProblemParams, psi, psi1, psi2
from .errors import DomainError, ParameterError
from .penalty import PenaltySpec
from .solver import DEFAULT_TOL, BoundarySolution, solve, solve_penalty

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-10


def boundary_derivatives(p: PenaltySpec, params: ProblemParams, sol: BoundarySolution):
    """``(dA*/dK, dB*/dK)`` from the implicit-function closed forms.

    Both share the numerator structure ``Psi(B) - Psi(A) - Psi'(x)(B - A)``
    scaled by ``2 / K^2`` and divide by ``H''(x) (B - A)``, with ``x = A`` or
    ``x = B``. Valid for kinked penalties as long as neither contact sits on
    the kink.
    """
    if sol.degenerate:
        raise DomainError("boundary derivatives are undefined in the degenerate regime")
    K = params.K
    a, b = sol.a_star, sol.b_star
    width = b - a
    chord = float(psi(b) - psi(a))
    out = []
    for x in (a, b):
        curvature = float(p.g2(x) - 2.0 / K * psi2(x))
        denom = curvature * width
        if not denom > 0:
            raise ArithmeticError(f"H''({x!r}) (B - A) = {denom!r}; expected > 0")
        out.append(2.0 / K**2 * (chord - float(psi1(x)) * width) / denom)
    return tuple(out)


@dataclass
class SweepRow:
    K: float
    a_star: Optional[float] = None
    b_star: Optional[float] = None
    pi_star_lo: Optional[float] = None
    pi_star_hi: Optional[float] = None
    dA_dK: Optional[float] = None
    dB_dK: Optional[float] = None
    method: str = "tangent"
    failed: bool = False
    note: str = ""

    @property
    def degenerate(self) -> bool:
        return self.a_star is None and not self.failed


def _opt(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else float(x)


def sweep(p: PenaltySpec, K_grid: Sequence[float], tol: float = DEFAULT_TOL,
          n_grid: int = 100_000) -> list:
    """One :class:`SweepRow` per ``K``; degenerate rows carry no boundaries.

    Raises ``RuntimeError`` if the present rows are not monotone (``A*``
    non-increasing, ``B*`` non-decreasing), which would indicate a solver bug.
    """
    K_grid = [float(k) for k in K_grid]
    if any(k1 >= k2 for k1, k2 in zip(K_grid, K_grid[1:])):
        raise ParameterError("K grid must be strictly increasing")
    rows = []
    for K in K_grid:
        params = ProblemParams.from_K(K)
        try:
            sol = solve_penalty(p, params, tol, n_grid)
        except Exception as exc:  # keep sweeping; the row records the failure
            log.warning("solve failed for %s at K=%g: %s", p.name, K, exc)
            rows.append(SweepRow(K, failed=True, note=str(exc)))
            continue
        if sol.degenerate:
            rows.append(SweepRow(K, method=sol.method))
            continue
        da, db = boundary_derivatives(p, params, sol)
        rows.append(SweepRow(K, sol.a_star, sol.b_star, _opt(sol.pi_star_lo),
                             _opt(sol.pi_star_hi), da, db, sol.method,
                             note="fallback" if sol.fallback else ""))
    present = [r for r in rows if r.a_star is not None]
    for r0, r1 in zip(present, present[1:]):
        if r1.a_star > r0.a_star + MONOTONE_SLACK or r1.b_star < r0.b_star - MONOTONE_SLACK:
            raise RuntimeError(f"{p.name}: boundaries not monotone between K={r0.K} and K={r1.K}")
    return rows


@dataclass
class LimitReport:
    penalty: str
    threshold: float
    large_K: float
    a_large: float
    b_large: float
    near_K: float
    a_near: float
    b_near: float
    pi0: float
    large_ok: bool
    near_ok: bool

    @property
    def passed(self) -> bool:
        return self.large_ok and self.near_ok


def check_limits(p: PenaltySpec, tol: float = DEFAULT_TOL, large_K: float = 1e6,
                 rel_above: float = 1e-4, window: float = 0.05) -> LimitReport:
    """Boundaries approach 0 and 1 for large ``K`` and ``pi0`` just above the threshold."""
    threshold = p.threshold
    big = solve(p, ProblemParams.from_K(large_K), tol)
    near_K = threshold * (1.0 + rel_above)
    near = solve(p, ProblemParams.from_K(near_K), tol)
    large_ok = not big.degenerate and big.a_star < 0.01 and big.b_star > 0.99
    near_ok = (not near.degenerate and abs(near.a_star - p.pi0) < window
               and abs(near.b_star - p.pi0) < window)
    return LimitReport(p.name, threshold, large_K, big.a_star, big.b_star, near_K,
                       near.a_star, near.b_star, p.pi0, large_ok, near_ok)


@dataclass
class BoundReport:
    """Outcome of the rate check ``A* <= 1/(1 + C K^(1-eps))``, ``B* >= 1 - that``."""

    penalty: str
    epsilon: float
    K0: Optional[float]
    C: Optional[float]
    conclusive: bool
    rows: list = field(default_factory=list)  # (K, A*, upper bound, B*, lower bound, ok)

    @property
    def passed(self) -> bool:
        return self.conclusive and all(r[-1] for r in self.rows)


def check_asymptotic_bounds(p: PenaltySpec, K_grid: Sequence[float], epsilon: float = 0.0,
                            tol: float = DEFAULT_TOL) -> BoundReport:
    """Calibrate ``C`` at the first grid ``K`` with ``B* - A* > 0.9`` and test the rest.

    ``epsilon = 0`` is intended for symmetric penalties.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ParameterError("epsilon must lie in [0, 1)")
    sols = []
    for K in sorted(float(k) for k in K_grid):
        s = solve(p, ProblemParams.from_K(K), tol)
        if not s.degenerate:
            sols.append((K, s.a_star, s.b_star))
    start = next((i for i, (_, a, b) in enumerate(sols) if b - a > 0.9), None)
    if start is None:
        return BoundReport(p.name, epsilon, None, None, False)
    K0, a0, b0 = sols[start]
    power = 1.0 - epsilon
    C = min((1.0 - a0) / a0, b0 / (1.0 - b0)) / K0**power
    rows = []
    for K, a, b in sols[start:]:
        ck = C * K**power
        upper, lower = 1.0 / (1.0 + ck), ck / (1.0 + ck)
        rows.append((K, a, upper, b, lower, bool(a <= upper * (1 + 1e-12) and b >= lower * (1 - 1e-12))))
    return BoundReport(p.name, epsilon, K0, C, len(rows) > 1, rows)


def u_boundary_closed_form(name: str, K):
    """Closed forms of ``(pi_*, pi^*)`` for the symmetric cross-entropy and absolute-loss penalties."""
    K = np.asarray(K, dtype=float)
    if name == "ce:1,1":
        root = np.sqrt(1.0 - 8.0 / K)
    elif name == "l1":
        root = np.sqrt(1.0 - np.sqrt(8.0 / K))
    else:
        raise ParameterError(f"no closed form for {name!r}")
    return 0.5 - 0.5 * root, 0.5 + 0.5 * root
