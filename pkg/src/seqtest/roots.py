"""Bracketed bisection with both an abscissa and a residual stopping rule."""
from __future__ import annotations

import math

from .errors import BracketError


def bisect_root(f, a: float, b: float, xtol: float, ftol: float = math.inf,
                maxiter: int = 4000) -> float:
    """Root of ``f`` on ``[a, b]``.

    Stops once the bracket is narrower than ``xtol`` and ``|f(mid)| <= ftol``,
    or when the bracket cannot be split further in floating point.
    """
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a!r}, {b!r}]: f = {fa!r}, {fb!r}")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            return m
        fm = f(m)
        if fm == 0 or (b - a <= xtol and abs(fm) <= ftol):
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)
