"""Terminal penalties induced by soft-classification losses.

A penalty ``g`` maps the posterior probability at stopping to the expected
loss of reporting it. All evaluators accept floats or numpy arrays and raise
:class:`~seqtest.errors.DomainError` outside the open unit interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ParameterError, UnsupportedPenaltyError

ArrayFn = Callable[[np.ndarray], np.ndarray]

# Interval used when the minimiser of Ag has to be located numerically.
PI0_SEARCH = (1e-6, 1.0 - 1e-6)


def check_open_unit(pi):
    """Return ``pi`` as float/array after checking 0 < pi < 1."""
    arr = np.asarray(pi, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"belief must lie in (0, 1), got {pi!r}")
    return arr if arr.ndim else float(arr)


def apply_generator(f2, pi):
    """Operator ``(A f)(pi) = pi^2 (1 - pi)^2 f''(pi) / 2``.

    ``f2`` is either a callable returning the second derivative or the
    already evaluated second derivative at ``pi``.
    """
    pi = check_open_unit(pi)
    second = f2(pi) if callable(f2) else f2
    return 0.5 * (pi * (1.0 - pi)) ** 2 * second


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty ``g`` with analytic first and second derivatives.

    ``pi0`` is the minimiser of ``Ag`` (or the kink of a non-smooth penalty)
    and ``beta = |Ag(pi0)|``; the two-boundary regime exists iff
    ``K > 1 / beta``.
    """

    name: str
    g_fn: ArrayFn = field(repr=False)
    g1_fn: ArrayFn = field(repr=False)
    g2_fn: ArrayFn = field(repr=False)
    pi0: float
    smooth: bool = True
    symmetric: bool = False
    kink: Optional[float] = None

    def g(self, pi):
        return self.g_fn(check_open_unit(pi))

    def g1(self, pi):
        return self.g1_fn(check_open_unit(pi))

    def g2(self, pi):
        return self.g2_fn(check_open_unit(pi))

    def ag(self, pi):
        """``Ag`` at ``pi``."""
        return apply_generator(self.g2_fn, pi)

    @property
    def beta(self) -> float:
        if not self.smooth:
            raise UnsupportedPenaltyError(f"{self.name}: Ag is not defined at the kink")
        return abs(float(self.ag(self.pi0)))

    @property
    def threshold(self) -> float:
        """Smallest information ratio ``1 / beta`` (boundaries exist strictly above it)."""
        return 1.0 / self.beta

    @staticmethod
    def limit_at_0() -> float:
        return 0.0

    @staticmethod
    def limit_at_1() -> float:
        return 0.0


def _positive(**values):
    for key, value in values.items():
        if not (np.isfinite(value) and value > 0):
            raise ParameterError(f"{key} must be positive, got {value!r}")


def locate_pi0(g2_fn: ArrayFn, tol: float = 1e-10) -> float:
    """Minimiser of ``Ag`` on the interior of (0, 1).

    Unimodality of ``Ag`` makes a bounded scalar search reliable.
    """

    def ag(x):
        return 0.5 * (x * (1.0 - x)) ** 2 * g2_fn(x)

    res = minimize_scalar(ag, bounds=PI0_SEARCH, method="bounded",
                          options={"xatol": tol, "maxiter": 500})
    return float(res.x)


def make_penalty(name: str, g: ArrayFn, g1: ArrayFn, g2: ArrayFn,
                 pi0: Optional[float] = None, symmetric: bool = False) -> PenaltySpec:
    """Wrap a user supplied C^2 penalty. ``pi0`` is located numerically when omitted."""
    if pi0 is None:
        pi0 = locate_pi0(g2)
    return PenaltySpec(name=name, g_fn=g, g1_fn=g1, g2_fn=g2, pi0=float(pi0),
                       smooth=True, symmetric=symmetric)


def make_cross_entropy(a1: float = 1.0, a2: float = 1.0) -> PenaltySpec:
    """``g(pi) = -a1 pi log(pi) - a2 (1 - pi) log(1 - pi)``."""
    _positive(a1=a1, a2=a2)
    a1, a2 = float(a1), float(a2)

    def g(x):
        return -a1 * x * np.log(x) - a2 * (1.0 - x) * np.log1p(-x)

    def g1(x):
        return -a1 * (np.log(x) + 1.0) + a2 * (np.log1p(-x) + 1.0)

    def g2(x):
        return -a1 / x - a2 / (1.0 - x)

    symmetric = a1 == a2
    pi0 = 0.5 if symmetric else locate_pi0(g2)
    return PenaltySpec(name=f"ce:{a1:g},{a2:g}", g_fn=g, g1_fn=g1, g2_fn=g2,
                       pi0=pi0, smooth=True, symmetric=symmetric)


def _quadratic(scale: float, name: str) -> PenaltySpec:
    def g(x):
        return scale * x * (1.0 - x)

    def g1(x):
        return scale * (1.0 - 2.0 * x)

    def g2(x):
        return np.full_like(np.asarray(x, dtype=float), -2.0 * scale)[()]

    return PenaltySpec(name=name, g_fn=g, g1_fn=g1, g2_fn=g2, pi0=0.5,
                       smooth=True, symmetric=True)


def make_l1() -> PenaltySpec:
    """Penalty of the absolute loss, ``2 pi (1 - pi)``."""
    return _quadratic(2.0, "l1")


def make_l2() -> PenaltySpec:
    """Penalty of the squared loss, ``pi (1 - pi)``."""
    return _quadratic(1.0, "l2")


def make_classic(a1: float = 1.0, a2: float = 1.0) -> PenaltySpec:
    """Hard-classification penalty ``min(a1 pi, a2 (1 - pi))``.

    Not C^2: the kink at ``a2 / (a1 + a2)`` is stored as ``pi0``. ``g1``
    returns the left derivative at the kink itself.
    """
    _positive(a1=a1, a2=a2)
    a1, a2 = float(a1), float(a2)
    kink = a2 / (a1 + a2)

    def g(x):
        return np.minimum(a1 * x, a2 * (1.0 - x))

    def g1(x):
        return np.where(x <= kink, a1, -a2)[()]

    def g2(x):
        return np.zeros_like(np.asarray(x, dtype=float))[()]

    return PenaltySpec(name=f"classic:{a1:g},{a2:g}", g_fn=g, g1_fn=g1, g2_fn=g2,
                       pi0=kink, smooth=False, symmetric=a1 == a2, kink=kink)


def parse_penalty(text: str) -> PenaltySpec:
    """Build a penalty from ``ce:a1,a2``, ``l1``, ``l2`` or ``classic:a1,a2``."""
    kind, _, args = text.strip().lower().partition(":")
    if kind in ("l1", "l2"):
        if args:
            raise ParameterError(f"{kind} takes no arguments: {text!r}")
        return make_l1() if kind == "l1" else make_l2()
    if kind in ("ce", "classic"):
        try:
            a1, a2 = (float(v) for v in args.split(",")) if args else (1.0, 1.0)
        except ValueError:
            raise ParameterError(f"cannot parse penalty weights in {text!r}") from None
        return make_cross_entropy(a1, a2) if kind == "ce" else make_classic(a1, a2)
    raise ParameterError(f"unknown penalty {text!r}; expected ce:a1,a2 | l1 | l2 | classic:a1,a2")


@dataclass
class ValidationReport:
    penalty: str
    grid_size: int
    passed: bool
    violations: list = field(default_factory=list)

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


def validate_assumptions(p: PenaltySpec, grid_size: int = 1000) -> ValidationReport:
    """Grid check of nonnegativity, concavity, vanishing end values and unimodal ``Ag``.

    Each violation is recorded as ``(check, location)``; the report lists them
    in the order the checks are run.
    """
    if not p.smooth:
        raise UnsupportedPenaltyError(f"{p.name}: assumption checks need a C^2 penalty")
    if grid_size < 100:
        raise ParameterError("grid_size must be at least 100")
    x = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    g, g2, ag = p.g(x), p.g2(x), p.ag(x)
    violations = []

    def first(mask, check):
        idx = np.flatnonzero(mask)
        if idx.size:
            violations.append((check, float(x[idx[0]])))

    first(g < -1e-12, "nonnegative")
    first(g2 > 1e-12, "concave")
    for end in (1e-9, 1.0 - 1e-9):
        if abs(float(p.g(end))) > 1e-6:
            violations.append(("endpoint_limit", end))
    dag = np.diff(ag)
    left = x[1:] <= p.pi0
    right = x[:-1] >= p.pi0
    first(left & (dag >= 0), "ag_decreasing_left")
    first(right & (dag <= 0), "ag_increasing_right")
    return ValidationReport(p.name, grid_size, not violations, violations)
