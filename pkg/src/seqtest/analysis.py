"""Special solution ``Psi``, the transformed penalty ``H`` and the set ``{Ag < -1/K}``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from .errors import BracketError, ParameterError, UnsupportedPenaltyError
from .penalty import PenaltySpec, apply_generator, check_open_unit
from .roots import bisect_root

# Grid scans never go closer than this to 0 or 1.
CLIP = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Drift ``alpha``, noise ``sigma`` and observation cost ``cost``.

    ``K = alpha^2 / (cost sigma^2)`` is the only combination the boundaries
    depend on.
    """

    alpha: float
    sigma: float = 1.0
    cost: float = 1.0
    K: float = field(default=None, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha == 0:
            raise ParameterError(f"alpha must be finite and nonzero, got {self.alpha!r}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be positive, got {self.sigma!r}")
        if not (self.cost > 0 and math.isfinite(self.cost)):
            raise ParameterError(f"cost must be positive, got {self.cost!r}")
        ratio = self.alpha**2 / (self.cost * self.sigma**2)
        if self.K is None:
            object.__setattr__(self, "K", ratio)
        elif not math.isclose(self.K, ratio, rel_tol=1e-12):
            raise ParameterError(f"K={self.K!r} inconsistent with alpha^2/(c sigma^2)={ratio!r}")

    @classmethod
    def from_K(cls, K: float) -> "ProblemParams":
        if not (K > 0 and math.isfinite(K)):
            raise ParameterError(f"K must be positive, got {K!r}")
        # keep K exact; sqrt(K)**2 need not round-trip
        return cls(alpha=math.sqrt(K), sigma=1.0, cost=1.0, K=float(K))


def psi(pi):
    """``(1 - 2 pi) log(pi / (1 - pi))``."""
    pi = check_open_unit(pi)
    return (1.0 - 2.0 * pi) * (np.log(pi) - np.log1p(-pi))


def psi1(pi):
    pi = check_open_unit(pi)
    return -2.0 * (np.log(pi) - np.log1p(-pi)) + (1.0 - 2.0 * pi) / (pi * (1.0 - pi))


def psi2(pi):
    # -2/q + (2q - 1)/q^2 with q = pi(1 - pi) collapses to -1/q^2
    pi = check_open_unit(pi)
    return -1.0 / (pi * (1.0 - pi)) ** 2


def h(p: PenaltySpec, params: ProblemParams, pi):
    """``H = g - 2 Psi / K``."""
    return p.g(pi) - 2.0 / params.K * psi(pi)


def h1(p: PenaltySpec, params: ProblemParams, pi):
    return p.g1(pi) - 2.0 / params.K * psi1(pi)


def h2(p: PenaltySpec, params: ProblemParams, pi):
    if not p.smooth:
        raise UnsupportedPenaltyError(f"{p.name}: H'' needs a C^2 penalty")
    return p.g2(pi) - 2.0 / params.K * psi2(pi)


def generator_of_psi(pi):
    """``A Psi``; identically -1/2."""
    return apply_generator(psi2, pi)


@dataclass(frozen=True)
class UBoundaries:
    """End points of the open interval where ``Ag < -1/K``."""

    pi_star_lo: float
    pi_star_hi: float
    nonempty: bool


def u_boundaries(p: PenaltySpec, params: ProblemParams, xtol: float = 1e-12) -> UBoundaries:
    if not p.smooth:
        raise UnsupportedPenaltyError(f"{p.name}: the set U needs a C^2 penalty")
    inv_k = 1.0 / params.K
    if float(p.ag(p.pi0)) >= -inv_k:
        return UBoundaries(math.nan, math.nan, False)

    def f(x):
        return float(p.ag(x)) + inv_k

    try:
        lo = bisect_root(f, CLIP, p.pi0, xtol, ftol=xtol)
        hi = bisect_root(f, p.pi0, 1.0 - CLIP, xtol, ftol=xtol)
    except BracketError as exc:
        raise BracketError(f"{p.name}: Ag + 1/K has no sign change ({exc})") from exc
    return UBoundaries(lo, hi, True)
