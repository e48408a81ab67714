"""
How the boundaries move with K
==============================

Sweep K, compare the closed-form derivatives with finite differences and
check the large-K behaviour.
"""
import numpy as np

from seqtest import ProblemParams, make_cross_entropy, make_l1, solve
from seqtest.sensitivity import boundary_derivatives, check_asymptotic_bounds, check_limits, sweep

ce = make_cross_entropy()
for row in sweep(ce, [6, 8, 9, 16, 50, 200]):
    if row.degenerate:
        print(f"K = {row.K:6.1f}  degenerate")
    else:
        print(f"K = {row.K:6.1f}  A* = {row.a_star:.5f}  B* = {row.b_star:.5f}  "
              f"dA/dK = {row.dA_dK:+.3e}")

# Derivative against a central difference.
K, h = 16.0, 1e-3
params = ProblemParams.from_K(K)
da, _ = boundary_derivatives(ce, params, solve(ce, params))
fd = (solve(ce, ProblemParams.from_K(K + h)).a_star - solve(ce, ProblemParams.from_K(K - h)).a_star) / (2 * h)
print(f"dA/dK formula {da:.8e}  finite difference {fd:.8e}")

for p in (ce, make_l1()):
    print(check_limits(p))
    rep = check_asymptotic_bounds(p, np.geomspace(50, 1e4, 20))
    print(p.name, "rate bound holds:", rep.passed, "C =", rep.C)
