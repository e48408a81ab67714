"""
Optimal stopping boundaries
===========================

Solve the common-tangent problem for a few penalties and look at the
resulting value function.
"""
import numpy as np

from seqtest import ProblemParams, make_cross_entropy, make_l1, solve, value_function

# Only the information ratio K = alpha^2 / (c sigma^2) matters.
params = ProblemParams(alpha=4.0, sigma=1.0, cost=1.0)
print("K =", params.K)

for p in (make_cross_entropy(), make_l1(), make_cross_entropy(2.0, 1.0)):
    s = solve(p, params)
    print(f"{p.name:8s} A* = {s.a_star:.6f}  B* = {s.b_star:.6f}  "
          f"U = ({s.pi_star_lo:.4f}, {s.pi_star_hi:.4f})")

# Below the threshold 1/beta (8 for cross-entropy) stopping at once is optimal.
print(solve(make_cross_entropy(), ProblemParams.from_K(6.0)).kind)

# The value function equals g outside (A*, B*) and lies strictly below it inside.
v = value_function(make_cross_entropy(), params)
x = np.linspace(0.01, 0.99, 9)
for xi, vi, gi in zip(x, v(x), v.penalty.g(x)):
    print(f"pi = {xi:.3f}  V = {vi:.5f}  g = {gi:.5f}")
