"""
Boundaries from a convex envelope
=================================

The boundaries are the contact points of the single affine piece of the
lower convex envelope of H = g - (2/K) Psi. This route needs no derivatives,
so it also handles the kinked classic penalty.
"""
from seqtest import ProblemParams, make_classic, make_cross_entropy, solve
from seqtest.envelope import boundaries_from_envelope, convex_envelope, solve_via_envelope

params = ProblemParams.from_K(16.0)
p = make_cross_entropy()

env = convex_envelope(p, params, n=200_000)
print("affine segments:", len(env.affine_segments))
a, b = boundaries_from_envelope(env)
s = solve(p, params)
print(f"envelope A = {a:.10f}  tangent A = {s.a_star:.10f}")
print(f"envelope B = {b:.10f}  tangent B = {s.b_star:.10f}")

# The classic 0-1 style penalty min(pi, 1 - pi) has a kink at 1/2.
c = solve_via_envelope(make_classic(1.0, 1.0), params, n=200_000)
print(f"classic   A = {c.a_star:.6f}  B = {c.b_star:.6f}  ({c.method})")
