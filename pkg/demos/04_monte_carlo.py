"""
Monte Carlo check of the Bayes risk
===================================

Simulate the posterior, stop at the first exit from (A*, B*) and compare the
average cost with the value function. Moving a boundary should not help.
"""
from seqtest import ProblemParams, make_cross_entropy, value_function
from seqtest.montecarlo import SimConfig, combined_se, estimate_risk

p = make_cross_entropy()
params = ProblemParams(alpha=4.0)
v = value_function(p, params)
A, B = v.solution.a_star, v.solution.b_star

cfg = SimConfig(prior=0.5, n_paths=5000, dt=1e-4, seed=1)
opt = estimate_risk(params, p, A, B, cfg)
print(f"V(0.5) = {float(v(0.5)):.5f}  estimate = {opt.mean_risk:.5f} +- {opt.std_error:.5f}")
print(f"mean stopping time {opt.mean_stop_time:.3f}, overshoot {opt.mean_overshoot:.2e}")

for a, b in [(A - 0.05, B), (A + 0.05, B)]:
    e = estimate_risk(params, p, a, b, SimConfig(prior=0.5, n_paths=5000, dt=1e-4, seed=2))
    print(f"A = {a:.3f}: {e.mean_risk:.5f}  (difference {e.mean_risk - opt.mean_risk:+.5f}, "
          f"se {combined_se(opt, e):.5f})")
