import math

import numpy as np
import pytest

from seqtest import ProblemParams, make_cross_entropy, value_function
from seqtest.errors import ParameterError
from seqtest.montecarlo import (
    SimConfig, combined_se, estimate_risk, path_rng, simulate_posterior_path, terminal_posterior,
)

PARAMS = ProblemParams(alpha=4.0)  # K = 16


@pytest.fixture(scope="module")
def optimum():
    p = make_cross_entropy()
    v = value_function(p, PARAMS)
    return p, v


class TestConfig:
    def test_dt_must_be_small(self):
        with pytest.raises(ParameterError):
            SimConfig(prior=0.5, dt=0.1, t_max=50)

    @pytest.mark.parametrize("prior", [0.0, 1.0, -0.2])
    def test_prior_in_unit_interval(self, prior):
        with pytest.raises(ParameterError):
            SimConfig(prior=prior)

    def test_steps(self):
        assert SimConfig(prior=0.5, dt=1e-3, t_max=2.0).n_steps == 2000


class TestPosterior:
    def test_starts_at_prior(self):
        path = simulate_posterior_path(PARAMS, SimConfig(prior=0.3, dt=1e-3, t_max=1.0), path_rng(1, 0))
        assert path.posterior[0] == pytest.approx(0.3, abs=1e-15)
        assert path.times[-1] == pytest.approx(1.0)

    @pytest.mark.parametrize("prior, t", [(0.5, 0.5), (0.2, 1.0), (0.9, 0.1)])
    def test_martingale(self, prior, t):
        draws = terminal_posterior(PARAMS, prior, t, 100_000, seed=7)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - prior) <= 3 * se

    def test_informative_signal_concentrates(self):
        draws = terminal_posterior(PARAMS, 0.5, 5.0, 10_000, seed=3)
        assert np.mean((draws < 0.01) | (draws > 0.99)) > 0.95


class TestEstimate:
    def test_degenerate_interval_returns_g(self, optimum):
        p, _ = optimum
        est = estimate_risk(PARAMS, p, 0.4, 0.4, SimConfig(prior=0.4, n_paths=10))
        assert est.mean_risk == p.g(0.4) and est.std_error == 0.0

    def test_prior_outside_interval(self, optimum):
        p, _ = optimum
        est = estimate_risk(PARAMS, p, 0.2, 0.3, SimConfig(prior=0.5, n_paths=10))
        assert est.mean_risk == p.g(0.5)

    def test_seeded_reproducible(self, optimum):
        p, v = optimum
        s = v.solution
        cfg = SimConfig(prior=0.5, n_paths=300, dt=1e-3, seed=11)
        first = estimate_risk(PARAMS, p, s.a_star, s.b_star, cfg)
        assert estimate_risk(PARAMS, p, s.a_star, s.b_star, cfg) == first
        other = estimate_risk(PARAMS, p, s.a_star, s.b_star, SimConfig(0.5, 300, 1e-3, seed=12))
        assert other.mean_risk != first.mean_risk

    def test_path_streams_independent_of_count(self):
        a = path_rng(5, 3).standard_normal(4)
        b = path_rng(5, 3).standard_normal(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, path_rng(5, 4).standard_normal(4))

    def test_overshoot_shrinks_with_dt(self, optimum):
        p, v = optimum
        s = v.solution
        coarse = estimate_risk(PARAMS, p, s.a_star, s.b_star, SimConfig(0.5, 2000, 1e-3, seed=1))
        fine = estimate_risk(PARAMS, p, s.a_star, s.b_star, SimConfig(0.5, 2000, 1e-4, seed=1))
        assert 0 < fine.mean_overshoot < coarse.mean_overshoot

    def test_dt_halving_stable(self, optimum):
        p, v = optimum
        s = v.solution
        e1 = estimate_risk(PARAMS, p, s.a_star, s.b_star, SimConfig(0.5, 4000, 2e-4, seed=2))
        e2 = estimate_risk(PARAMS, p, s.a_star, s.b_star, SimConfig(0.5, 4000, 1e-4, seed=3))
        assert abs(e1.mean_risk - e2.mean_risk) < 2 * combined_se(e1, e2)

    def test_close_to_value(self, optimum):
        p, v = optimum
        s = v.solution
        est = estimate_risk(PARAMS, p, s.a_star, s.b_star, SimConfig(0.5, 4000, 1e-4, seed=4))
        assert est.reliable
        assert abs(est.mean_risk - float(v(0.5))) <= 4 * est.std_error + 0.005

    def test_truncation_flagged(self, optimum):
        p, _ = optimum
        est = estimate_risk(PARAMS, p, 1e-6, 1 - 1e-6, SimConfig(0.5, 50, 1e-5, t_max=0.05))
        assert est.truncated_fraction > 0.5 and not est.reliable
