"""Monte Carlo estimate of the Bayes risk of two-boundary stopping rules.

The observation ``X`` is simulated exactly on a time grid and the posterior
is recovered from the Bayes formula in log-odds form,
``logit(Pi_t) = logit(pi) + (alpha / sigma^2) (X_t - alpha t / 2)``, so the
only discretisation error is that exits are detected at grid times.
Every path draws from its own stream keyed by ``(seed, path index)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit, logit

from .analysis import ProblemParams
from .errors import ParameterError
from .penalty import PenaltySpec

FIRST_CHUNK = 1024
TRUNCATION_WARN = 0.01


@dataclass(frozen=True)
class SimConfig:
    prior: float
    n_paths: int = 100_000
    dt: float = 1e-4
    t_max: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.prior < 1.0:
            raise ParameterError(f"prior must lie in (0, 1), got {self.prior!r}")
        if self.n_paths < 1:
            raise ParameterError("n_paths must be positive")
        if not (self.dt > 0 and self.t_max > 0):
            raise ParameterError("dt and t_max must be positive")
        if self.dt > 1e-3 * self.t_max:
            raise ParameterError(f"dt={self.dt} exceeds 1e-3 * t_max={self.t_max}")
        if self.seed < 0:
            raise ParameterError("seed must be a nonnegative integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


def default_t_max(params: ProblemParams) -> float:
    return 50.0 / params.cost


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one path; depends only on ``(seed, index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _log_odds_step(params: ProblemParams, theta: int, dt: float):
    """Mean and standard deviation of the log-likelihood increment over ``dt``."""
    snr2 = (params.alpha / params.sigma) ** 2
    return snr2 * (theta - 0.5) * dt, abs(params.alpha) / params.sigma * math.sqrt(dt)


class PosteriorPath(NamedTuple):
    theta: int
    times: np.ndarray
    posterior: np.ndarray


def simulate_posterior_path(params: ProblemParams, cfg: SimConfig,
                            rng: np.random.Generator) -> PosteriorPath:
    """Hidden state and posterior on ``0, dt, ..., t_max`` (no stopping)."""
    theta = int(rng.random() < cfg.prior)
    mean, sd = _log_odds_step(params, theta, cfg.dt)
    z = np.empty(cfg.n_steps + 1)
    z[0] = logit(cfg.prior)
    z[1:] = z[0] + np.cumsum(mean + sd * rng.standard_normal(cfg.n_steps))
    return PosteriorPath(theta, cfg.dt * np.arange(cfg.n_steps + 1), expit(z))


def terminal_posterior(params: ProblemParams, prior: float, t: float, n: int,
                       seed: int = 0) -> np.ndarray:
    """``n`` independent draws of the posterior at time ``t``, sampled in one step."""
    rng = np.random.default_rng(seed)
    theta = rng.random(n) < prior
    x = params.alpha * theta * t + params.sigma * math.sqrt(t) * rng.standard_normal(n)
    u = params.alpha / params.sigma**2 * (x - 0.5 * params.alpha * t)
    return expit(logit(prior) + u)


@dataclass(frozen=True)
class RiskEstimate:
    mean_risk: float
    std_error: float
    mean_stop_time: float
    truncated_fraction: float
    n_paths: int
    dt: float
    t_max: float
    mean_overshoot: float = 0.0

    @property
    def reliable(self) -> bool:
        return self.truncated_fraction <= TRUNCATION_WARN

    def as_dict(self) -> dict:
        return {"mean_risk": self.mean_risk, "std_error": self.std_error,
                "mean_stop_time": self.mean_stop_time,
                "truncated_fraction": self.truncated_fraction, "n_paths": self.n_paths,
                "dt": self.dt, "t_max": self.t_max, "mean_overshoot": self.mean_overshoot,
                "reliable": self.reliable}


def _stop_one(z0, za, zb, mean, sd, n_steps, rng):
    """First grid step with log-odds outside ``(za, zb)``; ``(step, z)``, or ``(n_steps, z)`` if none."""
    done, z, chunk = 0, z0, FIRST_CHUNK
    while done < n_steps:
        m = min(chunk, n_steps - done)
        zs = z + np.cumsum(mean + sd * rng.standard_normal(m))
        out = np.flatnonzero((zs <= za) | (zs >= zb))
        if out.size:
            k = out[0]
            return done + k + 1, float(zs[k]), True
        z = float(zs[-1])
        done += m
        chunk *= 2
    return n_steps, z, False


def estimate_risk(params: ProblemParams, p: PenaltySpec, A: float, B: float,
                  cfg: SimConfig) -> RiskEstimate:
    """Estimate ``E[c tau + g(Pi_tau)]`` for ``tau = inf{t : Pi_t not in (A, B)}``.

    Paths still inside at ``t_max`` are stopped there and counted in
    ``truncated_fraction``.
    """
    if not 0.0 < A <= B < 1.0:
        raise ParameterError(f"need 0 < A <= B < 1, got A={A!r}, B={B!r}")
    if not A < cfg.prior < B:
        return RiskEstimate(float(p.g(cfg.prior)), 0.0, 0.0, 0.0, cfg.n_paths, cfg.dt, cfg.t_max)
    z0, za, zb = float(logit(cfg.prior)), float(logit(A)), float(logit(B))
    n = cfg.n_paths
    steps = np.empty(n, dtype=np.int64)
    z_stop = np.empty(n)
    exited = np.empty(n, dtype=bool)
    steps_by_theta = {t: _log_odds_step(params, t, cfg.dt) for t in (0, 1)}
    for i in range(n):
        rng = path_rng(cfg.seed, i)
        theta = int(rng.random() < cfg.prior)
        mean, sd = steps_by_theta[theta]
        steps[i], z_stop[i], exited[i] = _stop_one(z0, za, zb, mean, sd, cfg.n_steps, rng)
    tau = steps * cfg.dt
    pi_stop = expit(z_stop)
    risk = params.cost * tau + p.g(pi_stop)
    mean = math.fsum(risk) / n
    var = math.fsum((risk - mean) ** 2) / (n - 1) if n > 1 else 0.0
    over = np.where(pi_stop <= A, A - pi_stop, pi_stop - B)[exited]
    return RiskEstimate(
        mean_risk=mean,
        std_error=math.sqrt(var / n),
        mean_stop_time=math.fsum(tau) / n,
        truncated_fraction=float(np.count_nonzero(~exited)) / n,
        n_paths=n, dt=cfg.dt, t_max=cfg.t_max,
        mean_overshoot=math.fsum(over) / over.size if over.size else 0.0,
    )


def combined_se(*estimates: RiskEstimate) -> float:
    return math.sqrt(sum(e.std_error**2 for e in estimates))
