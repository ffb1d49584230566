"""Steady-state stochastic-fountain data generation.

Particles are born by a rate-lambda Poisson process on a window [t0, T]
with t0 < 0 chosen far enough in the past that the ensemble is effectively
stationary over the observation window [0, T].  Each particle is simulated
to its exit; the data are the per-detector counts of exits falling inside
the observation window.  A multinomial shortcut generator reproduces the
same count law directly from known exit probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import streams
from .errors import ConfigError, InvalidDistribution
from .geometry import DetectorLayout
from .process import ProcessSpec, simulate_exit_ensemble
from .source import SourceSpec, sample

PILOT_PATHS = 256
BURN_IN_MULTIPLE = 20.0


@dataclass(frozen=True)
class FountainSpec:
    """Birth rate, observation window, burn-in start, and the particle model."""

    lambda_: float
    window: float
    process: ProcessSpec
    source: SourceSpec
    layout: DetectorLayout
    t0: float | None = None  # None: chosen as -BURN_IN_MULTIPLE * pilot E[exit time]

    def __post_init__(self) -> None:
        if self.lambda_ < 0 or self.window <= 0:
            raise ConfigError("need lambda >= 0 and window > 0")
        if self.t0 is not None and self.t0 > 0:
            raise ConfigError("system start t0 must be nonpositive")


@dataclass(frozen=True)
class ExitCounts:
    """Binned exit counts over an observation window."""

    counts: np.ndarray
    lambda_: float
    window: float
    total_births: int

    def __post_init__(self) -> None:
        if self.counts.sum() > self.total_births:
            raise ConfigError("counts cannot exceed births")


def pilot_mean_exit_time(spec: FountainSpec, master_seed: int) -> float:
    """Small-ensemble estimate of E[exit time] used to size the burn-in."""
    rng = streams.make_rng(master_seed, streams.PILOT, streams.DRAWS)
    draws = sample(spec.source, rng, PILOT_PATHS)
    seeds = streams.path_seeds(master_seed, streams.PILOT, streams.PATHS, n=PILOT_PATHS)
    ens = simulate_exit_ensemble(spec.process, draws.positions, spec.layout, seeds)
    return float(ens.exit_times.mean())


def generate_counts(spec: FountainSpec, master_seed: int) -> ExitCounts:
    """Simulate one realization of the fountain and bin its exits.

    Births over [t0, T] are Poisson(lambda * (T - t0)) with iid uniform
    birth times; a particle is counted in detector j when its absolute exit
    time lands in [0, T] and its exit point in D_j.
    """
    mean_tau = pilot_mean_exit_time(spec, master_seed)
    t0 = -BURN_IN_MULTIPLE * mean_tau if spec.t0 is None else spec.t0
    if spec.t0 is not None and spec.t0 > -10.0 * mean_tau:
        raise ConfigError(
            f"t0={spec.t0} too recent for stationarity (pilot E[tau]={mean_tau:.3g})"
        )
    rng = streams.make_rng(master_seed, streams.DATA)
    n_births = int(rng.poisson(spec.lambda_ * (spec.window - t0)))
    counts = np.zeros(spec.layout.count, dtype=np.int64)
    if n_births > 0:
        birth_times = rng.uniform(t0, spec.window, size=n_births)
        draws = sample(spec.source, rng, n_births)
        seeds = streams.path_seeds(master_seed, streams.DATA, streams.PATHS, n=n_births)
        ens = simulate_exit_ensemble(spec.process, draws.positions, spec.layout, seeds)
        exit_abs = birth_times + ens.exit_times
        observed = (exit_abs >= 0.0) & (exit_abs <= spec.window) & (ens.detector >= 0)
        counts = np.bincount(
            ens.detector[observed], minlength=spec.layout.count
        ).astype(np.int64)
    return ExitCounts(
        counts=counts, lambda_=spec.lambda_, window=spec.window, total_births=n_births
    )


def counts_to_probabilities(counts: ExitCounts) -> np.ndarray:
    """Observed probabilities p_hat_j = N_j / (lambda * T); never clamped."""
    denom = counts.lambda_ * counts.window
    if denom <= 0:
        raise ConfigError("lambda * window must be positive")
    return counts.counts / denom


def generate_counts_multinomial(
    p_with_escape: np.ndarray, n: int, rng: np.random.Generator
) -> ExitCounts:
    """Categorical shortcut: n iid outcomes over (no-detector, D_1, ..., D_J).

    ``p_with_escape[0]`` is the probability of exiting outside every
    detector (or being absorbed).  The returned counts normalize by n, so
    ``counts_to_probabilities`` gives N_j / n.
    """
    p = np.asarray(p_with_escape, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise InvalidDistribution("need [p_escape, p_1, ..., p_J]")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise InvalidDistribution("probabilities must be nonnegative and sum to 1")
    drawn = rng.multinomial(n, p)
    return ExitCounts(
        counts=drawn[1:].astype(np.int64), lambda_=float(n), window=1.0, total_births=n
    )
