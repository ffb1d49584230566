"""Event-driven simulation of the piecewise-linear Markov process.

Particles fly in straight lines at fixed speed c; exponential clocks drive
scattering (rate sigma_s, new direction from the scattering law) and
absorption (rate sigma_a).  Flight segments end at exact ray-circle
intersections, so there is no time-discretization error.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, PathBudgetExceeded
from .geometry import DetectorLayout
from .records import ExitEnsemble, ExitRecord, ensemble_from_kernel_output

DEFAULT_EVENT_BUDGET = 10**7


class ScatterLaw(enum.Enum):
    UNIFORM_ANGLE = "uniform"
    TRUNCATED_NORMAL = "truncated_normal"


@dataclass(frozen=True)
class PlmpSpec:
    """Speed, scattering/absorption rates, and the scattering-angle law.

    The truncated-normal law restricts Norm(mean, std^2) to (0, 2*pi]
    (truncation, not wrapping).
    """

    speed: float
    sigma_s: float
    sigma_a: float
    scatter_law: ScatterLaw = ScatterLaw.UNIFORM_ANGLE
    scatter_mean: float = np.pi / 3
    scatter_std: float = 2.0

    def __post_init__(self) -> None:
        if self.speed <= 0:
            raise ConfigError("speed must be positive")
        if self.sigma_s < 0 or self.sigma_a < 0:
            raise ConfigError("rates must be nonnegative")
        if self.scatter_law is ScatterLaw.TRUNCATED_NORMAL and self.scatter_std <= 0:
            raise ConfigError("truncated-normal std must be positive")

    @property
    def _law_code(self) -> int:
        if self.scatter_law is ScatterLaw.UNIFORM_ANGLE:
            return _kernels.SCATTER_UNIFORM
        return _kernels.SCATTER_TRUNCNORM

    def to_dict(self) -> dict:
        scatter: dict = {"law": self.scatter_law.value}
        if self.scatter_law is ScatterLaw.TRUNCATED_NORMAL:
            scatter.update(mean=self.scatter_mean, std=self.scatter_std)
        return {
            "kind": "plmp",
            "c": self.speed,
            "sigma_s": self.sigma_s,
            "sigma_a": self.sigma_a,
            "scatter": scatter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PlmpSpec":
        scatter = d.get("scatter", {"law": "uniform"})
        return cls(
            speed=float(d["c"]),
            sigma_s=float(d["sigma_s"]),
            sigma_a=float(d["sigma_a"]),
            scatter_law=ScatterLaw(scatter["law"]),
            scatter_mean=float(scatter.get("mean", np.pi / 3)),
            scatter_std=float(scatter.get("std", 2.0)),
        )


def draw_scatter_angles(spec: PlmpSpec, seeds: np.ndarray) -> np.ndarray:
    """One scattering angle per seed, drawn from the configured angle law."""
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    out = np.empty(seeds.shape[0])
    _kernels.scatter_angle_kernel(
        seeds, spec._law_code, float(spec.scatter_mean), float(spec.scatter_std), out
    )
    return out


def simulate_ensemble(
    spec: PlmpSpec,
    starts: np.ndarray,
    layout: DetectorLayout,
    seeds: np.ndarray,
    max_events: int = DEFAULT_EVENT_BUDGET,
) -> ExitEnsemble:
    """Simulate one path per row of ``starts``; initial angles uniform."""
    starts = np.ascontiguousarray(starts, dtype=float)
    if starts.ndim != 2 or starts.shape[1] != 2 or starts.shape[0] != seeds.shape[0]:
        raise ConfigError("starts must be (n, 2) with one seed per row")
    if np.any(np.einsum("ij,ij->i", starts, starts) >= 1.0):
        raise ConfigError("all start positions must be strictly inside the disk")
    out = np.empty((starts.shape[0], 4))
    _kernels.plmp_exit_kernel(
        starts,
        float(spec.speed),
        float(spec.sigma_s),
        float(spec.sigma_a),
        spec._law_code,
        float(spec.scatter_mean),
        float(spec.scatter_std),
        np.ascontiguousarray(seeds, dtype=np.uint64),
        int(max_events),
        out,
    )
    if np.any(out[:, 3] == _kernels.STATUS_BUDGET):
        raise PathBudgetExceeded(f"PLMP path exceeded {max_events} events")
    return ensemble_from_kernel_output(out, layout)


def simulate_path(
    spec: PlmpSpec,
    start: np.ndarray,
    layout: DetectorLayout,
    seed: int,
    max_events: int = DEFAULT_EVENT_BUDGET,
) -> ExitRecord:
    ens = simulate_ensemble(
        spec,
        np.asarray(start, float).reshape(1, 2),
        layout,
        np.asarray([seed], dtype=np.uint64),
        max_events,
    )
    return ens.record(0)
