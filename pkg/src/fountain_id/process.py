"""Tagged union over the two baseline Markov processes."""

from __future__ import annotations

from typing import Union

import numpy as np

from .errors import ConfigError
from .geometry import DetectorLayout
from .records import ExitEnsemble
from .sim_diffusion import DiffusionSpec
from .sim_diffusion import simulate_ensemble as _simulate_diffusion
from .sim_plmp import PlmpSpec
from .sim_plmp import simulate_ensemble as _simulate_plmp

ProcessSpec = Union[DiffusionSpec, PlmpSpec]


def simulate_exit_ensemble(
    process: ProcessSpec,
    starts: np.ndarray,
    layout: DetectorLayout,
    seeds: np.ndarray,
) -> ExitEnsemble:
    """Dispatch an ensemble simulation on the process kind."""
    if isinstance(process, DiffusionSpec):
        return _simulate_diffusion(process, starts, layout, seeds)
    if isinstance(process, PlmpSpec):
        return _simulate_plmp(process, starts, layout, seeds)
    raise ConfigError(f"unknown process spec type: {type(process)!r}")


def process_from_dict(d: dict) -> ProcessSpec:
    kind = d.get("kind")
    if kind == "diffusion":
        return DiffusionSpec.from_dict(d)
    if kind == "plmp":
        return PlmpSpec.from_dict(d)
    raise ConfigError(f"unknown process kind: {kind!r}")
