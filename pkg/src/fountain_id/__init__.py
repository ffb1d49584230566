"""Source identification from binned boundary-exit counts.

Simulates Markov particle paths (Ito diffusion or piecewise-linear
transport) from a compactly supported source in the unit disk, estimates
detector exit probabilities and their location sensitivities pathwise, and
recovers the source location by stochastic gradient descent.
"""

from . import streams
from .estimator import EstimateBundle, estimate, merge
from .harness import (
    DataMode,
    DataSpec,
    ExperimentPlan,
    ExperimentResult,
    ScalingResult,
    consistency_sweep,
    m_fluctuation_study,
    run_experiment,
    sweep_estimator,
)
from .fountain import (
    ExitCounts,
    FountainSpec,
    counts_to_probabilities,
    generate_counts,
    generate_counts_multinomial,
)
from .geometry import BoundaryHit, DetectorLayout, Domain, classify_exit, segment_boundary_crossing
from .optimizer import DescentConfig, DescentTrace, descend, loss
from .oracle import OracleTable, harmonic_measure, high_budget_reference, source_exit_probability
from .process import ProcessSpec, process_from_dict, simulate_exit_ensemble
from .records import ExitEnsemble, ExitRecord
from .sim_diffusion import DiffusionSpec
from .sim_plmp import PlmpSpec, ScatterLaw
from .source import Profile, SourceDraw, SourceSpec, density, normalization_constant, sample

__version__ = "0.1.0"

__all__ = [
    "BoundaryHit",
    "DescentConfig",
    "DescentTrace",
    "DetectorLayout",
    "DiffusionSpec",
    "Domain",
    "DataMode",
    "DataSpec",
    "EstimateBundle",
    "ExperimentPlan",
    "ExperimentResult",
    "ScalingResult",
    "ExitCounts",
    "ExitEnsemble",
    "ExitRecord",
    "FountainSpec",
    "OracleTable",
    "PlmpSpec",
    "ProcessSpec",
    "Profile",
    "ScatterLaw",
    "SourceDraw",
    "SourceSpec",
    "classify_exit",
    "consistency_sweep",
    "m_fluctuation_study",
    "run_experiment",
    "sweep_estimator",
    "counts_to_probabilities",
    "density",
    "descend",
    "estimate",
    "generate_counts",
    "generate_counts_multinomial",
    "harmonic_measure",
    "high_budget_reference",
    "loss",
    "merge",
    "normalization_constant",
    "process_from_dict",
    "sample",
    "segment_boundary_crossing",
    "simulate_exit_ensemble",
    "source_exit_probability",
]
