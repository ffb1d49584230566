"""Stochastic gradient descent on the source location.

Each step re-estimates exit probabilities and their location gradients
from a fresh path ensemble and descends the squared-error loss

    L(theta) = sum_j (E_j(theta) - p_hat_j)^2 / 2,

via theta <- theta - h * sum_j (E_j - p_hat_j) * grad E_j.  Iterates are
projected back whenever the update would push the source support outside
the domain.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import streams
from .errors import ConfigError, DimensionMismatch
from .estimator import estimate
from .geometry import DetectorLayout
from .process import ProcessSpec
from .source import Profile, SourceSpec

EPS_MARGIN = 1e-3


class StopRule(enum.Enum):
    FIXED_K = "fixed_k"
    GRAD_NORM_BELOW = "grad_norm_below"
    THETA_STALL = "theta_stall"


@dataclass(frozen=True)
class DescentConfig:
    """Initial guess, known radius, budgets, and step/stop policy.

    ``step_sizes`` and ``ensemble_sizes`` may be scalars (constant
    schedules) or per-step arrays of length ``steps``.
    """

    theta_init: np.ndarray
    beta: float
    steps: int
    step_sizes: float | np.ndarray = 0.01
    ensemble_sizes: int | np.ndarray = 10_000
    profile: Profile = Profile.BUMP
    stop_rule: StopRule = StopRule.FIXED_K
    stop_tol: float = 0.0
    stall_window: int = 10
    boundary_nodes: int = 64

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta_init, float).reshape(2)
        theta.setflags(write=False)
        object.__setattr__(self, "theta_init", theta)
        if self.steps < 1:
            raise ConfigError("need at least one step")
        if self.beta <= 0 or np.linalg.norm(theta) + self.beta >= 1.0:
            raise ConfigError("theta_init must be admissible for the given beta")

    def step_size(self, k: int) -> float:
        h = self.step_sizes
        return float(h if np.isscalar(h) else h[k])

    def ensemble_size(self, k: int) -> int:
        m = self.ensemble_sizes
        return int(m if np.isscalar(m) else m[k])


@dataclass(frozen=True)
class DescentTrace:
    """Full iterate history: thetas has one more row than the step arrays."""

    thetas: np.ndarray       # (n_steps + 1, 2)
    losses: np.ndarray       # (n_steps,)
    p_hats: np.ndarray       # (n_steps, J)
    loss_grads: np.ndarray   # (n_steps, 2) descent direction actually applied
    ensemble_sizes: np.ndarray
    master_seed: int
    stopped_early: bool = field(default=False)

    @property
    def theta_final(self) -> np.ndarray:
        return self.thetas[-1]

    @property
    def n_steps(self) -> int:
        return self.losses.shape[0]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write("k,theta_x,theta_y,loss,grad_x,grad_y,M\n")
            for k in range(self.n_steps):
                fh.write(
                    f"{k},{float(self.thetas[k, 0])!r},{float(self.thetas[k, 1])!r},"
                    f"{float(self.losses[k])!r},{float(self.loss_grads[k, 0])!r},"
                    f"{float(self.loss_grads[k, 1])!r},{int(self.ensemble_sizes[k])}\n"
                )
            fh.write(
                f"{self.n_steps},{float(self.thetas[-1, 0])!r},"
                f"{float(self.thetas[-1, 1])!r},,,,\n"
            )

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(
                {
                    "master_seed": self.master_seed,
                    "thetas": self.thetas.tolist(),
                    "losses": self.losses.tolist(),
                    "p_hats": self.p_hats.tolist(),
                    "loss_grads": self.loss_grads.tolist(),
                    "ensemble_sizes": self.ensemble_sizes.tolist(),
                    "stopped_early": self.stopped_early,
                },
                indent=1,
            )
        )


def loss(p_model: np.ndarray, p_data: np.ndarray) -> float:
    """Half squared error sum over detectors."""
    p_model = np.asarray(p_model, float)
    p_data = np.asarray(p_data, float)
    if p_model.shape != p_data.shape:
        raise DimensionMismatch("model and data vectors differ in length")
    return float(0.5 * np.sum((p_model - p_data) ** 2))


def project_admissible(theta: np.ndarray, beta: float) -> np.ndarray:
    """Radially shrink theta so the support ball stays inside the domain."""
    limit = 1.0 - EPS_MARGIN - beta
    norm = np.linalg.norm(theta)
    if norm <= limit:
        return theta
    return theta * (limit / norm)


def descend(
    config: DescentConfig,
    process: ProcessSpec,
    layout: DetectorLayout,
    p_data: np.ndarray,
    master_seed: int,
    estimator_fn=estimate,
) -> DescentTrace:
    """Run the descent; each step draws a fresh seed namespace (no CRN).

    ``estimator_fn`` is injectable for tests; it must match the signature
    of :func:`fountain_id.estimator.estimate`.
    """
    p_data = np.asarray(p_data, float)
    if p_data.shape != (layout.count,):
        raise DimensionMismatch("data vector length must equal the detector count")
    theta = config.theta_init.copy()
    thetas = [theta.copy()]
    losses: list[float] = []
    p_hats: list[np.ndarray] = []
    loss_grads: list[np.ndarray] = []
    ms: list[int] = []
    stopped = False
    for k in range(config.steps):
        src = SourceSpec(theta=theta, beta=config.beta, profile=config.profile)
        bundle = estimator_fn(
            process,
            src,
            layout,
            config.ensemble_size(k),
            master_seed,
            boundary_nodes=config.boundary_nodes,
            seed_key=(streams.STEP, k),
        )
        residual = bundle.p_hat - p_data
        direction = residual @ bundle.grad_p_hat  # (2,) gradient of the loss
        theta = project_admissible(theta - config.step_size(k) * direction, config.beta)
        thetas.append(theta.copy())
        losses.append(loss(bundle.p_hat, p_data))
        p_hats.append(bundle.p_hat)
        loss_grads.append(direction)
        ms.append(bundle.M)
        if config.stop_rule is StopRule.GRAD_NORM_BELOW and np.linalg.norm(
            direction
        ) < config.stop_tol:
            stopped = True
            break
        if (
            config.stop_rule is StopRule.THETA_STALL
            and len(thetas) > config.stall_window
            and np.linalg.norm(thetas[-1] - thetas[-1 - config.stall_window])
            < config.stop_tol
        ):
            stopped = True
            break
    return DescentTrace(
        thetas=np.asarray(thetas),
        losses=np.asarray(losses),
        p_hats=np.asarray(p_hats),
        loss_grads=np.asarray(loss_grads),
        ensemble_sizes=np.asarray(ms),
        master_seed=master_seed,
        stopped_early=stopped,
    )
