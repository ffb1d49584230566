"""Per-path exit outcomes, in single-path and ensemble (array) form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, DetectorLayout, classify_exits


@dataclass(frozen=True)
class ExitRecord:
    """Outcome of one simulated path."""

    exit_point: np.ndarray
    exit_time: float
    detector: int | None
    absorbed: bool


@dataclass(frozen=True)
class ExitEnsemble:
    """Column-wise outcomes of an ensemble of paths.

    ``detector[m]`` is the 0-based detector index or -1 (gap exit or
    absorbed).  ``absorbed[m]`` marks interior absorption; absorbed paths
    never map to a detector.
    """

    exit_points: np.ndarray
    exit_times: np.ndarray
    detector: np.ndarray
    absorbed: np.ndarray

    def __len__(self) -> int:
        return self.exit_points.shape[0]

    def record(self, m: int) -> ExitRecord:
        det = int(self.detector[m])
        return ExitRecord(
            exit_point=self.exit_points[m].copy(),
            exit_time=float(self.exit_times[m]),
            detector=None if det < 0 else det,
            absorbed=bool(self.absorbed[m]),
        )


def ensemble_from_kernel_output(out: np.ndarray, layout: DetectorLayout) -> ExitEnsemble:
    """Classify raw kernel rows (x, y, time, status) against the layout."""
    from ._kernels import STATUS_ABSORBED

    absorbed = out[:, 3] == STATUS_ABSORBED
    angles = np.arctan2(out[:, 1], out[:, 0]) % TWO_PI
    detector = classify_exits(layout, angles)
    detector[absorbed] = -1
    return ExitEnsemble(
        exit_points=out[:, 0:2].copy(),
        exit_times=out[:, 2].copy(),
        detector=detector,
        absorbed=absorbed,
    )
