"""Unit-disk domain, boundary detector arcs, and exit classification.

All functions here are pure and operate on immutable data; the two
simulators and the estimator share them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidSegment

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Domain:
    """The compact domain: the open unit disk centered at the origin."""

    radius: float = 1.0

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ConfigError("domain radius must be positive")


@dataclass(frozen=True)
class DetectorLayout:
    """Disjoint boundary arcs where exits are counted.

    Each arc ``j`` is the half-open angular interval
    ``[center_angles[j] - half_widths[j], center_angles[j] + half_widths[j])``
    reduced mod 2*pi.  Arcs must be pairwise disjoint and their union must
    be a strict subset of the boundary.
    """

    center_angles: np.ndarray
    half_widths: np.ndarray

    def __post_init__(self) -> None:
        ca = np.atleast_1d(np.asarray(self.center_angles, dtype=float)) % TWO_PI
        hw = np.atleast_1d(np.asarray(self.half_widths, dtype=float))
        if ca.shape != hw.shape or ca.ndim != 1 or ca.size == 0:
            raise ConfigError("center_angles and half_widths must be equal-length 1D arrays")
        if np.any(hw <= 0):
            raise ConfigError("arc half-widths must be positive")
        if hw.sum() * 2.0 >= TWO_PI:
            raise ConfigError("detector arcs must not cover the whole boundary")
        ca.setflags(write=False)
        hw.setflags(write=False)
        object.__setattr__(self, "center_angles", ca)
        object.__setattr__(self, "half_widths", hw)
        # Disjointness: sort by left endpoint and check gaps (mod 2*pi).
        left = (ca - hw) % TWO_PI
        order = np.argsort(left)
        l_sorted = left[order]
        w_sorted = 2.0 * hw[order]
        for i in range(len(l_sorted)):
            nxt = (i + 1) % len(l_sorted)
            gap = (l_sorted[nxt] - l_sorted[i]) % TWO_PI
            if len(l_sorted) > 1 and w_sorted[i] > gap + 1e-15:
                raise ConfigError("detector arcs overlap")

    @property
    def count(self) -> int:
        return int(self.center_angles.size)

    @property
    def total_measure(self) -> float:
        """Total angular measure covered by all arcs."""
        return float(2.0 * self.half_widths.sum())

    def arc(self, j: int) -> tuple[float, float]:
        """(center_angle, half_width) of arc ``j``."""
        return float(self.center_angles[j]), float(self.half_widths[j])

    def to_dict(self) -> dict:
        return {
            "J": self.count,
            "center_angles": self.center_angles.tolist(),
            "half_widths": self.half_widths.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorLayout":
        layout = cls(np.asarray(d["center_angles"], float), np.asarray(d["half_widths"], float))
        if "J" in d and int(d["J"]) != layout.count:
            raise ConfigError("layout J field disagrees with arc list length")
        return layout

    @classmethod
    def equispaced(cls, J: int, coverage: float = 0.5) -> "DetectorLayout":
        """J arcs centered at 2*pi*j/J, jointly covering ``coverage`` of the
        boundary.

        The default covers half the boundary (gaps equal arcs); coverage is
        a free experiment knob and is recorded in every output file.
        """
        if J < 1:
            raise ConfigError("need at least one detector")
        if not 0.0 < coverage < 1.0:
            raise ConfigError("coverage must be in (0, 1)")
        centers = TWO_PI * np.arange(J) / J
        return cls(centers, np.full(J, coverage * np.pi / J))

    @property
    def _edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted arc-edge array for searchsorted classification (cached).

        Returns (edges, labels): ``edges`` is a flat ascending array of
        [lo_0, hi_0, lo_1, hi_1, ...] with wrap-around arcs split at 0, and
        ``labels[k]`` is the detector index of the k-th interval.
        """
        cached = self.__dict__.get("_edges_cache")
        if cached is not None:
            return cached
        los, his, labels = [], [], []
        for j in range(self.count):
            lo = (self.center_angles[j] - self.half_widths[j]) % TWO_PI
            hi = lo + 2.0 * self.half_widths[j]
            if hi <= TWO_PI:
                los.append(lo), his.append(hi), labels.append(j)
            else:  # arc wraps past 2*pi: split into two half-open pieces
                los.append(lo), his.append(TWO_PI), labels.append(j)
                los.append(0.0), his.append(hi - TWO_PI), labels.append(j)
        order = np.argsort(los)
        edges = np.column_stack((np.asarray(los)[order], np.asarray(his)[order])).ravel()
        result = (edges, np.asarray(labels)[order])
        self.__dict__["_edges_cache"] = result
        return result


@dataclass(frozen=True)
class BoundaryHit:
    """A boundary crossing: exit point, its angle, and the detector hit (if any)."""

    point: np.ndarray
    angle: float
    detector: int | None = field(default=None)


def classify_exit(layout: DetectorLayout, angle: float) -> int | None:
    """Detector index (0-based) whose arc contains ``angle``, or None.

    Half-open convention: angle belongs to arc j iff it lies in
    [center - hw, center + hw) mod 2*pi.
    """
    offset = (angle - (layout.center_angles - layout.half_widths)) % TWO_PI
    inside = offset < 2.0 * layout.half_widths
    hits = np.nonzero(inside)[0]
    return int(hits[0]) if hits.size else None


def classify_exits(layout: DetectorLayout, angles: np.ndarray) -> np.ndarray:
    """Vectorized :func:`classify_exit`; returns -1 where no detector is hit.

    Uses binary search over the sorted arc edges: an angle is inside arc
    ``labels[k]`` iff its insertion position among the flattened
    [lo, hi, lo, hi, ...] edges is odd (arcs are half-open on the right, so
    ``side='right'`` makes lo inclusive and hi exclusive).
    """
    angles = np.asarray(angles, dtype=float)
    edges, labels = layout._edges
    pos = np.searchsorted(edges, angles, side="right")
    inside = (pos % 2) == 1
    out = np.full(angles.shape, -1, dtype=np.int64)
    out[inside] = labels[pos[inside] >> 1]
    return out


def segment_boundary_crossing(p_in: np.ndarray, p_out: np.ndarray) -> tuple[float, BoundaryHit]:
    """First crossing of the unit circle along the segment p_in -> p_out.

    ``p_in`` must be strictly inside the disk and ``p_out`` on or outside it.
    Returns the segment parameter t* in (0, 1] and the crossing point
    projected exactly onto the circle.
    """
    p_in = np.asarray(p_in, dtype=float)
    p_out = np.asarray(p_out, dtype=float)
    d = p_out - p_in
    a = float(d @ d)
    if a == 0.0:
        raise InvalidSegment("p_in and p_out coincide")
    if p_in @ p_in >= 1.0 or p_out @ p_out < 1.0:
        raise InvalidSegment("need |p_in| < 1 <= |p_out|")
    b = 2.0 * float(p_in @ d)
    c = float(p_in @ p_in) - 1.0
    t_star = (-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
    t_star = min(t_star, 1.0)
    point = p_in + t_star * d
    point = point / np.linalg.norm(point)
    angle = float(np.arctan2(point[1], point[0]) % TWO_PI)
    return float(t_star), BoundaryHit(point=point, angle=angle)
