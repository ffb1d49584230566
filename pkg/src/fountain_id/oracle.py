"""Independent ground-truth providers.

For driftless Brownian motion the exit law from the unit disk is the
harmonic measure, available in closed form (Poisson kernel / disk
automorphism), so detector probabilities can be computed to quadrature
accuracy with no simulation.  For drifted diffusion and the transport
process no closed form is available and a cached high-budget Monte Carlo
reference plays the ground-truth role.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import InvalidInterior, QuadratureFailed
from .geometry import TWO_PI, DetectorLayout
from .process import ProcessSpec
from .source import Profile, SourceSpec, big_psi, normalization_constant

METHOD_POISSON_KERNEL = "poisson_kernel"
METHOD_HIGH_BUDGET_MC = "high_budget_mc"


@dataclass(frozen=True)
class OracleTable:
    """Ground-truth detector probabilities plus provenance metadata."""

    spec_hash: str
    p: np.ndarray
    se: np.ndarray
    method: str
    budget: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "spec_hash": self.spec_hash,
            "method": self.method,
            "p": self.p.tolist(),
            "se": self.se.tolist(),
            "budget": self.budget,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OracleTable":
        return cls(
            spec_hash=d["spec_hash"],
            p=np.asarray(d["p"], float),
            se=np.asarray(d["se"], float),
            method=d["method"],
            budget=int(d["budget"]),
            seed=d.get("seed"),
        )


def spec_hash(*parts: dict) -> str:
    """Content hash of a sequence of spec dicts (order-sensitive)."""
    payload = json.dumps(list(parts), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def poisson_kernel(x: np.ndarray, alpha: float) -> float:
    """Poisson kernel of the unit disk at boundary angle alpha, seen from x."""
    x = np.asarray(x, float)
    r2 = float(x @ x)
    e = np.array([np.cos(alpha), np.sin(alpha)])
    return (1.0 - r2) / (TWO_PI * float((e - x) @ (e - x)))


def harmonic_measure(x: np.ndarray, arc: tuple[float, float]) -> float:
    """P(driftless BM from x exits through the arc), by adaptive quadrature.

    ``arc`` is (center_angle, half_width).  Absolute tolerance 1e-10.
    """
    x = np.asarray(x, float)
    if x @ x >= 1.0:
        raise InvalidInterior("x must be strictly inside the unit disk")
    center, hw = arc
    val, err = integrate.quad(
        lambda a: poisson_kernel(x, a), center - hw, center + hw, epsabs=1e-12, epsrel=1e-12
    )
    if err > 1e-10:
        raise QuadratureFailed("harmonic-measure quadrature did not converge")
    return float(val)


def harmonic_measure_exact(points: np.ndarray, layout: DetectorLayout) -> np.ndarray:
    """Closed-form harmonic measure of every arc from every interior point.

    Uses the disk automorphism sending each point to the origin: the measure
    of an arc is the normalized angular span of its image.  Returns an array
    of shape (n_points, J).  This is the independent counterpart to the
    quadrature route in :func:`harmonic_measure`.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    if np.any(np.einsum("ij,ij->i", pts, pts) >= 1.0):
        raise InvalidInterior("points must be strictly inside the unit disk")
    z = pts[:, 0] + 1j * pts[:, 1]
    a_lo = layout.center_angles - layout.half_widths
    a_hi = layout.center_angles + layout.half_widths
    w_lo = np.exp(1j * a_lo)[None, :]
    w_hi = np.exp(1j * a_hi)[None, :]
    zc = np.conj(z)[:, None]
    img_lo = (w_lo - z[:, None]) / (1.0 - zc * w_lo)
    img_hi = (w_hi - z[:, None]) / (1.0 - zc * w_hi)
    span = (np.angle(img_hi) - np.angle(img_lo)) % TWO_PI
    return span / TWO_PI


def _polar_quadrature(source: SourceSpec, layout: DetectorLayout, n_r: int, n_a: int) -> np.ndarray:
    """Tensor polar rule for the integral of w_j against the source density."""
    r_nodes, r_weights = np.polynomial.legendre.leggauss(n_r)
    r_nodes = 0.5 * (r_nodes + 1.0)
    r_weights = 0.5 * r_weights
    angles = TWO_PI * np.arange(n_a) / n_a
    ru = np.outer(r_nodes, np.cos(angles)).ravel()
    rv = np.outer(r_nodes, np.sin(angles)).ravel()
    pts = source.theta + source.beta * np.column_stack((ru, rv))
    w = harmonic_measure_exact(pts, layout).reshape(n_r, n_a, layout.count)
    radial = (
        r_weights
        * r_nodes
        * big_psi(source.profile, r_nodes)
        / normalization_constant(source.profile)
    )
    return np.einsum("r,raj->j", radial, w) * (TWO_PI / n_a)


def source_exit_probability(
    source: SourceSpec, layout: DetectorLayout, tol: float = 1e-8
) -> np.ndarray:
    """Exact (quadrature) detector probabilities for driftless BM.

    p_j is the harmonic measure integrated against the source density over
    its support; refinement doubles the rule until successive values agree
    within ``tol`` componentwise.
    """
    n_r, n_a = 16, 32
    prev = _polar_quadrature(source, layout, n_r, n_a)
    for _ in range(6):
        n_r *= 2
        n_a *= 2
        cur = _polar_quadrature(source, layout, n_r, n_a)
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
    raise QuadratureFailed("source exit-probability quadrature did not converge")


def bm_oracle_table(source: SourceSpec, layout: DetectorLayout) -> OracleTable:
    """OracleTable wrapper around :func:`source_exit_probability`."""
    p = source_exit_probability(source, layout)
    h = spec_hash({"kind": "bm_exact"}, source.to_dict(), layout.to_dict())
    return OracleTable(
        spec_hash=h, p=p, se=np.zeros_like(p), method=METHOD_POISSON_KERNEL, budget=0
    )


def high_budget_reference(
    process: ProcessSpec,
    source: SourceSpec,
    layout: DetectorLayout,
    m_ref: int = 10**7,
    master_seed: int = 20260823,
    cache_dir: str | Path | None = None,
) -> OracleTable:
    """High-M Monte Carlo reference table, content-addressed and cached.

    Used where no closed form exists (drifted diffusion, PLMP) and to
    cross-validate the analytic oracle.  The seed namespace is reserved for
    reference runs so production estimates never reuse these streams.
    """
    from . import streams
    from .estimator import estimate

    h = spec_hash(
        process.to_dict(), source.to_dict(), layout.to_dict(), {"m_ref": m_ref, "seed": master_seed}
    )
    cache_file = None
    if cache_dir is not None:
        cache_file = Path(cache_dir) / f"oracle_{h}.json"
        if cache_file.exists():
            return OracleTable.from_dict(json.loads(cache_file.read_text()))
    bundle = estimate(
        process, source, layout, m_ref, master_seed, seed_key=(streams.REFERENCE,)
    )
    table = OracleTable(
        spec_hash=h,
        p=bundle.p_hat,
        se=bundle.se_p,
        method=METHOD_HIGH_BUDGET_MC,
        budget=m_ref,
        seed=master_seed,
    )
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        cache_file.write_text(json.dumps(table.to_dict(), indent=1))
    return table


def load_oracle_table(path: str | Path) -> OracleTable:
    return OracleTable.from_dict(json.loads(Path(path).read_text()))
