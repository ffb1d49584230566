"""Monte Carlo exit-probability and location-gradient estimates.

One simultaneous-release ensemble yields, per detector j:

* ``p_hat[j]``   = (1/M) sum_m 1{exit_m in D_j} w_m, where w_m is the
  importance weight of the m-th initial draw;
* the interior gradient term, the same sum with the per-draw
  log-density sensitivity factor attached;
* for the uniform profile, the support-boundary correction: the density
  does not vanish at the edge of its support, so translating the support
  contributes a surface integral, estimated by a periodic trapezoid rule
  over starting points on the support circle.

Absorbed paths carry a zero indicator for every detector.  Raw sums (not
means) are stored so partial results merge exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import streams
from .errors import InvalidSource, MixedProvenance
from .geometry import TWO_PI, DetectorLayout
from .oracle import spec_hash
from .process import ProcessSpec, simulate_exit_ensemble
from .source import (
    Profile,
    SourceSpec,
    beta_sensitivity_factor,
    grad_log_density_factor,
    normalization_constant,
    psi_at_support_edge,
    sample,
)

DEFAULT_BOUNDARY_NODES = 64

# Instrumentation: boundary_term invocation count (the bump profile must
# never route through it).
_boundary_term_calls = 0


@dataclass(frozen=True)
class EstimateBundle:
    """Per-detector estimates with enough raw sums for exact pooling.

    ``p_hat`` entries are not clamped to [0, 1]: importance weights can push
    individual summands above one, and the optimizer wants bias-free values.
    """

    provenance: str
    M: int
    n_absorbed: int
    hit_w_sum: np.ndarray        # (J,)   sum of 1_Dj * w
    hit_w2_sum: np.ndarray       # (J,)   sum of (1_Dj * w)^2
    grad_sum: np.ndarray         # (J, 2) interior gradient summands
    grad2_sum: np.ndarray        # (J, 2) their squares
    boundary_hits: np.ndarray | None = None   # (J, Q) hit counts per support node
    boundary_paths: np.ndarray | None = None  # (Q,) paths per node
    boundary_coef: float = 0.0                # Psi(1) * beta^{d-1} / (C beta^d)
    beta_grad_sum: np.ndarray | None = None   # (J,) experimental radius sensitivity
    beta_grad2_sum: np.ndarray | None = None

    @property
    def J(self) -> int:
        return self.hit_w_sum.shape[0]

    @property
    def p_hat(self) -> np.ndarray:
        return self.hit_w_sum / self.M

    @property
    def se_p(self) -> np.ndarray:
        var = np.maximum(self.hit_w2_sum / self.M - self.p_hat**2, 0.0)
        return np.sqrt(var / self.M)

    def _boundary_term(self) -> tuple[np.ndarray, np.ndarray]:
        """(value, variance) of the support-boundary gradient term, (J, 2) each."""
        if self.boundary_hits is None:
            z = np.zeros((self.J, 2))
            return z, z.copy()
        q = self.boundary_hits.shape[1]
        alphas = TWO_PI * np.arange(q) / q
        direction = np.column_stack((np.cos(alphas), np.sin(alphas)))
        p_node = self.boundary_hits / self.boundary_paths
        weight = self.boundary_coef * (TWO_PI / q)
        value = weight * p_node @ direction
        var_node = p_node * (1.0 - p_node) / self.boundary_paths
        variance = weight**2 * var_node @ direction**2
        return value, variance

    @property
    def grad_p_hat(self) -> np.ndarray:
        bval, _ = self._boundary_term()
        return self.grad_sum / self.M + bval

    @property
    def se_grad(self) -> np.ndarray:
        interior_mean = self.grad_sum / self.M
        var = np.maximum(self.grad2_sum / self.M - interior_mean**2, 0.0) / self.M
        _, bvar = self._boundary_term()
        return np.sqrt(var + bvar)

    @property
    def beta_grad(self) -> np.ndarray | None:
        if self.beta_grad_sum is None:
            return None
        interior = self.beta_grad_sum / self.M
        if self.boundary_hits is None:
            return interior
        q = self.boundary_hits.shape[1]
        p_node = self.boundary_hits / self.boundary_paths
        return interior + self.boundary_coef * (TWO_PI / q) * p_node.sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat.tolist(),
            "grad": self.grad_p_hat.tolist(),
            "se": self.se_p.tolist(),
            "se_grad": self.se_grad.tolist(),
            "M": self.M,
            "n_absorbed": self.n_absorbed,
            "spec_hash": self.provenance,
        }


def boundary_term_nodes(
    process: ProcessSpec,
    source: SourceSpec,
    layout: DetectorLayout,
    n_nodes: int,
    paths_per_node: int,
    master_seed: int,
    key_prefix: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node detector hit counts on the support circle.

    Node q sits at x(alpha_q) = theta + beta (cos alpha_q, sin alpha_q) with
    alpha_q = 2 pi q / n_nodes; each node launches ``paths_per_node`` fresh
    paths.  Returns (hits of shape (J, n_nodes), paths of shape (n_nodes,)).
    """
    global _boundary_term_calls
    _boundary_term_calls += 1
    alphas = TWO_PI * np.arange(n_nodes) / n_nodes
    ring = source.theta + source.beta * np.column_stack((np.cos(alphas), np.sin(alphas)))
    starts = np.repeat(ring, paths_per_node, axis=0)
    seeds = streams.path_seeds(
        master_seed, *key_prefix, streams.BOUNDARY, n=n_nodes * paths_per_node
    )
    ens = simulate_exit_ensemble(process, starts, layout, seeds)
    node_of_path = np.repeat(np.arange(n_nodes), paths_per_node)
    hits = np.zeros((layout.count, n_nodes))
    mask = ens.detector >= 0
    np.add.at(hits, (ens.detector[mask], node_of_path[mask]), 1.0)
    return hits, np.full(n_nodes, float(paths_per_node))


def boundary_term(
    process: ProcessSpec,
    source: SourceSpec,
    layout: DetectorLayout,
    n_nodes: int,
    paths_per_node: int,
    master_seed: int,
) -> np.ndarray:
    """Support-boundary gradient correction, one 2-vector row per detector.

    Only meaningful for the uniform profile; the bump profile's density
    vanishes at the support edge and the term is identically zero.
    """
    if source.profile is not Profile.UNIFORM:
        raise InvalidSource("boundary term applies to the uniform profile only")
    hits, paths = boundary_term_nodes(
        process, source, layout, n_nodes, paths_per_node, master_seed
    )
    coef = _boundary_coef(source)
    alphas = TWO_PI * np.arange(n_nodes) / n_nodes
    direction = np.column_stack((np.cos(alphas), np.sin(alphas)))
    return coef * (TWO_PI / n_nodes) * (hits / paths) @ direction


def _boundary_coef(source: SourceSpec, d: int = 2) -> float:
    # Psi(1)/(C beta^d) density at the support edge, times the beta^{d-1}
    # Jacobian of the support-circle surface measure dS = beta dalpha.
    edge = psi_at_support_edge(source.profile)
    return edge * source.beta ** (d - 1) / (normalization_constant(source.profile) * source.beta**d)


def estimate(
    process: ProcessSpec,
    source: SourceSpec,
    layout: DetectorLayout,
    M: int,
    master_seed: int,
    boundary_nodes: int = DEFAULT_BOUNDARY_NODES,
    boundary_paths_per_node: int | None = None,
    include_beta_gradient: bool = False,
    seed_key: tuple[int, ...] = (),
) -> EstimateBundle:
    """Simultaneous-release estimate of p_hat and its location gradient.

    ``seed_key`` prefixes the stream spawn keys, giving callers disjoint
    seed namespaces (per descent step, reference runs, ...).  The same
    master seed and key reproduce the same initial draws and path streams
    for any theta, so finite-difference checks can couple runs with common
    random numbers.
    """
    if M < 1:
        raise InvalidSource("need at least one path")
    prefix = seed_key
    draw_rng = streams.make_rng(master_seed, *prefix, streams.DRAWS)
    draws = sample(source, draw_rng, M)
    seeds = streams.path_seeds(master_seed, *prefix, streams.PATHS, n=M)
    ens = simulate_exit_ensemble(process, draws.positions, layout, seeds)

    J = layout.count
    mask = ens.detector >= 0
    det = ens.detector[mask]
    w = draws.weights[mask]
    hit_w_sum = np.bincount(det, weights=w, minlength=J)
    hit_w2_sum = np.bincount(det, weights=w * w, minlength=J)

    factor = grad_log_density_factor(source, draws.unit_ball, radii=draws.radii)
    g = factor[mask] * w[:, None]
    grad_sum = np.column_stack(
        [np.bincount(det, weights=g[:, i], minlength=J) for i in range(2)]
    )
    grad2_sum = np.column_stack(
        [np.bincount(det, weights=g[:, i] ** 2, minlength=J) for i in range(2)]
    )

    beta_grad_sum = beta_grad2_sum = None
    if include_beta_gradient:
        bfac = beta_sensitivity_factor(source, draws.unit_ball)
        bg = bfac[mask] * w
        beta_grad_sum = np.bincount(det, weights=bg, minlength=J)
        beta_grad2_sum = np.bincount(det, weights=bg * bg, minlength=J)

    boundary_hits = boundary_paths = None
    coef = 0.0
    if psi_at_support_edge(source.profile) > 0.0:
        if boundary_paths_per_node is None:
            boundary_paths_per_node = max(256, M // boundary_nodes)
        boundary_hits, boundary_paths = boundary_term_nodes(
            process, source, layout, boundary_nodes, boundary_paths_per_node,
            master_seed, key_prefix=prefix,
        )
        coef = _boundary_coef(source)

    provenance = spec_hash(process.to_dict(), source.to_dict(), layout.to_dict())
    return EstimateBundle(
        provenance=provenance,
        M=M,
        n_absorbed=int(ens.absorbed.sum()),
        hit_w_sum=hit_w_sum,
        hit_w2_sum=hit_w2_sum,
        grad_sum=grad_sum,
        grad2_sum=grad2_sum,
        boundary_hits=boundary_hits,
        boundary_paths=boundary_paths,
        boundary_coef=coef,
        beta_grad_sum=beta_grad_sum,
        beta_grad2_sum=beta_grad2_sum,
    )


def merge(bundles: list[EstimateBundle]) -> EstimateBundle:
    """Pool bundles exactly, as if all paths had been run in one pass."""
    if not bundles:
        raise MixedProvenance("nothing to merge")
    first = bundles[0]
    if any(b.provenance != first.provenance for b in bundles):
        raise MixedProvenance("bundles were produced under different specs")
    has_boundary = first.boundary_hits is not None
    has_beta = first.beta_grad_sum is not None
    if any((b.boundary_hits is not None) != has_boundary for b in bundles) or any(
        (b.beta_grad_sum is not None) != has_beta for b in bundles
    ):
        raise MixedProvenance("bundles carry different optional terms")
    return EstimateBundle(
        provenance=first.provenance,
        M=sum(b.M for b in bundles),
        n_absorbed=sum(b.n_absorbed for b in bundles),
        hit_w_sum=np.sum([b.hit_w_sum for b in bundles], axis=0),
        hit_w2_sum=np.sum([b.hit_w2_sum for b in bundles], axis=0),
        grad_sum=np.sum([b.grad_sum for b in bundles], axis=0),
        grad2_sum=np.sum([b.grad2_sum for b in bundles], axis=0),
        boundary_hits=(
            np.sum([b.boundary_hits for b in bundles], axis=0) if has_boundary else None
        ),
        boundary_paths=(
            np.sum([b.boundary_paths for b in bundles], axis=0) if has_boundary else None
        ),
        boundary_coef=first.boundary_coef,
        beta_grad_sum=(
            np.sum([b.beta_grad_sum for b in bundles], axis=0) if has_beta else None
        ),
        beta_grad2_sum=(
            np.sum([b.beta_grad2_sum for b in bundles], axis=0) if has_beta else None
        ),
    )
