"""Admissible location-and-scale source distributions.

Two radial profiles are supported on the ball B_beta(theta):

* ``uniform``: constant density 1/(pi beta^2) (the interior log-density
  gradient vanishes; the whole location sensitivity comes from the
  support-boundary integral assembled by the estimator).
* ``bump``: density proportional to exp(-1/(1-r^2)), which vanishes at the
  support boundary, so the sensitivity has no boundary contribution.

Initial conditions are drawn by importance sampling from the uniform
distribution on the support; each draw carries the weight that reweights
uniform-ball proposals to the target density.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InvalidSource, QuadratureFailed


class Profile(enum.Enum):
    UNIFORM = "uniform"
    BUMP = "bump"


@dataclass(frozen=True)
class SourceSpec:
    """Location theta, radius beta, and radial profile of the source."""

    theta: np.ndarray
    beta: float
    profile: Profile = Profile.BUMP

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float).reshape(2)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        if self.beta <= 0:
            raise InvalidSource("beta must be positive")
        if np.linalg.norm(theta) + self.beta >= 1.0:
            raise InvalidSource("source support must lie strictly inside the unit disk")

    def to_dict(self) -> dict:
        return {"theta": self.theta.tolist(), "beta": self.beta, "profile": self.profile.value}

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpec":
        return cls(np.asarray(d["theta"], float), float(d["beta"]), Profile(d["profile"]))


@dataclass(frozen=True)
class SourceDraw:
    """Batch of importance-sampled initial conditions.

    ``positions[m] = theta + beta * unit_ball[m]`` and ``weights[m]`` is the
    importance weight pi * phi(U_m; 0, 1), so that averaging
    f(position) * weight over draws estimates the integral of f against the
    source density.
    """

    positions: np.ndarray
    unit_ball: np.ndarray
    weights: np.ndarray
    radii: np.ndarray  # |unit_ball| rows, kept to avoid renormalizing

    def __len__(self) -> int:
        return self.positions.shape[0]


def psi(profile: Profile, r: np.ndarray) -> np.ndarray:
    """Radial exponent psi(r) on [0, 1)."""
    r = np.asarray(r, dtype=float)
    if profile is Profile.UNIFORM:
        return np.ones_like(r)
    return 1.0 / (1.0 - r * r)


def psi_prime(profile: Profile, r: np.ndarray) -> np.ndarray:
    """d psi / d r on [0, 1)."""
    r = np.asarray(r, dtype=float)
    if profile is Profile.UNIFORM:
        return np.zeros_like(r)
    om = 1.0 - r * r
    return 2.0 * r / (om * om)


def big_psi(profile: Profile, r: np.ndarray) -> np.ndarray:
    """Radial shape Psi(r) = exp(-psi(r)) on [0, 1], 0 beyond."""
    r = np.asarray(r, dtype=float)
    if profile is Profile.UNIFORM:
        return np.where(r <= 1.0, np.exp(-1.0), 0.0)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def psi_at_support_edge(profile: Profile) -> float:
    """Psi(1): the density shape at the support boundary (limit from inside)."""
    return float(np.exp(-1.0)) if profile is Profile.UNIFORM else 0.0


@lru_cache(maxsize=None)
def normalization_constant(profile: Profile, d: int = 2) -> float:
    """C such that Psi(|x - theta| / beta) / (C beta^d) integrates to one.

    Uniform has the closed form pi * e^{-1} in d=2; bump is computed once by
    adaptive quadrature to relative tolerance 1e-10 and memoized.
    """
    if d != 2:
        raise InvalidSource("only d=2 is supported")
    if profile is Profile.UNIFORM:
        return float(np.pi * np.exp(-1.0))
    val, err = integrate.quad(
        lambda r: np.exp(-1.0 / (1.0 - r * r)) * r, 0.0, 1.0, epsabs=0.0, epsrel=1e-12
    )
    if not np.isfinite(val) or err > 1e-10 * abs(val):
        raise QuadratureFailed("normalization quadrature did not converge")
    return float(2.0 * np.pi * val)


def unit_density(profile: Profile, u: np.ndarray) -> np.ndarray:
    """Density phi(u; 0, 1) of the unit source (theta=0, beta=1) at points u (n, 2)."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    r = np.linalg.norm(u, axis=1)
    if profile is Profile.UNIFORM:
        # Constant-density reading: the e^{-1} in Psi cancels against C.
        return np.where(r <= 1.0, 1.0 / np.pi, 0.0)
    return big_psi(profile, r) / normalization_constant(profile)


def density(spec: SourceSpec, x: np.ndarray) -> np.ndarray:
    """Source density phi(x; theta, beta) at points x of shape (n, 2) or (2,)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    u = (np.atleast_2d(x) - spec.theta) / spec.beta
    out = unit_density(spec.profile, u) / spec.beta**2
    return float(out[0]) if scalar else out


def sample(spec: SourceSpec, rng: np.random.Generator, size: int) -> SourceDraw:
    """Draw ``size`` importance-sampled initial conditions.

    Uniform-ball proposals use the polar method (r = sqrt(u), uniform angle),
    which is exact and consumes a fixed number of stream values per draw.
    """
    u_r = np.sqrt(rng.random(size))
    u_a = rng.random(size) * (2.0 * np.pi)
    unit = np.column_stack((u_r * np.cos(u_a), u_r * np.sin(u_a)))
    positions = spec.theta + spec.beta * unit
    if spec.profile is Profile.UNIFORM:
        weights = np.ones(size)
    else:
        weights = (np.pi / normalization_constant(spec.profile)) * np.exp(
            -1.0 / (1.0 - u_r * u_r)
        )
    return SourceDraw(positions=positions, unit_ball=unit, weights=weights, radii=u_r)


def grad_log_density_factor(
    spec: SourceSpec, u: np.ndarray, radii: np.ndarray | None = None
) -> np.ndarray:
    """Per-sample interior location-sensitivity factor.

    For a draw with unit-ball point U (so xi = theta + beta U), returns
    psi'(|U|) * U / (beta |U|), the vector multiplying the exit indicator in
    the pathwise gradient estimate.  Uniform profile: identically zero
    (psi' = 0 in the interior).  For the bump profile psi'(r)/r =
    2/(1 - r^2)^2, so U = 0 is a removable singularity handled analytically.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if spec.profile is Profile.UNIFORM:
        return np.zeros_like(u)
    r2 = np.einsum("ij,ij->i", u, u) if radii is None else radii * radii
    om = 1.0 - r2
    coef = 2.0 / (spec.beta * om * om)
    return u * coef[:, None]


def beta_sensitivity_factor(spec: SourceSpec, u: np.ndarray, d: int = 2) -> np.ndarray:
    """Interior factor for the radius sensitivity: (psi'(r) r - d) / beta.

    Experimental; the optimizer never consumes it.  Derived by
    differentiating the density in beta (the scale both rescales the shape
    argument and the beta^-d prefactor).
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    r = np.linalg.norm(u, axis=1)
    return (psi_prime(spec.profile, r) * r - d) / spec.beta
