"""Shared fixtures: small processes, layouts, and sources used across tests."""

import numpy as np
import pytest

import fountain_id as fid


@pytest.fixture(scope="session")
def layout5():
    """Default five-detector layout (half the boundary covered)."""
    return fid.DetectorLayout.equispaced(5)


@pytest.fixture(scope="session")
def bump_source():
    return fid.SourceSpec(np.array([-0.4, 0.1]), 0.15, fid.Profile.BUMP)


@pytest.fixture(scope="session")
def uniform_source():
    return fid.SourceSpec(np.array([-0.4, 0.1]), 0.15, fid.Profile.UNIFORM)


@pytest.fixture(scope="session")
def bm_process():
    """Driftless diffusion with a moderate step, fast enough for unit tests."""
    return fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=1e-3)


@pytest.fixture(scope="session")
def plmp_process():
    """Transport process with the reference experiment parameters."""
    return fid.PlmpSpec(speed=0.1, sigma_s=0.8, sigma_a=0.1)
