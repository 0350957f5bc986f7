from __future__ import annotations

import math

import numpy as np
import pytest

from dwhubbard.core import LI6_MASS, trap_from_barrier
from dwhubbard.dvr import default_grid, solve_doublet
from dwhubbard.models import HubbardParameters

OMEGA_Z = 2.0 * math.pi * 1000.0


@pytest.fixture(scope="session")
def li6_trap():
    """⁶Li double well at ω_z = 2π·1 kHz, V₀ = 2ħω_z, ω_z/ω_ρ = 0.01."""
    return trap_from_barrier(LI6_MASS, OMEGA_Z, 2.0, aspect_ratio=0.01)


@pytest.fixture(scope="session")
def doublet():
    """Doublet at η̃ = 4 (V₀ = 2ħω_z) on the production grid."""
    return solve_doublet(default_grid(4.0, 513), 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_parameters(rng: np.random.Generator, scale: float = 20.0) -> HubbardParameters:
    U, U_i, I, K = rng.uniform(-scale, scale, size=4)
    return HubbardParameters(J=1.0, U=U, U_i=U_i, I=I, K=K)
