"""Trap geometry, derived scales, unit conversion and shared error types."""
from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import constants

logger = logging.getLogger(__name__)

HBAR = constants.hbar
AMU = constants.atomic_mass
LI6_MASS = 6.0151228874 * AMU

# Probability/norm tolerance shared by the state and density-matrix checks
NORM_TOL = 1e-10


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class NumericError(RuntimeError):
    """A numerical routine failed; ``report`` carries the diagnostics."""

    def __init__(self, message: str, report: dict | None = None) -> None:
        super().__init__(message)
        self.report = report or {}

    def __str__(self) -> str:
        base = super().__str__()
        if not self.report:
            return base
        details = ", ".join(f"{k}={v}" for k, v in self.report.items())
        return f"{base} ({details})"


class TrapConfig(BaseModel):
    """Axially quartic, radially harmonic trap: V = ½λ²(z²−η²)² + ½mω_ρ²ρ²."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    mass: float
    omega_rho: float
    lam: float = Field(alias="lambda")
    eta: float


class TrapDerived(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega_z: float
    V0: float
    a_z: float
    a_rho: float
    zeta: float


class UnitSystem(BaseModel):
    """Scale factors between SI and oscillator units (ħ = m = ω_z = 1)."""

    model_config = ConfigDict(frozen=True)

    mode: Literal["SI", "oscillator"] = "oscillator"
    length: float = 1.0
    energy: float = 1.0
    time: float = 1.0

    @classmethod
    def from_trap(cls, derived: TrapDerived, hbar: float = HBAR) -> UnitSystem:
        return cls(
            mode="SI",
            length=derived.a_z,
            energy=hbar * derived.omega_z,
            time=1.0 / derived.omega_z,
        )

    def _factor(self, kind: str) -> float:
        factors = {
            "length": self.length,
            "energy": self.energy,
            "time": self.time,
            "frequency": 1.0 / self.time,
            "wavenumber": 1.0 / self.length,
        }
        if kind not in factors:
            raise DomainError(f"Unknown quantity kind: {kind}", field="kind")
        return factors[kind]

    def to_oscillator(self, value, kind: str):
        return value / self._factor(kind)

    def to_si(self, value, kind: str):
        return value * self._factor(kind)


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"{name} must be positive and finite, got {value!r}", field=name)


def derive_trap(config: TrapConfig, hbar: float = HBAR) -> TrapDerived:
    _require_positive(mass=config.mass, omega_rho=config.omega_rho, lam=config.lam, eta=config.eta)
    m = config.mass
    omega_z = 2.0 * config.lam * config.eta / math.sqrt(m)
    return TrapDerived(
        omega_z=omega_z,
        V0=0.5 * config.lam**2 * config.eta**4,
        a_z=math.sqrt(hbar / (m * omega_z)),
        a_rho=math.sqrt(hbar / (m * config.omega_rho)),
        zeta=math.sqrt(omega_z / config.omega_rho),
    )


def calibrate_trap(
    mass: float,
    eta: float,
    target_omega_z: float,
    aspect_ratio: float = 0.01,
) -> TrapConfig:
    """Quartic strength giving ``target_omega_z`` at fixed η.

    ``aspect_ratio`` is ω_z/ω_ρ and fixes the radial frequency.
    """
    _require_positive(mass=mass, eta=eta, target_omega_z=target_omega_z, aspect_ratio=aspect_ratio)
    lam = target_omega_z * math.sqrt(mass) / (2.0 * eta)
    return TrapConfig(mass=mass, omega_rho=target_omega_z / aspect_ratio, lam=lam, eta=eta)


def trap_from_barrier(
    mass: float,
    omega_z: float,
    V0: float,
    aspect_ratio: float = 0.01,
    hbar: float = HBAR,
) -> TrapConfig:
    """Trap with barrier height ``V0`` (in ħω_z) at axial frequency ``omega_z``."""
    _require_positive(mass=mass, omega_z=omega_z, V0=V0)
    a_z = math.sqrt(hbar / (mass * omega_z))
    eta = math.sqrt(8.0 * V0) * a_z
    return calibrate_trap(mass, eta, omega_z, aspect_ratio)


def eta_tilde(config: TrapConfig, hbar: float = HBAR) -> float:
    """Well position in units of a_z; it alone fixes the axial problem."""
    return config.eta / derive_trap(config, hbar).a_z


def double_well(z: np.ndarray, eta_t: float) -> np.ndarray:
    """Axial potential in ħω_z for z in a_z."""
    z = np.asarray(z, dtype=float)
    return (z**2 - eta_t**2) ** 2 / (8.0 * eta_t**2)


def is_tight_binding(derived: TrapDerived, hbar: float = HBAR) -> bool:
    ratio = derived.V0 / (hbar * derived.omega_z)
    if ratio <= 1.0:
        logger.warning("Barrier V0 = %.4g hbar*omega_z is not above the zero-point scale", ratio)
        return False
    return True
