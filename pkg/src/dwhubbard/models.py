from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field


class HubbardParameters(BaseModel):
    """Two-site Hubbard couplings in units of ħω_z (or J when rescaled)."""

    model_config = ConfigDict(frozen=True)

    J: float = 0.0
    U: float = 0.0
    U_i: float = 0.0  # inter-site density-density
    I: float = 0.0  # noqa: E741 partial exchange
    K: float = 0.0  # exchange / pair hopping
    U_rr: float | None = None  # on-site value from the right mode
    provenance: dict = Field(default_factory=dict)

    def in_units_of_J(self) -> HubbardParameters:
        scale = self.J
        return self.model_copy(update={
            "J": 1.0,
            "U": self.U / scale,
            "U_i": self.U_i / scale,
            "I": self.I / scale,
            "K": self.K / scale,
            "U_rr": None if self.U_rr is None else self.U_rr / scale,
        })


class DerivedCouplings(BaseModel):
    model_config = ConfigDict(frozen=True)

    J_minus: float
    U_bar: float
    U_plus: float
    U_minus: float
    Omega: float
    W: float

    @classmethod
    def from_parameters(cls, p: HubbardParameters) -> DerivedCouplings:
        J_minus = p.J - p.I
        U_minus = p.U - p.U_i
        return cls(
            J_minus=J_minus,
            U_bar=p.U + p.U_i + 2.0 * p.K,
            U_plus=p.U + p.U_i,
            U_minus=U_minus,
            Omega=math.hypot(U_minus, 4.0 * J_minus),
            W=p.U - p.K,
        )

    @property
    def nu(self) -> float:
        """Detuning 2W − Ū of the double-occupancy doublet."""
        return 2.0 * self.W - self.U_bar


class FluctuationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    dE_phi_F: float
    dE_phi_B: float
    dN: float
    dW: float
    d_SQL_F: float
    d_SQL_B: float
    mean_W: float = 0.0


class ScatteringFit(BaseModel):
    """Effective-range fit of k·cot δ for a model potential."""

    model_config = ConfigDict(frozen=True)

    a_s_fit: float
    r0_fit: float
    a_s: float
    r0: float
    recovered: bool
    warnings: list[str] = Field(default_factory=list)
