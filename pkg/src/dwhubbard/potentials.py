"""Jost-Kohn finite-range potentials, contact stand-in and a scattering self-check."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from dwhubbard.core import DomainError, NumericError
from dwhubbard.models import ScatteringFit

logger = logging.getLogger(__name__)

# |V| relative to the well depth below which the potential is treated as zero
RANGE_TOL = 1e-16
UNDERFLOW = 1e-300


class _Potential(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # ħ = 1; 0.5 is the pair of unit-mass atoms in oscillator units
    reduced_mass: float = 0.5


class NoInteraction(_Potential):
    kind: Literal["none"] = "none"

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(r, dtype=float))

    def rescaled(self, length_unit: float, reduced_mass: float | None = None) -> NoInteraction:
        return self.model_copy(update={"reduced_mass": reduced_mass or self.reduced_mass})


class ContactInteraction(_Potential):
    """Regularised delta pseudo-potential; never evaluated pointwise."""

    kind: Literal["contact"] = "contact"
    a_s: float

    @property
    def coupling(self) -> float:
        return 2.0 * math.pi * self.a_s / self.reduced_mass

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        raise DomainError("A contact interaction has no pointwise value", field="kind")

    def rescaled(self, length_unit: float, reduced_mass: float | None = None) -> ContactInteraction:
        return self.model_copy(update={
            "a_s": self.a_s / length_unit,
            "reduced_mass": reduced_mass or self.reduced_mass,
        })


class JostKohnNegative(_Potential):
    kind: Literal["jk_negative"] = "jk_negative"
    a_s: float
    r0: float

    @model_validator(mode="after")
    def _check(self) -> JostKohnNegative:
        if not self.a_s < 0:
            raise ValueError(f"a_s must be negative, got {self.a_s}")
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        return self

    @property
    def alpha(self) -> float:
        return math.sqrt(1.0 - 2.0 * self.r0 / self.a_s)

    @property
    def beta(self) -> float:
        return 1.0 + self.alpha

    @property
    def depth(self) -> float:
        return 4.0 * self.alpha / (self.reduced_mass * self.r0**2)

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        x = np.asarray(r, dtype=float) / self.r0
        e = np.exp(-2.0 * self.beta * x)
        alpha = self.alpha
        v = -4.0 / (self.reduced_mass * self.r0**2) * alpha * self.beta**2 * e / (alpha + e) ** 2
        return np.where(np.abs(v) < UNDERFLOW, 0.0, v)

    def rescaled(self, length_unit: float, reduced_mass: float | None = None) -> JostKohnNegative:
        return self.model_copy(update={
            "a_s": self.a_s / length_unit,
            "r0": self.r0 / length_unit,
            "reduced_mass": reduced_mass or self.reduced_mass,
        })


class JostKohnPositive(_Potential):
    """Positive-a_s model potential; built from Λ or from the bound-state κ."""

    kind: Literal["jk_positive"] = "jk_positive"
    a_s: float
    r0: float
    Lambda: float

    @model_validator(mode="before")
    @classmethod
    def _kappa_to_lambda(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("kappa") is not None:
            data = dict(data)
            kappa = data.pop("kappa")
            if data.get("Lambda") is not None:
                raise ValueError("give either Lambda or kappa, not both")
            data["Lambda"] = lambda_from_kappa(kappa, data["a_s"], data["r0"])
        elif isinstance(data, dict):
            data = {k: v for k, v in data.items() if k != "kappa"}
        return data

    @model_validator(mode="after")
    def _check(self) -> JostKohnPositive:
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if not self.a_s > 2.0 * self.r0:
            raise ValueError(f"a_s must exceed 2*r0, got a_s={self.a_s}, r0={self.r0}")
        if not -1.0 < self.Lambda < 1.0:
            raise ValueError(f"Lambda must lie in (-1, 1), got {self.Lambda}")
        return self

    @property
    def alpha(self) -> float:
        return math.sqrt(1.0 - 2.0 * self.r0 / self.a_s)

    @property
    def beta(self) -> float:
        return 1.0 + self.alpha

    @property
    def kappa(self) -> float:
        return kappa_from_lambda(self.Lambda, self.a_s, self.r0)

    @property
    def amplitude(self) -> float:
        return 4.0 * self.alpha / (self.reduced_mass * self.r0**2)

    @property
    def binding_energy(self) -> float:
        return -self.kappa**2 / (2.0 * self.reduced_mass)

    def _terms(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(r, dtype=float) / self.r0
        a, b, lam = self.alpha, self.beta, self.Lambda
        e_beta = np.exp(-2.0 * b * x)
        first = (1 + a * lam) * (a + lam) * (1 - a) * (1 - lam**2 * e_beta)
        second = lam * b * ((1 + lam * a) ** 2 * np.exp(-2.0 * a * x) - (a + lam) ** 2 * np.exp(-2.0 * x))
        denominator = (1 + a * lam) ** 2 * (a + lam**2 * e_beta) - (a + lam) ** 2 * (
            np.exp(-2.0 * (1 - a) * x) + a * lam**2 * np.exp(-4.0 * x)
        )
        prefactor = self.amplitude * np.exp(-2.0 * (1 - a) * x)
        return prefactor, first, second, denominator

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        prefactor, first, second, denominator = self._terms(r)
        v = prefactor * (first**2 - second**2) / denominator**2
        return np.where(np.abs(v) < UNDERFLOW, 0.0, v)

    def rescaled(self, length_unit: float, reduced_mass: float | None = None) -> JostKohnPositive:
        return self.model_copy(update={
            "a_s": self.a_s / length_unit,
            "r0": self.r0 / length_unit,
            "reduced_mass": reduced_mass or self.reduced_mass,
        })


InteractionPotential = Annotated[
    Union[NoInteraction, ContactInteraction, JostKohnNegative, JostKohnPositive],
    Field(discriminator="kind"),
]

_potential_adapter = TypeAdapter(InteractionPotential)


def parse_potential(data: dict) -> InteractionPotential:
    return _potential_adapter.validate_python(data)


def _alpha(a_s: float, r0: float) -> float:
    if not r0 > 0:
        raise DomainError(f"r0 must be positive, got {r0}", field="r0")
    if not a_s > 2.0 * r0:
        raise DomainError(f"a_s must exceed 2*r0, got a_s={a_s}, r0={r0}", field="a_s")
    return math.sqrt(1.0 - 2.0 * r0 / a_s)


def lambda_from_kappa(kappa: float, a_s: float, r0: float) -> float:
    alpha = _alpha(a_s, r0)
    if not kappa * r0 > 0:
        raise DomainError(f"kappa*r0 must be positive, got {kappa * r0}", field="kappa")
    q = kappa * r0 / (1.0 + alpha)
    return (q - 1.0) / (q + 1.0)


def kappa_from_lambda(Lambda: float, a_s: float, r0: float) -> float:
    alpha = _alpha(a_s, r0)
    if not -1.0 < Lambda < 1.0:
        raise DomainError(f"Lambda must lie in (-1, 1), got {Lambda}", field="Lambda")
    return (1.0 + alpha) * (1.0 + Lambda) / ((1.0 - Lambda) * r0)


def evaluate(potential: InteractionPotential, r: np.ndarray) -> np.ndarray:
    return potential.evaluate(r)


def evaluate_positive_factored(potential: JostKohnPositive, r: np.ndarray) -> np.ndarray:
    """V₊ with its numerator regrouped as a product of sum and difference."""
    prefactor, first, second, denominator = potential._terms(r)
    return prefactor * ((first - second) / denominator) * ((first + second) / denominator)


def length_scale(potential: InteractionPotential) -> float:
    """Shortest length on which the potential varies."""
    if isinstance(potential, JostKohnNegative):
        return potential.r0 / (2.0 * potential.beta)
    if isinstance(potential, JostKohnPositive):
        return min(potential.r0 / 4.0, 1.0 / potential.kappa)
    return 0.0


def interaction_range(potential: InteractionPotential) -> float:
    """Radius beyond which |V| stays below RANGE_TOL of its largest value."""
    if not isinstance(potential, (JostKohnNegative, JostKohnPositive)):
        return 0.0
    r = potential.r0 * np.geomspace(1e-4, 1e7, 20000)
    v = np.abs(potential.evaluate(r))
    significant = np.nonzero(v >= RANGE_TOL * v.max())[0]
    return float(r[min(significant[-1] + 1, len(r) - 1)])


@dataclass
class PhaseShiftTable:
    k: np.ndarray
    delta: np.ndarray
    kcotdelta: np.ndarray


def _numerov_tan_delta(potential: InteractionPotential, k: np.ndarray, step: float, r_match: float) -> np.ndarray:
    """Outward Numerov for u'' = (2μV − k²)u; returns tan δ at every k."""
    n_steps = int(math.ceil(r_match / step))
    r = step * np.arange(n_steps + 1)
    coupling = 2.0 * potential.reduced_mass * potential.evaluate(r)
    i1 = int(0.9 * n_steps)
    h2 = step**2 / 12.0

    f_prev = coupling[0] - k**2
    f_cur = coupling[1] - k**2
    u_prev = np.zeros_like(k)
    u_cur = np.full_like(k, step)
    u1 = None
    for n in range(1, n_steps):
        f_next = coupling[n + 1] - k**2
        u_next = (2.0 * u_cur * (1.0 + 5.0 * h2 * f_cur) - u_prev * (1.0 - h2 * f_prev)) / (1.0 - h2 * f_next)
        u_prev, u_cur = u_cur, u_next
        f_prev, f_cur = f_cur, f_next
        if n + 1 == i1:
            u1 = u_cur.copy()
        scale = np.abs(u_cur).max()
        if scale > 1e100:
            u_prev, u_cur = u_prev / scale, u_cur / scale
            if u1 is not None:
                u1 = u1 / scale

    u2 = u_cur
    r1, r2 = r[i1], r[n_steps]
    s1, c1 = np.sin(k * r1), np.cos(k * r1)
    s2, c2 = np.sin(k * r2), np.cos(k * r2)
    return (u2 * s1 - u1 * s2) / (u1 * c2 - u2 * c1)


def _matching_radius(potential: InteractionPotential) -> float:
    a_s = getattr(potential, "a_s", 0.0)
    return 25.0 * max(potential.r0, abs(a_s))


def phase_shifts(potential: InteractionPotential, k_grid: np.ndarray, step: float | None = None) -> PhaseShiftTable:
    if not isinstance(potential, (JostKohnNegative, JostKohnPositive)):
        raise DomainError(f"phase shifts need a finite-range potential, got {potential.kind}", field="kind")
    k = np.asarray(k_grid, dtype=float)
    step = step or length_scale(potential) / 40.0
    tan_delta = _numerov_tan_delta(potential, k, step, _matching_radius(potential))
    delta = np.arctan(tan_delta)
    with np.errstate(divide="ignore"):
        kcot = k / tan_delta
    return PhaseShiftTable(k=k, delta=delta, kcotdelta=kcot)


def default_k_grid(potential: InteractionPotential) -> np.ndarray:
    return np.linspace(0.01, 0.09, 8) / potential.r0


def _effective_range_fit(table: PhaseShiftTable) -> tuple[float, float]:
    k2 = table.k**2
    coeffs = np.polynomial.polynomial.polyfit(k2, table.kcotdelta, 2, w=1.0 / (1.0 + k2 / k2.max()))
    return -1.0 / coeffs[0], 2.0 * coeffs[1]


def verify_scattering(potential: InteractionPotential, k_grid: np.ndarray | None = None) -> ScatteringFit:
    """Recover a_s and r0 from Numerov phase shifts via the effective-range expansion."""
    if isinstance(potential, NoInteraction):
        return ScatteringFit(a_s_fit=0.0, r0_fit=0.0, a_s=0.0, r0=0.0, recovered=True)
    if isinstance(potential, ContactInteraction):
        raise DomainError("Contact interactions are not integrated pointwise", field="kind")

    k = default_k_grid(potential) if k_grid is None else np.asarray(k_grid, dtype=float)
    if np.any(k * potential.r0 >= 0.1):
        logger.warning("k grid leaves the low-energy window k*r0 < 0.1")

    step = length_scale(potential) / 40.0
    coarse = phase_shifts(potential, k, step)
    fine = phase_shifts(potential, k, step / 2.0)
    if np.all(np.abs(fine.delta) < 1e-10):
        return ScatteringFit(a_s_fit=0.0, r0_fit=0.0, a_s=potential.a_s, r0=potential.r0, recovered=False)

    a_coarse, r_coarse = _effective_range_fit(coarse)
    a_fit, r_fit = _effective_range_fit(fine)
    if abs(a_fit - a_coarse) > 1e-4 * abs(a_fit):
        raise NumericError(
            "Phase-shift integration did not converge",
            report={"step": step, "a_s_coarse": a_coarse, "a_s_fine": a_fit},
        )

    warnings = []
    recovered = abs(a_fit - potential.a_s) <= 0.01 * abs(potential.a_s) and abs(r_fit - potential.r0) <= 0.05 * potential.r0
    if not recovered:
        msg = (
            f"{potential.kind}: fitted a_s={a_fit:.6g}, r0={r_fit:.6g} "
            f"vs nominal a_s={potential.a_s:.6g}, r0={potential.r0:.6g}"
        )
        logger.warning("Scattering recovery failed: %s", msg)
        warnings.append(msg)
    return ScatteringFit(
        a_s_fit=a_fit,
        r0_fit=r_fit,
        a_s=potential.a_s,
        r0=potential.r0,
        recovered=recovered,
        warnings=warnings,
    )
