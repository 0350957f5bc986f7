"""Relative s-wave motion of two atoms in an isotropic harmonic trap.

Units: d = √(ħ/μω), energies in ħω, ħ = μ = 1, so u'' = (r² + 2V − 2E)u.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import integrate, optimize, special

from dwhubbard.core import HBAR, DomainError, NumericError
from dwhubbard.potentials import (
    ContactInteraction,
    InteractionPotential,
    JostKohnNegative,
    JostKohnPositive,
    NoInteraction,
    length_scale,
)

logger = logging.getLogger(__name__)

FREE_ENERGY = 1.5
# Energies are bracketed by sampling this many points per refinement
BATCH = 17


class RelativeMotionProblem(BaseModel):
    """Pair problem in relative-oscillator units; ``potential`` must use μ = 1."""

    model_config = ConfigDict(frozen=True)

    potential: InteractionPotential
    omega: float = 1.0  # provenance only, rad/s
    r_max: float = 10.0
    dx: float = 0.002
    # Trap-like states sit above this energy; states below are molecular
    energy_floor: float = 0.5

    @model_validator(mode="after")
    def _check(self) -> RelativeMotionProblem:
        if not math.isclose(self.potential.reduced_mass, 1.0):
            raise ValueError("potential must be expressed with reduced_mass = 1")
        if self.r_max < 10.0:
            raise ValueError(f"r_max must be at least 10 oscillator lengths, got {self.r_max}")
        return self

    @property
    def r_min(self) -> float:
        if isinstance(self.potential, (JostKohnNegative, JostKohnPositive)):
            return 1e-4 * length_scale(self.potential)
        return 1e-6

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        x_max = math.log(self.r_max / self.r_min)
        n = int(math.ceil(x_max / self.dx))
        x = self.dx * np.arange(n + 1)
        return x, self.r_min * np.exp(x)


@dataclass
class PairSolution:
    E_rel: float
    r: np.ndarray
    u: np.ndarray
    U_pair: dict[str, float]
    residual: float
    u0: float | None = None  # Bethe-Peierls amplitude u(0), contact only
    warnings: list[str] = field(default_factory=list)


def _potential_on(problem: RelativeMotionProblem, r: np.ndarray) -> np.ndarray:
    if isinstance(problem.potential, (NoInteraction, ContactInteraction)):
        return np.zeros_like(r)
    return problem.potential.evaluate(r)


def _start_values(problem: RelativeMotionProblem, r: np.ndarray) -> tuple[float, float]:
    """y = u/√r at the first two grid points."""
    if isinstance(problem.potential, ContactInteraction):
        a_s = problem.potential.a_s
        u = 1.0 - r[:2] / a_s
    else:
        u = r[:2]
    y = u / np.sqrt(r[:2])
    return float(y[0]), float(y[1])


def _outward(f: np.ndarray, y0: float, y1: float, dx: float) -> np.ndarray:
    """Numerov for y'' = f·y; ``f`` has shape (n,) or (n, batch)."""
    h = dx**2 / 12.0
    y = np.empty_like(f)
    y[0], y[1] = y0, y1
    a = 1.0 - h * f
    b = 2.0 + 10.0 * h * f
    for i in range(1, len(f) - 1):
        y[i + 1] = (b[i] * y[i] - a[i - 1] * y[i - 1]) / a[i + 1]
    return y


def _count_nodes(y: np.ndarray) -> np.ndarray:
    signs = np.signbit(y[1:])
    return np.count_nonzero(signs[1:] != signs[:-1], axis=0)


def _f_matrix(r: np.ndarray, V: np.ndarray, energies: np.ndarray) -> np.ndarray:
    r2 = (r**2)[:, None]
    return r2 * (r2 + 2.0 * V[:, None] - 2.0 * energies[None, :]) + 0.25


def _bracket_energy(problem: RelativeMotionProblem, r: np.ndarray, V: np.ndarray) -> tuple[float, int]:
    y0, y1 = _start_values(problem, r)
    dx = problem.dx

    def nodes(energies: np.ndarray) -> np.ndarray:
        return _count_nodes(_outward(_f_matrix(r, V, energies), y0, y1, dx))

    lo = problem.energy_floor
    n0 = int(nodes(np.array([lo]))[0])
    hi = lo + 2.0
    for _ in range(20):
        if nodes(np.array([hi]))[0] > n0:
            break
        hi += 2.0
    else:
        raise NumericError("No trap state found above the energy floor", report={"bracket": (lo, hi), "nodes": n0})

    while hi - lo > 1e-13 * max(1.0, abs(hi)):
        energies = np.linspace(lo, hi, BATCH)
        counts = nodes(energies)
        above = max(int(np.argmax(counts > n0)), 1)
        lo, hi = energies[above - 1], energies[above]
    return 0.5 * (lo + hi), n0


def _matched_state(problem: RelativeMotionProblem, r: np.ndarray, V: np.ndarray, E: float) -> np.ndarray:
    """Outward solution up to the turning point joined to an inward one."""
    f = r**2 * (r**2 + 2.0 * V - 2.0 * E) + 0.25
    y0, y1 = _start_values(problem, r)
    outward = _outward(f, y0, y1, problem.dx)

    turning = math.sqrt(max(2.0 * E, 1.0))
    m = int(np.searchsorted(r, turning))
    inward = _outward(f[::-1], 0.0, 1e-300, problem.dx)[::-1]
    # Rescale so the two branches agree at the matching point
    y = np.concatenate([outward[:m], inward[m:] * (outward[m] / inward[m])])
    return y


def _numerov_residual(y: np.ndarray, f: np.ndarray, dx: float) -> float:
    h = dx**2 / 12.0
    a = 1.0 - h * f
    res = a[2:] * y[2:] - (2.0 + 10.0 * h * f[1:-1]) * y[1:-1] + a[:-2] * y[:-2]
    return float(np.abs(res).max() / (dx**2 * np.abs(y).max()))


def solve_relative_ground(problem: RelativeMotionProblem) -> PairSolution:
    x, r = problem.grid()
    V = _potential_on(problem, r)
    E, n0 = _bracket_energy(problem, r, V)

    y = _matched_state(problem, r, V, E)
    f = r**2 * (r**2 + 2.0 * V - 2.0 * E) + 0.25
    residual = _numerov_residual(y, f, problem.dx)
    if residual > 1e-8:
        raise NumericError("Pair wavefunction failed the residual check", report={"residual": residual, "E": E})

    u = np.sqrt(r) * y
    norm = integrate.simpson(r * u**2, x=x)
    u = u / math.sqrt(norm)
    if u[np.argmax(np.abs(u))] < 0:
        u = -u

    u0 = None
    potential = problem.potential
    if isinstance(potential, ContactInteraction):
        u0 = float(u[0] / (1.0 - r[0] / potential.a_s))
        matrix_element = u0**2 / (2.0 * potential.a_s)
    else:
        matrix_element = float(integrate.simpson(r * u**2 * V, x=x))

    warnings = []
    if n0:
        msg = f"{n0} molecular state(s) below the energy floor were skipped"
        logger.info(msg)
        warnings.append(msg)

    solution = PairSolution(
        E_rel=E,
        r=r,
        u=u,
        U_pair={"energy-shift": E - FREE_ENERGY, "matrix-element": matrix_element},
        residual=residual,
        u0=u0,
        warnings=warnings,
    )
    logger.debug("Pair ground state: E_rel=%.12g, residual=%.3g", E, residual)
    return solution


def onsite_U_from_pair(
    solution: PairSolution,
    problem: RelativeMotionProblem,
    definition: Literal["energy-shift", "matrix-element"] = "energy-shift",
) -> float:
    if definition not in solution.U_pair:
        raise DomainError(f"Unknown U definition: {definition}", field="definition")
    return solution.U_pair[definition]


def _busch_lhs(E: np.ndarray) -> np.ndarray:
    return math.sqrt(2.0) * special.gamma(-0.5 * E + 0.75) * special.rgamma(-0.5 * E + 0.25)


def busch_energy(a_s_over_d: float, branch: Literal["ground", "trap"] | None = None) -> float:
    """Contact-interaction relative energy from the Busch relation.

    The relation uses the single-atom length a_ho = d/√2. ``branch`` defaults
    to the state continuously connected to 3/2 ħω as a_s → 0.
    """
    if a_s_over_d == 0.0:
        return FREE_ENERGY
    if branch is None:
        branch = "ground" if a_s_over_d < 0 else "trap"
    target = 1.0 / (math.sqrt(2.0) * a_s_over_d)
    lo, hi = (0.5, 1.5) if branch == "ground" else (1.5, 2.5)
    eps = 1e-12
    return optimize.brentq(lambda E: _busch_lhs(E) - target, lo + eps, hi - eps, xtol=1e-14)


def first_order_shift(a_s_over_d: float) -> float:
    """g|ψ_rel(0)|² in ħω."""
    return 2.0 / math.sqrt(math.pi) * a_s_over_d


def problem_for_trap(
    potential_si: InteractionPotential,
    mass: float,
    omega: float,
    hbar: float = HBAR,
    **kwargs,
) -> RelativeMotionProblem:
    """Pair problem for two atoms of ``mass`` in an isotropic trap ``omega`` (SI)."""
    d = math.sqrt(2.0 * hbar / (mass * omega))
    return RelativeMotionProblem(potential=potential_si.rescaled(d, reduced_mass=1.0), omega=omega, **kwargs)


def _sweep_point(V0: float, mass: float, eta: float, potentials: dict[str, InteractionPotential],
                 definition: str, hbar: float) -> dict[str, float]:
    eta_t = math.sqrt(8.0 * V0)
    a_z = eta / eta_t
    omega = hbar / (mass * a_z**2)
    row = {"V0_over_hbar_omega_z": V0}
    for name, potential in potentials.items():
        problem = problem_for_trap(potential, mass, omega, hbar)
        solution = solve_relative_ground(problem)
        # U/h in Hz
        row[name] = onsite_U_from_pair(solution, problem, definition) * omega / (2.0 * math.pi)
    return row


def pair_sweep(
    V0_values: list[float],
    mass: float,
    eta: float,
    potentials: dict[str, InteractionPotential],
    definition: Literal["energy-shift", "matrix-element"] = "energy-shift",
    hbar: float = HBAR,
) -> list[dict[str, float]]:
    """On-site U/h (Hz) against barrier height at fixed well separation η (m).

    Each barrier height fixes ω = ω_z(V₀); ``potentials`` are in SI lengths.
    """
    return [_sweep_point(V0, mass, eta, potentials, definition, hbar) for V0 in V0_values]
