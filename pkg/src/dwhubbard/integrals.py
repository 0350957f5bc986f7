"""Hubbard interaction coefficients from localized modes and a pair potential.

All four coefficients share the transverse ground state, so the two radial
coordinates collapse onto the relative transverse distance ρ with weight
e^{-ρ²/2a_ρ²}/(2πa_ρ²) and the axial pair enters through the mode
cross-correlation C(u) = ∫A(z+u)B(z)dz, u = z₁ − z₂.
"""
from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from dwhubbard.core import DomainError, NumericError, TrapConfig, derive_trap
from dwhubbard.dvr import SingleParticleSolution, mode_interpolator
from dwhubbard.models import HubbardParameters
from dwhubbard.potentials import (
    ContactInteraction,
    InteractionPotential,
    JostKohnNegative,
    JostKohnPositive,
    NoInteraction,
    interaction_range,
    length_scale,
)

logger = logging.getLogger(__name__)

THETA_NODES = 128
RADIAL_NODES = 24
RHO_NODES = 96
U_NODES = 16
U_PANEL = 0.25
RHO_CUTOFF = 8.0
# Largest relative change allowed when the quadrature resolution doubles
REFINEMENT_TOL = 1e-6


def _gauss_legendre(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _panels(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = _gauss_legendre(n, lo, hi)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _geometric_edges(first: float, stop: float) -> np.ndarray:
    edges = [0.0, first]
    while edges[-1] < stop:
        edges.append(min(2.0 * edges[-1], stop))
    return np.asarray(edges)


def mode_correlation(a: np.ndarray, b: np.ndarray, z: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """C(u) = ∫a(z+u)b(z)dz, exact at grid shifts and interpolated between them."""
    dz = z[1] - z[0]
    values = np.correlate(a, b, mode="full") * dz
    shifts = dz * (np.arange(len(values)) - (len(z) - 1))
    return mode_interpolator(values, shifts)


def _a_rho_ratio(trap: TrapConfig | float) -> float:
    if isinstance(trap, TrapConfig):
        derived = derive_trap(trap)
        return derived.a_rho / derived.a_z
    value = float(trap)
    if not value > 0:
        raise DomainError(f"a_rho must be positive, got {value}", field="a_rho")
    return value


def _near_region(potential, corr, a_rho: float, R: float, resolution: int) -> float:
    """(1/a²)∫_0^R dr r²V(r)∫_0^π dθ sinθ e^{-r²sin²θ/2a²} C(r cosθ)."""
    first = min(length_scale(potential) / 4.0, R)
    r, w_r = _panels(_geometric_edges(first, R), RADIAL_NODES * resolution)
    theta, w_theta = _gauss_legendre(THETA_NODES * resolution, 0.0, math.pi)

    rr = r[:, None]
    sin_t = np.sin(theta)[None, :]
    angular = sin_t * np.exp(-(rr * sin_t) ** 2 / (2.0 * a_rho**2)) * corr(rr * np.cos(theta)[None, :])
    G = angular @ w_theta
    return float(np.sum(w_r * r**2 * potential.evaluate(r) * G) / a_rho**2)


def _far_region(potential, corr, a_rho: float, R: float, u_max: float, resolution: int) -> float:
    """Same integral over r > R in (ρ, u), folding u onto u ≥ 0."""
    rho, w_rho = _gauss_legendre(RHO_NODES * resolution, 0.0, RHO_CUTOFF * a_rho)
    total = 0.0
    for p, wp in zip(rho, w_rho):
        u_lo = math.sqrt(max(R**2 - p**2, 0.0))
        if u_lo >= u_max:
            continue
        n_panels = max(1, math.ceil((u_max - u_lo) / U_PANEL))
        u, w_u = _panels(np.linspace(u_lo, u_max, n_panels + 1), U_NODES * resolution)
        v = potential.evaluate(np.sqrt(p**2 + u**2))
        inner = np.sum(w_u * v * (corr(u) + corr(-u)))
        total += wp * p * math.exp(-(p**2) / (2.0 * a_rho**2)) * inner
    return total / a_rho**2


def interaction_element(
    f1: np.ndarray,
    f2: np.ndarray,
    f3: np.ndarray,
    f4: np.ndarray,
    potential: InteractionPotential,
    a_rho: float,
    z: np.ndarray,
    resolution: int = 1,
) -> float:
    """(f1 f2|V|f3 f4): particle one carries f1·f3, particle two f2·f4.

    Lengths in a_z, energies in ħω_z; ``a_rho`` is the radial oscillator length.
    """
    if not a_rho > 0:
        raise DomainError(f"a_rho must be positive, got {a_rho}", field="a_rho")
    a = np.asarray(f1) * np.asarray(f3)
    b = np.asarray(f2) * np.asarray(f4)
    dz = z[1] - z[0]

    if isinstance(potential, NoInteraction):
        return 0.0
    if isinstance(potential, ContactInteraction):
        return potential.coupling / (2.0 * math.pi * a_rho**2) * float(np.sum(a * b) * dz)
    if not isinstance(potential, (JostKohnNegative, JostKohnPositive)):
        raise DomainError(f"Unsupported potential kind: {potential.kind}", field="kind")

    corr = mode_correlation(a, b, z)
    reach = interaction_range(potential)
    R = min(16.0 * a_rho, 2.0, reach)
    value = _near_region(potential, corr, a_rho, R, resolution)
    u_max = min(reach, z[-1] - z[0])
    if reach > R and u_max > R:
        value += _far_region(potential, corr, a_rho, R, u_max, resolution)

    if not math.isfinite(value):
        raise NumericError(
            "Interaction quadrature produced a non-finite value",
            report={"R": R, "range": reach, "resolution": resolution},
        )
    return value


def refined_element(
    f1: np.ndarray,
    f2: np.ndarray,
    f3: np.ndarray,
    f4: np.ndarray,
    potential: InteractionPotential,
    a_rho: float,
    z: np.ndarray,
    resolution: int = 1,
    scale: float = 0.0,
) -> float:
    """:func:`interaction_element` at ``resolution`` and twice that, returning the finer value.

    Raises NumericError when the two differ by more than REFINEMENT_TOL relative
    to the larger of |fine| and ``scale``.
    """
    coarse = interaction_element(f1, f2, f3, f4, potential, a_rho, z, resolution)
    if isinstance(potential, (NoInteraction, ContactInteraction)):
        return coarse
    fine = interaction_element(f1, f2, f3, f4, potential, a_rho, z, 2 * resolution)
    reference = max(abs(fine), scale)
    change = abs(fine - coarse)
    if change > REFINEMENT_TOL * reference:
        raise NumericError(
            "Interaction quadrature did not converge under refinement",
            report={
                "resolution": resolution,
                "coarse": coarse,
                "fine": fine,
                "relative_change": change / reference if reference > 0 else math.inf,
            },
        )
    return fine


def hubbard_parameters(
    sol: SingleParticleSolution,
    potential: InteractionPotential,
    trap: TrapConfig | float,
    resolution: int = 1,
) -> HubbardParameters:
    """J, U, U_i, I, K in ħω_z; ``trap`` may be given directly as a_ρ/a_z."""
    if not sol.tight_binding:
        logger.warning("Hubbard coefficients requested outside the tight-binding regime")
    a_rho = _a_rho_ratio(trap)
    l, r, z = sol.psi_l, sol.psi_r, sol.z

    U = refined_element(l, l, l, l, potential, a_rho, z, resolution)

    # Off-site terms are judged against the on-site scale
    def element(f1, f2, f3, f4):
        return refined_element(f1, f2, f3, f4, potential, a_rho, z, resolution, scale=abs(U))

    U_rr = element(r, r, r, r)
    params = HubbardParameters(
        J=sol.J,
        U=U,
        U_i=element(l, r, l, r),
        I=element(l, l, l, r),
        K=element(l, r, r, l),
        U_rr=U_rr,
        provenance={
            "eta_tilde": sol.eta_tilde,
            "n_points": len(z),
            "a_rho_over_a_z": a_rho,
            "quadrature_resolution": 2 * resolution,
            "potential": potential.model_dump(),
        },
    )
    if U != 0.0 and abs(U - U_rr) > 1e-8 * abs(U):
        logger.warning("Left and right on-site values differ: %.12g vs %.12g", U, U_rr)
    logger.debug("Hubbard parameters: %s", params.model_dump(exclude={"provenance"}))
    return params


def contact_onsite_U(sol: SingleParticleSolution, a_s: float, trap: TrapConfig | float) -> float:
    """g/(2πa_ρ²)·∫ψ_l⁴dz for a pseudo-potential of scattering length ``a_s`` (in a_z)."""
    a_rho = _a_rho_ratio(trap)
    return interaction_element(
        sol.psi_l, sol.psi_l, sol.psi_l, sol.psi_l,
        ContactInteraction(a_s=a_s), a_rho, sol.z,
    )


def hubbard_sweep(
    sol: SingleParticleSolution,
    trap: TrapConfig | float,
    potentials: list[InteractionPotential],
) -> list[HubbardParameters]:
    return [hubbard_parameters(sol, potential, trap) for potential in potentials]


def monte_carlo_onsite_U(
    sol: SingleParticleSolution,
    potential: JostKohnNegative | JostKohnPositive,
    a_rho: float,
    n_samples: int = 10_000_000,
    seed: int = 0,
    chunk: int = 1_000_000,
) -> tuple[float, float]:
    """6D estimate of (ll|V|ll) with its standard error.

    Particle one is drawn from |Φ_l|²; the separation vector from an isotropic
    density ∝ e^{-|s|/ℓ} whose tail outlasts the potential.
    """
    rng = np.random.default_rng(seed)
    psi = mode_interpolator(sol.psi_l, sol.z)
    fine_z = np.linspace(sol.z[0], sol.z[-1], 16 * len(sol.z))
    cdf = cumulative_trapezoid(psi(fine_z) ** 2, fine_z, initial=0.0)
    cdf /= cdf[-1]
    # Piecewise-linear inverse CDF samples a piecewise-constant density
    cell_density = np.diff(cdf) / np.diff(fine_z)
    sigma_perp = a_rho / math.sqrt(2.0)
    ell = 2.0 * length_scale(potential)

    total, total_sq, count = 0.0, 0.0, 0
    while count < n_samples:
        m = min(chunk, n_samples - count)
        uniform = rng.random(m)
        z1 = np.interp(uniform, cdf, fine_z)
        cell = np.clip(np.searchsorted(cdf, uniform, side="right") - 1, 0, len(cell_density) - 1)
        q1 = cell_density[cell]
        first = np.divide(psi(z1) ** 2, q1, out=np.zeros(m), where=q1 > 0)
        x1 = rng.normal(0.0, sigma_perp, size=(m, 2))
        radius = rng.gamma(3.0, ell, size=m)
        direction = rng.normal(size=(m, 3))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        s = radius[:, None] * direction

        x2 = x1 + s[:, :2]
        z2 = z1 + s[:, 2]
        transverse = np.exp(-np.sum(x2**2, axis=1) / a_rho**2) / (math.pi * a_rho**2)
        target = transverse * psi(z2) ** 2
        proposal = np.exp(-radius / ell) / (8.0 * math.pi * ell**3)
        weights = potential.evaluate(radius) * first * target / proposal

        total += weights.sum()
        total_sq += np.sum(weights**2)
        count += m

    mean = total / count
    variance = total_sq / count - mean**2
    return mean, math.sqrt(max(variance, 0.0) / count)
