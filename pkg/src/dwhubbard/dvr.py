"""Sinc-DVR solver for the axial double well: doublet, localized modes, tunneling."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg, optimize, signal
from scipy.interpolate import CubicSpline

from dwhubbard.core import DomainError, NumericError, TrapConfig, double_well, eta_tilde

logger = logging.getLogger(__name__)

MIN_POINTS = 64
# Largest grid spacing (in a_z) that still resolves the well ground state
MAX_SPACING = 0.25
# Potential height the default grid edge must reach, in ħω_z
EDGE_HEIGHT = 20.0


@dataclass(frozen=True)
class Grid1D:
    z_min: float
    z_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < MIN_POINTS:
            raise DomainError(f"n_points must be >= {MIN_POINTS}, got {self.n_points}", field="n_points")
        if not self.z_max > 0 or not math.isclose(self.z_max, -self.z_min, rel_tol=1e-14):
            raise DomainError(f"grid must be symmetric, got [{self.z_min}, {self.z_max}]", field="z_min")

    @property
    def spacing(self) -> float:
        return (self.z_max - self.z_min) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        # Built about the centre so z[i] == -z[n-1-i] exactly
        return self.spacing * (np.arange(self.n_points) - 0.5 * (self.n_points - 1))


@dataclass
class DvrHamiltonian:
    matrix: np.ndarray
    z: np.ndarray
    potential: np.ndarray
    warnings: list[str] = field(default_factory=list)


@dataclass
class SingleParticleSolution:
    z: np.ndarray
    energies: np.ndarray
    psi_s: np.ndarray
    psi_a: np.ndarray
    psi_l: np.ndarray
    psi_r: np.ndarray
    J: float
    doublet_gap: float
    eta_tilde: float
    tight_binding: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def spacing(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def V0(self) -> float:
        return self.eta_tilde**2 / 8.0


def _as_eta_tilde(trap: TrapConfig | float) -> float:
    if isinstance(trap, TrapConfig):
        return eta_tilde(trap)
    value = float(trap)
    if not value > 0:
        raise DomainError(f"eta_tilde must be positive, got {value}", field="eta")
    return value


def default_grid(eta_t: float, n_points: int = 513) -> Grid1D:
    """[-6η, 6η], widened until the edge sits EDGE_HEIGHT above the minima."""
    half_width = max(6.0 * eta_t, math.sqrt(eta_t**2 + math.sqrt(8.0 * EDGE_HEIGHT) * eta_t))
    return Grid1D(-half_width, half_width, n_points)


def kinetic_matrix(z: np.ndarray) -> np.ndarray:
    """Colbert-Miller kinetic operator on a uniform grid (ħ = m = 1)."""
    z = np.asarray(z, dtype=float)
    dz = z[1] - z[0]
    coeff = 1.0 / (2.0 * dz**2)
    k = np.arange(1, len(z))
    column = np.empty(len(z))
    column[0] = coeff * math.pi**2 / 3.0
    column[1:] = coeff * 2.0 * (-1.0) ** k / k**2
    return linalg.toeplitz(column)


def build_hamiltonian_1d(grid: Grid1D, trap: TrapConfig | float) -> DvrHamiltonian:
    eta_t = _as_eta_tilde(trap)
    z = grid.points()
    potential = double_well(z, eta_t)
    H = kinetic_matrix(z)
    H[np.diag_indices_from(H)] += potential

    warnings = []
    if grid.spacing > MAX_SPACING:
        msg = f"grid spacing {grid.spacing:.3g} a_z exceeds {MAX_SPACING} a_z"
        logger.warning(msg)
        warnings.append(msg)
    return DvrHamiltonian(matrix=H, z=z, potential=potential, warnings=warnings)


def _parity_bases(n: int) -> tuple[np.ndarray, np.ndarray]:
    half = n // 2
    idx = np.arange(half)
    mirror = n - 1 - idx
    even = np.zeros((n, half + n % 2))
    odd = np.zeros((n, half))
    even[idx, idx] = even[mirror, idx] = 1.0 / math.sqrt(2.0)
    odd[idx, idx] = 1.0 / math.sqrt(2.0)
    odd[mirror, idx] = -1.0 / math.sqrt(2.0)
    if n % 2:
        even[half, half] = 1.0
    return even, odd


def _block_eigh(H: np.ndarray, basis: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    block = basis.T @ H @ basis
    k = min(k, block.shape[0])
    try:
        values, vectors = linalg.eigh(block, subset_by_index=[0, k - 1])
    except linalg.LinAlgError as e:
        raise NumericError(f"Eigensolver failed: {e}", report={"block_size": block.shape[0]}) from e
    return values, basis @ vectors


def solve_doublet(grid: Grid1D, trap: TrapConfig | float, k: int = 2) -> SingleParticleSolution:
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}", field="k")
    eta_t = _as_eta_tilde(trap)
    ham = build_hamiltonian_1d(grid, eta_t)
    H, z, dz = ham.matrix, ham.z, grid.spacing

    even_basis, odd_basis = _parity_bases(len(z))
    e_vals, e_vecs = _block_eigh(H, even_basis, k)
    o_vals, o_vecs = _block_eigh(H, odd_basis, k)

    residual = max(
        np.linalg.norm(H @ e_vecs - e_vecs * e_vals, axis=0).max(),
        np.linalg.norm(H @ o_vecs - o_vecs * o_vals, axis=0).max(),
    )
    if residual > 1e-8 * np.abs(H).max():
        raise NumericError("DVR eigenvectors failed the residual check", report={"residual_norm": residual})

    energies = np.sort(np.concatenate([e_vals, o_vals]))[:k]
    v_s = e_vecs[:, 0]
    v_a = o_vecs[:, 0]
    if v_s.sum() < 0:
        v_s = -v_s
    left = z < 0
    if np.dot(v_s[left], v_a[left]) < 0:
        v_a = -v_a

    v_l = (v_s + v_a) / math.sqrt(2.0)
    v_r = (v_s - v_a) / math.sqrt(2.0)
    J = float(-v_l @ H @ v_r)

    warnings = list(ham.warnings)
    tight = eta_t**2 / 8.0 > 1.0
    if not tight:
        msg = f"barrier V0 = {eta_t**2 / 8.0:.3g} hbar*omega_z is below the tight-binding regime"
        logger.warning(msg)
        warnings.append(msg)

    norm = 1.0 / math.sqrt(dz)
    sol = SingleParticleSolution(
        z=z,
        energies=energies,
        psi_s=v_s * norm,
        psi_a=v_a * norm,
        psi_l=v_l * norm,
        psi_r=v_r * norm,
        J=J,
        doublet_gap=float(o_vals[0] - e_vals[0]),
        eta_tilde=eta_t,
        tight_binding=tight,
        warnings=warnings,
    )
    logger.debug("DVR doublet: eta~=%.4g, J=%.6g, gap=%.6g", eta_t, J, sol.doublet_gap)
    return sol


def tunneling_matrix_element(sol: SingleParticleSolution, H: DvrHamiltonian | np.ndarray) -> float:
    """J = −∫ψ_l H ψ_r dz, in units of ω_z."""
    matrix = H.matrix if isinstance(H, DvrHamiltonian) else np.asarray(H)
    dz = sol.spacing
    return float(-dz * sol.psi_l @ matrix @ sol.psi_r)


def finite_difference_doublet(grid: Grid1D, trap: TrapConfig | float) -> tuple[float, float]:
    """Lowest two levels from the three-point second-difference Hamiltonian."""
    eta_t = _as_eta_tilde(trap)
    z = grid.points()
    dz = grid.spacing
    diagonal = 1.0 / dz**2 + double_well(z, eta_t)
    off = np.full(len(z) - 1, -0.5 / dz**2)
    values = linalg.eigh_tridiagonal(diagonal, off, select="i", select_range=(0, 1), eigvals_only=True)
    return float(values[0]), float(values[1])


def calibrate_barrier(
    target_J: float,
    n_points: int = 513,
    bracket: tuple[float, float] = (0.5, 5.0),
) -> float:
    """η/a_z whose doublet gives tunneling ``target_J`` (in ω_z)."""
    if not target_J > 0:
        raise DomainError(f"target_J must be positive, got {target_J}", field="target_J")

    def mismatch(eta_t: float) -> float:
        gap = solve_doublet(default_grid(eta_t, n_points), eta_t).doublet_gap
        return math.log(0.5 * gap) - math.log(target_J)

    lo, hi = bracket
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise NumericError(
            "Target tunneling is outside the calibration bracket",
            report={"bracket": bracket, "mismatch": (f_lo, f_hi)},
        )
    eta_t = optimize.brentq(mismatch, lo, hi, xtol=1e-12)
    logger.info("Calibrated barrier: eta~=%.6g (V0=%.6g) for J=%.6g", eta_t, eta_t**2 / 8.0, target_J)
    return eta_t


def mode_interpolator(values: np.ndarray, z: np.ndarray, factor: int = 16) -> Callable[[np.ndarray], np.ndarray]:
    """Off-grid evaluation of a band-limited grid function; zero outside the grid."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    fine = signal.resample(values, n * factor)
    fine_z = z[0] + (z[1] - z[0]) / factor * np.arange(n * factor)
    spline = CubicSpline(fine_z, fine)
    z_lo, z_hi = fine_z[0], fine_z[-1]

    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = spline(np.clip(x, z_lo, z_hi))
        return np.where((x < z_lo) | (x > z_hi), 0.0, out)

    return evaluate


def modes_table(sol: SingleParticleSolution) -> dict[str, np.ndarray]:
    return {
        "z": sol.z,
        "psi_s": sol.psi_s,
        "psi_a": sol.psi_a,
        "psi_l": sol.psi_l,
        "psi_r": sol.psi_r,
    }
