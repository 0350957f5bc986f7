"""Entanglement entropies, Q parameters and ground-state number/phase fluctuations."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from dwhubbard.core import DomainError
from dwhubbard.hubbard import TwoSiteState, analytic_spectrum
from dwhubbard.models import DerivedCouplings, FluctuationReport, HubbardParameters

logger = logging.getLogger(__name__)

Site = Literal["left", "right"]

FERMION_MODE_BASIS = ("empty", "↑", "↓", "↑↓")
BOSON_MODE_BASIS = ("0", "1", "2")
FERMION_ORBITALS = ("L↑", "R↑", "L↓", "R↓")
BOSON_ORBITALS = ("L", "R")

# Number operators on the two-particle basis, per model and site
_NUMBER = {
    "fermion": {
        "left": (np.diag([1.0, 1.0, 0.0, 0.0]), np.diag([1.0, 0.0, 1.0, 0.0])),
        "right": (np.diag([0.0, 0.0, 1.0, 1.0]), np.diag([0.0, 1.0, 0.0, 1.0])),
    },
    "boson": {
        "left": np.diag([2.0, 1.0, 0.0]),
        "right": np.diag([0.0, 1.0, 2.0]),
    },
}
_DIFFERENCE = {"fermion": np.array([2.0, 0.0, 0.0, -2.0]), "boson": np.array([2.0, 0.0, -2.0])}


@dataclass
class ReducedDensityMatrix:
    basis: tuple[str, ...]
    matrix: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def entropy(self) -> float:
        """von Neumann entropy in bits."""
        return _entropy_bits(self.eigenvalues)


def _entropy_bits(weights: np.ndarray) -> float:
    weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    return float(stats.entropy(weights, base=2))


def _check_site(site: str) -> None:
    if site not in ("left", "right"):
        raise DomainError(f"Unknown site: {site}", field="site")


def spatial_density_matrix(state: TwoSiteState, site: Site = "left") -> ReducedDensityMatrix:
    """ρ of one well's occupation after tracing out the other well."""
    _check_site(site)
    p = state.probabilities
    if state.model == "fermion":
        # (empty, ↑, ↓, ↑↓) on the chosen well
        diag = [p[3], p[1], p[2], p[0]] if site == "left" else [p[0], p[2], p[1], p[3]]
        return ReducedDensityMatrix(FERMION_MODE_BASIS, np.diag(diag))
    diag = [p[2], p[1], p[0]] if site == "left" else [p[0], p[1], p[2]]
    return ReducedDensityMatrix(BOSON_MODE_BASIS, np.diag(diag))


def spatial_entropy(state: TwoSiteState) -> float:
    return spatial_density_matrix(state, "left").entropy()


def single_particle_density_matrix(state: TwoSiteState) -> ReducedDensityMatrix:
    """One-body density matrix normalised to unit trace."""
    c = state.amplitudes
    if state.model == "fermion":
        # ψ = Σ F_ij a†_{i↑} a†_{j↓}|vac⟩ with i, j over (L, R)
        F = np.array([[c[0], c[1]], [c[2], c[3]]])
        up = F @ F.conj().T
        down = F.T @ F.conj()
        matrix = np.zeros((4, 4), dtype=complex)
        matrix[:2, :2] = up
        matrix[2:, 2:] = down
        return ReducedDensityMatrix(FERMION_ORBITALS, 0.5 * matrix)

    coherence = math.sqrt(2.0) * (np.conj(c[0]) * c[1] + np.conj(c[1]) * c[2])
    gamma = np.array([
        [2.0 * abs(c[0]) ** 2 + abs(c[1]) ** 2, coherence],
        [np.conj(coherence), 2.0 * abs(c[2]) ** 2 + abs(c[1]) ** 2],
    ])
    return ReducedDensityMatrix(BOSON_ORBITALS, 0.5 * gamma)


def single_particle_entropy(state: TwoSiteState) -> float:
    return single_particle_density_matrix(state).entropy()


def entanglement_measure(state: TwoSiteState) -> float:
    """Single-particle entropy less the log₂N exchange offset (fermions only)."""
    entropy = single_particle_entropy(state)
    return entropy - 1.0 if state.model == "fermion" else entropy


def _q_from_probabilities(model: str, p: np.ndarray, site: Site) -> np.ndarray:
    """Closed-form Q; ``p`` has the basis along its last axis."""
    p0, p1 = p[..., 0], p[..., 1]
    if model == "fermion":
        return p0 * p[..., 3] - p1 * p[..., 2]
    double = p0 if site == "left" else p[..., 2]
    return 2.0 * double - 4.0 * double**2 - p1**2 - 4.0 * double * p1


def q_parameter(state: TwoSiteState, site: Site = "left") -> float:
    _check_site(site)
    return float(_q_from_probabilities(state.model, state.probabilities, site))


def q_parameter_operator(state: TwoSiteState, site: Site = "left") -> float:
    """Q from number-operator expectation values.

    Bosons: ⟨N²⟩ − ⟨N⟩² − ⟨N⟩. Fermions: the spin covariance ⟨N↑N↓⟩ − ⟨N↑⟩⟨N↓⟩.
    """
    _check_site(site)
    psi = state.amplitudes

    def expect(op: np.ndarray) -> float:
        return float(np.vdot(psi, op @ psi).real)

    if state.model == "fermion":
        n_up, n_down = _NUMBER["fermion"][site]
        return expect(n_up @ n_down) - expect(n_up) * expect(n_down)
    n = _NUMBER["boson"][site]
    mean = expect(n)
    return expect(n @ n) - mean**2 - mean


def _single_particle_batch(model: str, c: np.ndarray) -> np.ndarray:
    """ρ₁ for every row of ``c`` (n × basis), shape (n, d, d)."""
    n = len(c)
    if model == "fermion":
        F = c.reshape(n, 2, 2)
        matrix = np.zeros((n, 4, 4), dtype=complex)
        matrix[:, :2, :2] = F @ np.conj(np.swapaxes(F, 1, 2))
        matrix[:, 2:, 2:] = np.swapaxes(F, 1, 2) @ np.conj(F)
        return 0.5 * matrix
    coherence = math.sqrt(2.0) * (np.conj(c[:, 0]) * c[:, 1] + np.conj(c[:, 1]) * c[:, 2])
    gamma = np.empty((n, 2, 2), dtype=complex)
    gamma[:, 0, 0] = 2.0 * np.abs(c[:, 0]) ** 2 + np.abs(c[:, 1]) ** 2
    gamma[:, 1, 1] = 2.0 * np.abs(c[:, 2]) ** 2 + np.abs(c[:, 1]) ** 2
    gamma[:, 0, 1] = coherence
    gamma[:, 1, 0] = np.conj(coherence)
    return 0.5 * gamma


def series_columns(model: str, amplitudes: np.ndarray) -> dict[str, np.ndarray]:
    """S_spatial, S1, E_rho1, Q_left, Q_right along a trajectory (rows are times)."""
    c = np.asarray(amplitudes, dtype=complex)
    p = np.abs(c) ** 2
    spatial = stats.entropy(p, base=2, axis=1)
    weights = np.clip(np.linalg.eigvalsh(_single_particle_batch(model, c)), 0.0, None)
    single = stats.entropy(weights, base=2, axis=1)
    return {
        "S_spatial": spatial,
        "S1": single,
        "E_rho1": single - 1.0 if model == "fermion" else single,
        "Q_left": _q_from_probabilities(model, p, "left"),
        "Q_right": _q_from_probabilities(model, p, "right"),
    }


def number_difference_moments(state: TwoSiteState) -> tuple[float, float]:
    """⟨W⟩ and ΔW for W = N_L − N_R."""
    w = _DIFFERENCE[state.model]
    p = state.probabilities
    mean = float(p @ w)
    return mean, math.sqrt(max(float(p @ w**2) - mean**2, 0.0))


def _ground_mixing(c: DerivedCouplings) -> float:
    """U_− + Ω without cancellation for U_− < 0."""
    if c.U_minus >= 0:
        return c.U_minus + c.Omega
    return 16.0 * c.J_minus**2 / (c.Omega - c.U_minus)


def ground_state_fluctuations(couplings: DerivedCouplings, J: float | None = None) -> FluctuationReport:
    """Number-difference and phase fluctuations of the ground state |a⟩."""
    J = couplings.J_minus if J is None else J
    Jm = couplings.J_minus
    X = _ground_mixing(couplings)
    denom = 16.0 * J**2 + X**2
    if denom == 0:
        raise DomainError("Fluctuations are undefined for J = 0 and U_- <= 0", field="J")

    dW = 8.0 * J / math.sqrt(denom)
    phase_b = 1.0 - 32.0 * J**2 * (X + math.sqrt(2.0) * J) ** 2 / denom**2
    sql_denom = 16.0 * Jm**2 + X**2
    return FluctuationReport(
        dE_phi_F=2.0 * math.sqrt(2.0) * J * math.sqrt(8.0 * J**2 + X**2) / denom,
        dE_phi_B=math.sqrt(max(phase_b, 0.0)),
        dN=dW / 4.0,
        dW=dW,
        d_SQL_F=abs(16.0 * Jm**2 / sql_denom),
        d_SQL_B=abs(4.0 * math.sqrt(2.0) * Jm * (X - 2.0 * math.sqrt(2.0) * Jm) / sql_denom),
        mean_W=0.0,
    )


def eigenstate_entropies(p: HubbardParameters) -> dict[str, float]:
    """Spatial entropies of the two mixed eigenstates |a⟩, |c⟩ for both statistics."""
    out = {}
    for model, suffix in (("fermion", "F"), ("boson", "B")):
        spectrum = analytic_spectrum(p, model)
        for label in ("a", "c"):
            out[f"S_{label}_{suffix}"] = spatial_entropy(TwoSiteState(model, spectrum.vector(label)))
    return out


def eigenstate_entropy_table(parameters: list[HubbardParameters]) -> dict[str, np.ndarray]:
    table = {"U_over_J": np.array([p.U / p.J for p in parameters])}
    rows = [eigenstate_entropies(p) for p in parameters]
    for key in ("S_a_F", "S_c_F", "S_a_B", "S_c_B"):
        table[key] = np.array([row[key] for row in rows])
    return table


def fluctuation_table(parameters: list[HubbardParameters]) -> dict[str, np.ndarray]:
    """Ground-state fluctuations in units of J, one row per parameter set."""
    table = {"U_over_J": np.array([p.U / p.J for p in parameters])}
    reports = []
    for p in parameters:
        p = p.in_units_of_J()
        reports.append(ground_state_fluctuations(DerivedCouplings.from_parameters(p), p.J))
    for key in ("dE_phi_F", "dE_phi_B", "dN", "dW", "d_SQL_F", "d_SQL_B"):
        table[key] = np.array([getattr(r, key) for r in reports])
    return table
