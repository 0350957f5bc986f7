"""Two-site Hamiltonians for two and three particles, with analytic spectra."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import linalg

from dwhubbard.core import DomainError
from dwhubbard.models import DerivedCouplings, HubbardParameters

logger = logging.getLogger(__name__)

Model = Literal["fermion", "boson"]

FERMION_BASIS = ("|↑↓,0⟩", "|↑,↓⟩", "|↓,↑⟩", "|0,↑↓⟩")
BOSON_BASIS = ("|2,0⟩", "|1,1⟩", "|0,2⟩")
# Hyperfine two-component bosons share the fermion labels (symmetrised); no Hamiltonian is built
TWO_COMPONENT_BOSON_BASIS = FERMION_BASIS
THREE_BOSON_BASIS = ("|3,0⟩", "|2,1⟩", "|1,2⟩", "|0,3⟩")
THREE_FERMION_BASIS = ("|↑↓,↑⟩", "|↑,↑↓⟩")

_S2 = 1.0 / math.sqrt(2.0)

FERMION_NAMED = {
    "+": np.array([_S2, 0.0, 0.0, _S2]),
    "-": np.array([_S2, 0.0, 0.0, -_S2]),
    "0": np.array([0.0, _S2, -_S2, 0.0]),
    "1": np.array([0.0, _S2, _S2, 0.0]),
}
BOSON_NAMED = {
    "+": np.array([_S2, 0.0, _S2]),
    "-": np.array([_S2, 0.0, -_S2]),
    "1": np.array([0.0, 1.0, 0.0]),
}


@dataclass
class TwoSiteState:
    """Amplitudes c₀…c₃ (fermion) or C₀…C₂ (boson) in the frozen basis order."""

    model: Model
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        size = {"fermion": 4, "boson": 3}.get(self.model)
        if size is None:
            raise DomainError(f"Unknown model: {self.model}", field="model")
        if self.amplitudes.shape != (size,):
            raise DomainError(f"{self.model} states need {size} amplitudes", field="amplitudes")

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass
class SpectrumResult:
    energies: np.ndarray
    vectors: np.ndarray  # columns, basis order
    labels: list[str] = field(default_factory=list)
    degenerate: bool = False

    def vector(self, label: str) -> np.ndarray:
        return self.vectors[:, self.labels.index(label)]

    def energy(self, label: str) -> float:
        return float(self.energies[self.labels.index(label)])


def h_two_fermion(p: HubbardParameters) -> np.ndarray:
    Jm = p.J - p.I
    return np.array([
        [p.U, -Jm, -Jm, p.K],
        [-Jm, p.U_i, p.K, -Jm],
        [-Jm, p.K, p.U_i, -Jm],
        [p.K, -Jm, -Jm, p.U],
    ])


def h_two_boson(p: HubbardParameters) -> np.ndarray:
    t = math.sqrt(2.0) * (p.J - p.I)
    return np.array([
        [p.U, -t, p.K],
        [-t, p.U_i + p.K, -t],
        [p.K, -t, p.U],
    ])


def h_three_boson(p: HubbardParameters) -> np.ndarray:
    t = p.J - 2.0 * p.I
    s3 = math.sqrt(3.0)
    mid = p.U + 2.0 * p.U_i + 2.0 * p.K
    return np.array([
        [3.0 * p.U, -s3 * t, s3 * p.K, 0.0],
        [-s3 * t, mid, -2.0 * t, s3 * p.K],
        [s3 * p.K, -2.0 * t, mid, -s3 * t],
        [0.0, s3 * p.K, -s3 * t, 3.0 * p.U],
    ])


def h_three_fermion(p: HubbardParameters) -> np.ndarray:
    off = -p.J + 2.0 * p.I
    return np.array([
        [p.U + p.U_i, off],
        [off, p.U + p.U_i],
    ])


def hamiltonian(model: Model, p: HubbardParameters) -> np.ndarray:
    if model == "fermion":
        return h_two_fermion(p)
    if model == "boson":
        return h_two_boson(p)
    raise DomainError(f"Unknown model: {model}", field="model")


def _fix_sign(vectors: np.ndarray) -> np.ndarray:
    vectors = np.array(vectors, dtype=float)
    for j in range(vectors.shape[1]):
        if vectors[np.argmax(np.abs(vectors[:, j])), j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def _mixing_ratios(c: DerivedCouplings) -> tuple[float, float]:
    """(U_− + Ω) and (U_− − Ω), each evaluated without cancellation."""
    U, Om = c.U_minus, c.Omega
    sixteen_j2 = 16.0 * c.J_minus**2
    plus = U + Om if U >= 0 else sixteen_j2 / (Om - U)
    minus = U - Om if U <= 0 else -sixteen_j2 / (Om + U)
    return plus, minus


def _doublet_vector(x: float, J_minus: float, plus: np.ndarray, one: np.ndarray) -> np.ndarray:
    """4J_−(|+⟩ + x/(4J_−)|1⟩)/√(16J_−² + x²)."""
    a = 4.0 * J_minus
    return (a * plus + x * one) / math.hypot(a, x)


def analytic_spectrum(p: HubbardParameters, model: Model = "fermion") -> SpectrumResult:
    if model not in ("fermion", "boson"):
        raise DomainError(f"Unknown model: {model}", field="model")
    c = DerivedCouplings.from_parameters(p)
    named = FERMION_NAMED if model == "fermion" else BOSON_NAMED
    plus_state, one_state = named["+"], named["1"]

    degenerate = c.J_minus == 0.0
    if degenerate:
        logger.debug("J_minus = 0: doublet vectors fall back to basis states")
        if c.U_minus > 0:
            vec_a, vec_c = one_state, plus_state
        elif c.U_minus < 0:
            vec_a, vec_c = plus_state, one_state
        else:
            vec_a = (plus_state + one_state) * _S2
            vec_c = (plus_state - one_state) * _S2
    else:
        x_plus, x_minus = _mixing_ratios(c)
        vec_a = _doublet_vector(x_plus, c.J_minus, plus_state, one_state)
        vec_c = _doublet_vector(x_minus, c.J_minus, plus_state, one_state)

    pairs = {
        "a": (0.5 * (c.U_bar - c.Omega), vec_a),
        "b": (p.U - p.K, named["-"]),
        "c": (0.5 * (c.U_bar + c.Omega), vec_c),
    }
    if model == "fermion":
        pairs["d"] = (p.U_i - p.K, named["0"])

    labels = sorted(pairs, key=lambda k: (pairs[k][0], k))
    energies = np.array([pairs[k][0] for k in labels])
    vectors = _fix_sign(np.column_stack([pairs[k][1] for k in labels]))
    return SpectrumResult(energies=energies, vectors=vectors, labels=labels, degenerate=degenerate)


def numeric_spectrum(H: np.ndarray) -> SpectrumResult:
    energies, vectors = linalg.eigh(H)
    return SpectrumResult(energies=energies, vectors=_fix_sign(vectors))


def spectrum_table(model: Model, parameters: list[HubbardParameters]) -> dict[str, np.ndarray]:
    """E/J of the analytic eigenstates, one row per parameter set."""
    labels = ["a", "b", "c", "d"] if model == "fermion" else ["a", "b", "c"]
    table = {"U_over_J": np.array([p.U / p.J for p in parameters])}
    rows = []
    for p in parameters:
        spec = analytic_spectrum(p.in_units_of_J(), model)
        rows.append([spec.energy(label) for label in labels])
    rows = np.asarray(rows)
    for i, label in enumerate(labels):
        table[f"E_{label}"] = rows[:, i]
    return table
