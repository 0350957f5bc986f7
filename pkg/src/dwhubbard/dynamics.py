"""Time evolution of two particles in the double well from a same-site or split start."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate, signal
from scipy.fft import rfft, rfftfreq

from dwhubbard import qinfo
from dwhubbard.core import NORM_TOL, DomainError, NumericError
from dwhubbard.hubbard import FERMION_NAMED, Model, TwoSiteState
from dwhubbard.models import DerivedCouplings, HubbardParameters

logger = logging.getLogger(__name__)

Init = Literal["same-site", "split", "split-antisymmetric"]

DEFAULT_T_MAX = 100.0
DEFAULT_STEP = 0.002
# Largest step allowed for averaging, as a fraction of the fastest period scale 1/max(Ω, J_−)
AVERAGE_STEP = 0.05
PEAK_BINS = 2

SERIES_COLUMNS = (
    "rho_s", "rho_d", "P_pair", "P_single", "P_none",
    "S_spatial", "S1", "E_rho1", "Q_left", "Q_right",
)

# Benchmark tunneling cases: (U_i, I, K) as multiples of U, and U/J
TUNNELING_CASES = {
    "u01": ((1 / 600, -1 / 50, 1 / 600), 0.1),
    "u1": ((1 / 600, -1 / 50, 1 / 600), 1.0),
    "u10": ((1 / 600, -1 / 50, 1 / 600), 10.0),
    "u01_offsite": ((1 / 10, -1 / 2, 1 / 10), 0.1),
    "u1_offsite": ((1 / 10, -1 / 2, 1 / 10), 1.0),
    "u10_offsite": ((1 / 10, -1 / 2, 1 / 10), 10.0),
}


@dataclass
class Trajectory:
    model: Model
    times: np.ndarray
    amplitudes: np.ndarray  # (n_times, basis size)
    init: str = "same-site"

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> TwoSiteState:
        return TwoSiteState(self.model, self.amplitudes[i], float(self.times[i]))

    def norm_drift(self) -> float:
        return float(np.abs(np.sum(np.abs(self.amplitudes) ** 2, axis=1) - 1.0).max())


@dataclass
class ObservableSeries:
    times: np.ndarray
    columns: dict[str, np.ndarray]
    couplings: DerivedCouplings | None = None
    model: Model = "fermion"
    warnings: list[str] = field(default_factory=list)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def tunneling_case(name: str, J: float = 1.0) -> HubbardParameters:
    try:
        (ui, i, k), u_over_j = TUNNELING_CASES[name]
    except KeyError:
        raise DomainError(f"Unknown tunneling case: {name}", field="name") from None
    U = u_over_j * J
    return HubbardParameters(J=J, U=U, U_i=ui * U, I=i * U, K=k * U)


def _sin_over_omega(omega: float, t: np.ndarray) -> np.ndarray:
    """sin(Ωt/2)/Ω, finite as Ω → 0."""
    return 0.5 * t * np.sinc(omega * t / (2.0 * math.pi))


def _analytic_amplitudes(model: Model, init: Init, c: DerivedCouplings, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("times must be non-negative", field="t")
    if model not in ("fermion", "boson"):
        raise DomainError(f"Unknown model: {model}", field="model")

    slow = np.exp(-0.5j * c.U_bar * t)
    s = _sin_over_omega(c.Omega, t)
    co = np.cos(0.5 * c.Omega * t)
    hop = 2j * c.J_minus * s * slow

    if init == "same-site":
        fast = np.exp(-1j * c.W * t)
        bracket = 0.5 * slow * (co - 1j * c.U_minus * s)
        c0 = 0.5 * fast + bracket
        c3 = -0.5 * fast + bracket
        if model == "fermion":
            return np.stack([c0, hop, hop, c3], axis=-1)
        return np.stack([c0, math.sqrt(2.0) * hop, c3], axis=-1)

    if init == "split":
        single = slow * (co + 1j * c.U_minus * s)
        double = math.sqrt(2.0) * hop
        if model == "fermion":
            return np.stack([double, single / math.sqrt(2.0), single / math.sqrt(2.0), double], axis=-1)
        return np.stack([double, single, double], axis=-1)

    if init == "split-antisymmetric":
        if model != "fermion":
            raise DomainError("The antisymmetric split start exists only for fermions", field="init")
        # |0⟩ is stationary at U_i − K
        energy = 2.0 * c.U_plus - c.W - c.U_bar
        phase = np.exp(-1j * energy * t)
        return phase[..., None] * FERMION_NAMED["0"].astype(complex)

    raise DomainError(f"Unknown initial condition: {init}", field="init")


def analytic_evolve(model: Model, init: Init, couplings: DerivedCouplings, t: float) -> TwoSiteState:
    amplitudes = _analytic_amplitudes(model, init, couplings, np.array([t]))[0]
    return TwoSiteState(model, amplitudes, float(t))


def analytic_trajectory(model: Model, init: Init, couplings: DerivedCouplings, times: np.ndarray) -> Trajectory:
    times = np.asarray(times, dtype=float)
    return Trajectory(model, times, _analytic_amplitudes(model, init, couplings, times), init)


def initial_state(model: Model, init: Init) -> np.ndarray:
    """ψ(0) for the named start, in the model's basis order."""
    free = DerivedCouplings.from_parameters(HubbardParameters())
    return analytic_evolve(model, init, free, 0.0).amplitudes


def numeric_evolve(
    H: np.ndarray,
    psi0: np.ndarray,
    times: np.ndarray,
    method: Literal["eigh", "DOP853"] = "eigh",
    model: Model | None = None,
    init: str = "same-site",
) -> Trajectory:
    """Propagate ψ(t) = e^{−iHt}ψ(0) at ``times`` (ħ = 1)."""
    H = np.asarray(H)
    psi0 = np.asarray(psi0, dtype=complex)
    times = np.asarray(times, dtype=float)
    if H.shape != (len(psi0), len(psi0)) or not np.allclose(H, H.conj().T, atol=1e-12):
        raise DomainError("H must be a Hermitian matrix matching psi0", field="H")
    if abs(np.vdot(psi0, psi0).real - 1.0) > NORM_TOL:
        raise DomainError("psi0 must be normalized", field="psi0")
    if model is None:
        model = "fermion" if len(psi0) == 4 else "boson"

    if method == "eigh":
        energies, vectors = np.linalg.eigh(H)
        weights = vectors.conj().T @ psi0
        amplitudes = (np.exp(-1j * np.outer(times, energies)) * weights) @ vectors.T
    elif method == "DOP853":
        sol = integrate.solve_ivp(
            lambda _t, y: -1j * (H @ y),
            (float(times[0]), float(times[-1])),
            psi0,
            method="DOP853",
            t_eval=times,
            rtol=1e-13,
            atol=1e-13,
        )
        if sol.status != 0:
            raise NumericError(
                f"Adaptive propagation failed: {sol.message}",
                report={"t_last": float(sol.t[-1]) if len(sol.t) else None, "nfev": sol.nfev},
            )
        amplitudes = sol.y.T
    else:
        raise DomainError(f"Unknown propagation method: {method}", field="method")

    trajectory = Trajectory(model, times, amplitudes, init)
    logger.debug("Numeric propagation (%s): %d steps, norm drift %.3g", method, len(times), trajectory.norm_drift())
    return trajectory


def occupancy(state: TwoSiteState) -> dict[str, float]:
    p = state.probabilities
    if state.model == "fermion":
        rho_s = p[1] + p[2]
    else:
        rho_s = p[1]
    return {"rho_s": float(rho_s), "rho_d": float(1.0 - rho_s)}


def rho_d_same_site(couplings: DerivedCouplings, t: np.ndarray) -> np.ndarray:
    return 1.0 - 8.0 * couplings.J_minus**2 * _sin_over_omega(couplings.Omega, np.asarray(t, dtype=float)) ** 2


def rho_d_split(couplings: DerivedCouplings, t: np.ndarray) -> np.ndarray:
    return 16.0 * couplings.J_minus**2 * _sin_over_omega(couplings.Omega, np.asarray(t, dtype=float)) ** 2


def tunneling_probabilities(couplings: DerivedCouplings, t: np.ndarray | float) -> dict[str, np.ndarray]:
    """P_pair, P_single, P_none for the same-site start (closed form)."""
    t = np.asarray(t, dtype=float)
    c = couplings
    a = c.U_minus / c.Omega if c.Omega > 0 else 0.0
    nu = c.nu
    p_pair = 0.25 * (
        1.5 + 0.5 * a**2
        - (1.0 + a) * np.cos(0.5 * (c.Omega - nu) * t)
        - (1.0 - a) * np.cos(0.5 * (c.Omega + nu) * t)
        + 0.5 * (1.0 - a**2) * np.cos(c.Omega * t)
    )
    p_single = 8.0 * c.J_minus**2 * _sin_over_omega(c.Omega, t) ** 2
    return {"P_pair": p_pair, "P_single": p_single, "P_none": 1.0 - p_pair - p_single}


def observable_series(trajectory: Trajectory, couplings: DerivedCouplings | None = None) -> ObservableSeries:
    """Per-time occupancies, tunneling probabilities and entanglement columns."""
    p = np.abs(trajectory.amplitudes) ** 2
    n = len(trajectory)
    if trajectory.model == "fermion":
        rho_s = p[:, 1] + p[:, 2]
        pair, single = p[:, 3], p[:, 1] + p[:, 2]
    else:
        rho_s = p[:, 1]
        pair, single = p[:, 2], p[:, 1]

    columns = {"rho_s": rho_s, "rho_d": 1.0 - rho_s}
    if trajectory.init == "same-site":
        columns.update({"P_pair": pair, "P_single": single, "P_none": p[:, 0]})
    else:
        # Tunneling probabilities are defined for the same-site start only
        columns.update({name: np.full(n, np.nan) for name in ("P_pair", "P_single", "P_none")})

    columns.update(qinfo.series_columns(trajectory.model, trajectory.amplitudes))
    return ObservableSeries(trajectory.times, columns, couplings, trajectory.model)


def time_average(series: ObservableSeries, T_max: float) -> dict[str, float]:
    times = series.times
    if not T_max > 0:
        raise DomainError(f"T_max must be positive, got {T_max}", field="T_max")
    if times[0] > 0 or times[-1] < T_max * (1.0 - 1e-12):
        raise NumericError("Series does not cover the averaging window",
                           report={"t_first": float(times[0]), "t_last": float(times[-1]), "T_max": T_max})

    mask = times <= T_max * (1.0 + 1e-12)
    window = times[mask]
    if series.couplings is not None and len(window) > 1:
        fastest = max(abs(series.couplings.Omega), abs(series.couplings.J_minus))
        step = float(np.diff(window).max())
        if fastest > 0 and step > AVERAGE_STEP / fastest:
            raise NumericError("Series is under-resolved for averaging",
                               report={"step": step, "limit": AVERAGE_STEP / fastest})

    return {
        name: float(integrate.trapezoid(values[mask], window) / T_max)
        for name, values in series.columns.items()
    }


def spectral_peaks(times: np.ndarray, values: np.ndarray, n_peaks: int = 5) -> list[tuple[float, float]]:
    """Strongest spectral lines as (frequency, share of AC power within ±PEAK_BINS bins).

    Frequencies are in cycles per time unit of ``times``.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=1e-12):
        raise DomainError("spectral analysis needs uniformly spaced times", field="times")

    windowed = (values - values.mean()) * signal.windows.hann(len(values))
    power = np.abs(rfft(windowed)) ** 2
    freqs = rfftfreq(len(values), dt)
    total = power[1:].sum()
    if total == 0:
        return []

    peaks, _ = signal.find_peaks(power)
    peaks = sorted(peaks, key=lambda i: power[i], reverse=True)[:n_peaks]
    lines = []
    for i in peaks:
        lo, hi = max(i - PEAK_BINS, 1), i + PEAK_BINS + 1
        lines.append((float(freqs[i]), float(power[lo:hi].sum() / total)))
    return lines
