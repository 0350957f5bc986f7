"""Subcommand tasks: resolve a RunConfig into library calls and tables."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from joblib import Parallel, delayed, parallel_config

from dwhubbard import dynamics, hubbard, qinfo
from dwhubbard.config import defaults, settings
from dwhubbard.core import (
    HBAR,
    DomainError,
    TrapConfig,
    TrapDerived,
    calibrate_trap,
    derive_trap,
    eta_tilde,
    is_tight_binding,
    trap_from_barrier,
)
from dwhubbard.dvr import SingleParticleSolution, calibrate_barrier, default_grid, modes_table, solve_doublet
from dwhubbard.integrals import hubbard_parameters
from dwhubbard.models import DerivedCouplings, HubbardParameters
from dwhubbard.output import RunResult, write_result
from dwhubbard.pairsolver import onsite_U_from_pair, pair_sweep, problem_for_trap, solve_relative_ground
from dwhubbard.potentials import (
    ContactInteraction,
    InteractionPotential,
    JostKohnNegative,
    JostKohnPositive,
    NoInteraction,
    default_k_grid,
    phase_shifts,
    verify_scattering,
)
from dwhubbard.runconfig import (
    ConfigError,
    ModelSection,
    PotentialSection,
    Quantity,
    RunConfig,
    TrapSection,
    a_z_of,
)

logger = logging.getLogger(__name__)

COMMANDS = ("trap", "scatter", "params", "pair", "spectrum", "dynamics", "entropy", "fluct")


@dataclass
class TrapContext:
    trap: TrapConfig
    derived: TrapDerived
    solution: SingleParticleSolution

    @property
    def a_z(self) -> float:
        return self.derived.a_z

    @property
    def a_rho_ratio(self) -> float:
        return self.derived.a_rho / self.derived.a_z


def _map(fn: Callable, items: list[tuple], threads: int) -> list:
    """Apply ``fn`` to every argument tuple; results keep the input order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(*item) for item in items]
    with parallel_config(backend="loky", inner_max_num_threads=1):
        return Parallel(n_jobs=threads)(delayed(fn)(*item) for item in items)


# --- trap and potential ------------------------------------------------------

def _trap_base(section: TrapSection) -> tuple[float, float, float]:
    mass = section.mass.mass("trap.mass")
    omega_z = section.omega_z.angular_frequency("trap.omega_z")
    return mass, omega_z, a_z_of(mass, omega_z)


def build_trap(section: TrapSection) -> TrapContext:
    mass, omega_z, a_z = _trap_base(section)
    n_points = section.n_points or defaults.dvr_points
    if section.eta is not None:
        trap = calibrate_trap(mass, section.eta.length(a_z, "trap.eta"), omega_z, section.aspect_ratio)
    elif section.V0 is not None:
        trap = trap_from_barrier(mass, omega_z, section.V0.in_units_of("energy", "trap.V0"), section.aspect_ratio)
    else:
        target = section.J_target.angular_frequency("trap.J_target", omega_z) / omega_z
        eta_t = calibrate_barrier(target, n_points)
        trap = trap_from_barrier(mass, omega_z, eta_t**2 / 8.0, section.aspect_ratio)

    derived = derive_trap(trap)
    is_tight_binding(derived)
    eta_t = eta_tilde(trap)
    solution = solve_doublet(default_grid(eta_t, n_points), eta_t)
    return TrapContext(trap, derived, solution)


def build_potential(section: PotentialSection, a_z: float, a_s: Quantity | None = None) -> InteractionPotential:
    """Potential with lengths in a_z (reduced mass ½ in oscillator units)."""
    a_s = a_s or section.a_s
    if section.kind == "none":
        return NoInteraction()
    a_s_z = a_s.length(a_z, "potential.a_s") / a_z
    if section.kind == "contact":
        return ContactInteraction(a_s=a_s_z)
    r0_z = section.r0.length(a_z, "potential.r0") / a_z
    if section.kind == "jk_negative":
        return JostKohnNegative(a_s=a_s_z, r0=r0_z)
    if section.kappa is not None:
        kappa = section.kappa.wavenumber(a_z, "potential.kappa") * a_z
        return JostKohnPositive(a_s=a_s_z, r0=r0_z, kappa=kappa)
    return JostKohnPositive(a_s=a_s_z, r0=r0_z, Lambda=section.Lambda)


def _with_range(potential: InteractionPotential, r0: float) -> InteractionPotential:
    return potential.model_copy(update={"r0": r0})


# --- couplings -----------------------------------------------------------------

def _apply_ratios(p: HubbardParameters, model: ModelSection) -> HubbardParameters:
    if model.ratios is None:
        return p
    r = model.ratios
    return p.model_copy(update={"U_i": r.U_i * p.U, "I": r.I * p.U, "K": r.K * p.U})


def base_couplings(config: RunConfig) -> HubbardParameters:
    """Hubbard couplings in units of J."""
    model = config.model
    if model.source == "trap":
        ctx = build_trap(config.trap)
        potential = build_potential(config.potential, ctx.a_z)
        return _apply_ratios(hubbard_parameters(ctx.solution, potential, ctx.a_rho_ratio).in_units_of_J(), model)

    fields = {"U": model.U, "U_i": model.U_i, "I": model.I, "K": model.K}
    J_hw = None
    values = {}
    for name, q in fields.items():
        q.in_units_of("coupling", f"model.{name}")
        if q.unit == "hbar_omega_z":
            if J_hw is None:
                J_hw = build_trap(config.trap).solution.J
            values[name] = q.value / J_hw
        else:
            values[name] = q.value
    return _apply_ratios(HubbardParameters(J=1.0, **values), model)


def _u_values(config: RunConfig, base: HubbardParameters) -> list[HubbardParameters]:
    if config.sweep is None:
        return [base]
    if config.sweep.parameter != "U/J":
        raise ConfigError("Unsupported sweep", [f"sweep.parameter: this command sweeps U/J, got {config.sweep.parameter}"])
    return [_apply_ratios(base.model_copy(update={"U": float(u)}), config.model) for u in config.sweep.values()]


# --- tasks -----------------------------------------------------------------------

def _trap_row(section: TrapSection, V0: float) -> dict[str, float]:
    section = section.model_copy(update={"eta": None, "V0": Quantity(value=V0, unit="hbar_omega_z")})
    sol = build_trap(section).solution
    return {"V0_over_hbar_omega_z": V0, "eta_tilde": sol.eta_tilde, "J": sol.J, "doublet_gap": sol.doublet_gap}


def task_trap(config: RunConfig, threads: int) -> list[RunResult]:
    if config.sweep is not None:
        if config.sweep.parameter != "V0":
            raise ConfigError("Unsupported sweep", ["sweep.parameter: trap sweeps V0"])
        rows = _map(_trap_row, [(config.trap, float(v)) for v in config.sweep.values()], threads)
        return [RunResult("trap_sweep", _rows_to_table(rows))]

    ctx = build_trap(config.trap)
    sol, derived = ctx.solution, ctx.derived
    summary = {
        "omega_z_rad_s": derived.omega_z,
        "V0_over_hbar_omega_z": derived.V0 / (HBAR * derived.omega_z),
        "a_z_m": derived.a_z,
        "a_rho_m": derived.a_rho,
        "zeta": derived.zeta,
        "eta_tilde": sol.eta_tilde,
        "J_over_hbar_omega_z": sol.J,
        "J_rad_s": sol.J * derived.omega_z,
        "doublet_gap": sol.doublet_gap,
        "energies": sol.energies,
        "tight_binding": sol.tight_binding,
    }
    return [RunResult("trap_modes", modes_table(sol), summary, list(sol.warnings))]


def _scatter_row(potential: InteractionPotential) -> dict[str, float]:
    fit = verify_scattering(potential)
    return {"a_s": fit.a_s, "r0": fit.r0, "a_s_fit": fit.a_s_fit, "r0_fit": fit.r0_fit, "recovered": float(fit.recovered)}


def task_scatter(config: RunConfig, threads: int) -> list[RunResult]:
    _, _, a_z = _trap_base(config.trap)
    if config.sweep is not None:
        if config.sweep.parameter != "a_s":
            raise ConfigError("Unsupported sweep", ["sweep.parameter: scatter sweeps a_s"])
        potentials = [build_potential(config.potential, a_z, config.sweep.quantity(v)) for v in config.sweep.values()]
        rows = _map(_scatter_row, [(p,) for p in potentials], threads)
        return [RunResult("scatter_sweep", _rows_to_table(rows), {"length_unit": "a_z", "a_z_m": a_z})]

    potential = build_potential(config.potential, a_z)
    fit = verify_scattering(potential)
    table = phase_shifts(potential, default_k_grid(potential))
    summary = {"length_unit": "a_z", "a_z_m": a_z, **fit.model_dump(exclude={"warnings"})}
    return [RunResult(
        "scatter",
        {"k": table.k, "delta_k": table.delta, "kcotdelta": table.kcotdelta},
        summary,
        list(fit.warnings),
    )]


def _params_row(sol: SingleParticleSolution, potential: InteractionPotential, a_rho: float, key: str, x: float) -> dict:
    p = hubbard_parameters(sol, potential, a_rho)
    return {key: x, "J": p.J, "U": p.U, "U_i": p.U_i, "I": p.I, "K": p.K, "U_rr": p.U_rr, "U_over_J": p.U / p.J}


def _params_row_at_barrier(config: RunConfig, V0: float) -> dict:
    trap = config.trap.model_copy(update={"eta": None, "V0": Quantity(value=V0, unit="hbar_omega_z")})
    ctx = build_trap(trap)
    potential = build_potential(config.potential, ctx.a_z)
    return _params_row(ctx.solution, potential, ctx.a_rho_ratio, "V0_over_hbar_omega_z", V0)


def task_params(config: RunConfig, threads: int) -> list[RunResult]:
    sweep = config.sweep
    if sweep is not None and sweep.parameter == "V0":
        rows = _map(_params_row_at_barrier, [(config, float(v)) for v in sweep.values()], threads)
        return [RunResult("params_sweep", _rows_to_table(rows), {"energy_unit": "hbar_omega_z"})]

    ctx = build_trap(config.trap)
    summary = {
        "energy_unit": "hbar_omega_z",
        "length_unit": "a_z",
        "eta_tilde": ctx.solution.eta_tilde,
        "a_rho_over_a_z": ctx.a_rho_ratio,
    }
    if sweep is None:
        potential = build_potential(config.potential, ctx.a_z)
        row = _params_row(ctx.solution, potential, ctx.a_rho_ratio, "a_s", getattr(potential, "a_s", 0.0))
        return [RunResult("params", _rows_to_table([row]), summary, list(ctx.solution.warnings))]
    if sweep.parameter != "a_s":
        raise ConfigError("Unsupported sweep", ["sweep.parameter: params sweeps a_s or V0"])

    items = []
    for value in sweep.values():
        potential = build_potential(config.potential, ctx.a_z, sweep.quantity(value))
        items.append((ctx.solution, potential, ctx.a_rho_ratio, "a_s", getattr(potential, "a_s", 0.0)))
    rows = _map(_params_row, items, threads)
    return [RunResult("params_sweep", _rows_to_table(rows), summary, list(ctx.solution.warnings))]


def range_label(r0: float, extra: float) -> str:
    """Column stem for a finite-range potential at range ``extra``, relative to the base ``r0``."""
    ratio = r0 / extra
    if ratio >= 1.0:
        return f"jk_r0_over_{ratio:.6g}"
    return f"jk_r0_times_{1.0 / ratio:.6g}"


def _pair_potentials(config: RunConfig, a_z: float, a_s: Quantity | None = None) -> dict[str, InteractionPotential]:
    """Contact plus the configured finite-range potential(s), lengths in metres."""
    section = config.potential
    potential = build_potential(section, a_z, a_s)
    to_si = 1.0 / a_z
    potentials: dict[str, InteractionPotential] = {}
    if not isinstance(potential, NoInteraction):
        potentials["contact"] = ContactInteraction(a_s=potential.a_s).rescaled(to_si)
    if isinstance(potential, (JostKohnNegative, JostKohnPositive)):
        potentials["jk_r0"] = potential.rescaled(to_si)
        for i, r0 in enumerate(section.extra_ranges):
            extra = _with_range(potential, r0.length(a_z, f"potential.extra_ranges.{i}") / a_z)
            potentials[range_label(potential.r0, extra.r0)] = extra.rescaled(to_si)
    if isinstance(potential, NoInteraction):
        potentials["none"] = potential
    return potentials


def _pair_barrier_row(V0: float, mass: float, eta: float, potentials: dict, definition: str) -> dict:
    row = pair_sweep([V0], mass, eta, potentials, definition)[0]
    return {key if key == "V0_over_hbar_omega_z" else f"U_{key}": value for key, value in row.items()}


def _pair_scattering_row(a_s: float, mass: float, omega: float, potentials: dict, definition: str) -> dict:
    row = {"a_s": a_s}
    for name, potential in potentials.items():
        problem = problem_for_trap(potential, mass, omega)
        row[f"U_{name}"] = onsite_U_from_pair(solve_relative_ground(problem), problem, definition)
    return row


def task_pair(config: RunConfig, threads: int) -> list[RunResult]:
    mass, omega_z, a_z = _trap_base(config.trap)
    definition = config.model.u_definition
    sweep = config.sweep

    if sweep is not None and sweep.parameter == "a_s":
        items = []
        for value in sweep.values():
            q = sweep.quantity(value)
            items.append((q.length(a_z, "sweep") / a_z, mass, omega_z, _pair_potentials(config, a_z, q), definition))
        rows = _map(_pair_scattering_row, items, threads)
        summary = {"energy_unit": "hbar_omega_z", "length_unit": "a_z", "U_definition": definition}
        return [RunResult("pair_sweep", _rows_to_table(rows), summary)]

    if config.trap.eta is not None:
        eta = config.trap.eta.length(a_z, "trap.eta")
        V0_base = None
    else:
        ctx = build_trap(config.trap)
        eta = ctx.trap.eta
        V0_base = ctx.derived.V0 / (HBAR * ctx.derived.omega_z)

    if sweep is None:
        if V0_base is None:
            V0_base = eta_tilde(calibrate_trap(mass, eta, omega_z, config.trap.aspect_ratio)) ** 2 / 8.0
        values = [V0_base]
    elif sweep.parameter == "V0":
        values = [float(v) for v in sweep.values()]
    else:
        raise ConfigError("Unsupported sweep", ["sweep.parameter: pair sweeps V0 or a_s"])

    potentials = _pair_potentials(config, a_z)
    rows = _map(_pair_barrier_row, [(v, mass, eta, potentials, definition) for v in values], threads)
    summary = {"energy_unit": "Hz", "eta_m": eta, "U_definition": definition}
    return [RunResult("pair_sweep" if sweep else "pair", _rows_to_table(rows), summary)]


def task_spectrum(config: RunConfig, threads: int) -> list[RunResult]:
    parameters = _u_values(config, base_couplings(config))
    table = hubbard.spectrum_table(config.model.statistics, parameters)
    return [RunResult(f"spectrum_{config.model.statistics}", table, {"energy_unit": "J"})]


def _trajectory(config: RunConfig, model: str, p: HubbardParameters) -> dynamics.Trajectory:
    dyn = config.dynamics
    times = dyn.times()
    couplings = DerivedCouplings.from_parameters(p)
    if dyn.method == "analytic":
        return dynamics.analytic_trajectory(model, dyn.init, couplings, times)
    psi0 = dynamics.initial_state(model, dyn.init)
    return dynamics.numeric_evolve(hubbard.hamiltonian(model, p), psi0, times, dyn.method, model, dyn.init)


def _amplitude_columns(trajectory: dynamics.Trajectory) -> dict[str, np.ndarray]:
    prefix = "c" if trajectory.model == "fermion" else "C"
    columns = {}
    for i in range(trajectory.amplitudes.shape[1]):
        columns[f"re_{prefix}{i}"] = trajectory.amplitudes[:, i].real
        columns[f"im_{prefix}{i}"] = trajectory.amplitudes[:, i].imag
    return columns


def _dynamics_point(config: RunConfig, p: HubbardParameters) -> dict[str, np.ndarray]:
    model = config.model.statistics
    trajectory = _trajectory(config, model, p)
    series = dynamics.observable_series(trajectory, DerivedCouplings.from_parameters(p))
    keys = ("rho_s", "rho_d", "P_pair", "P_single", "P_none")
    if config.dynamics.average:
        averages = dynamics.time_average(series, float(trajectory.times[-1]))
        return {"U_over_J": np.array([p.U]), **{k: np.array([averages[k]]) for k in keys}}
    table = {"t_in_1_over_J": trajectory.times}
    table.update({k: series[k] for k in keys})
    table.update(_amplitude_columns(trajectory))
    return table


def task_dynamics(config: RunConfig, threads: int) -> list[RunResult]:
    parameters = _u_values(config, base_couplings(config))
    parts = _map(_dynamics_point, [(config, p) for p in parameters], threads)
    if config.sweep is not None and not config.dynamics.average:
        # Long format: one block of times per U/J
        parts = [{"U_over_J": np.full(len(part["t_in_1_over_J"]), p.U), **part} for part, p in zip(parts, parameters)]
    table = {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}
    name = "dynamics_average" if config.dynamics.average else "dynamics"
    summary = {"model": config.model.statistics, "init": config.dynamics.init, "time_unit": "1/J"}
    return [RunResult(name, table, summary)]


def task_entropy(config: RunConfig, threads: int) -> list[RunResult]:
    base = base_couplings(config)
    if config.sweep is not None:
        return [RunResult("entropy_eigenstates", qinfo.eigenstate_entropy_table(_u_values(config, base)))]

    init = config.dynamics.init
    if init == "split-antisymmetric":
        raise DomainError("The entropy comparison needs a start shared by both statistics", field="init")
    table = {}
    for model, suffix in (("fermion", "F"), ("boson", "B")):
        trajectory = _trajectory(config, model, base)
        table.setdefault("t", trajectory.times)
        columns = qinfo.series_columns(model, trajectory.amplitudes)
        table[f"S_spatial_{suffix}"] = columns["S_spatial"]
        table[f"S1_{suffix}"] = columns["S1"]
        table[f"E_rho1_{suffix}"] = columns["E_rho1"]
        table[f"Q_left_{suffix}"] = columns["Q_left"]
        table[f"Q_right_{suffix}"] = columns["Q_right"]

    ordered = {
        "t": table["t"],
        "S_spatial_F": table["S_spatial_F"],
        "S_spatial_B": table["S_spatial_B"],
        "S1_F": table["S1_F"],
        "S1_B": table["S1_B"],
        "E_rho1": table["E_rho1_F"],
        "E_rho1_B": table["E_rho1_B"],
        "Q_left": table["Q_left_F"],
        "Q_right": table["Q_right_F"],
        "Q_left_B": table["Q_left_B"],
        "Q_right_B": table["Q_right_B"],
    }
    return [RunResult("entropy", ordered, {"init": init, "U_over_J": base.U, "time_unit": "1/J"})]


def task_fluct(config: RunConfig, threads: int) -> list[RunResult]:
    parameters = _u_values(config, base_couplings(config))
    return [RunResult("fluct", qinfo.fluctuation_table(parameters), {"mean_W": 0.0})]


TASKS: dict[str, Callable[[RunConfig, int], list[RunResult]]] = {
    "trap": task_trap,
    "scatter": task_scatter,
    "params": task_params,
    "pair": task_pair,
    "spectrum": task_spectrum,
    "dynamics": task_dynamics,
    "entropy": task_entropy,
    "fluct": task_fluct,
}


def _rows_to_table(rows: list[dict]) -> dict[str, np.ndarray]:
    keys = list(rows[0])
    return {key: np.array([math.nan if row[key] is None else row[key] for row in rows], dtype=float) for key in keys}


def run(command: str, config: RunConfig, out_dir: str | None = None, threads: int | None = None) -> list[Path]:
    """Execute one subcommand and write its result files."""
    if command not in TASKS:
        raise ConfigError(f"Unknown command: {command}", [f"command: expected one of {', '.join(COMMANDS)}"])
    threads = threads or defaults.threads
    out_dir = out_dir or config.output.directory or settings.output_dir
    logger.info("Running %s (threads=%d)", command, threads)

    results = TASKS[command](config, threads)
    document = config.model_dump(mode="json", exclude={"output": {"directory"}})
    paths = []
    for result in results:
        if config.output.name:
            result.name = config.output.name if len(results) == 1 else f"{config.output.name}_{result.name}"
        for warning in result.warnings:
            logger.warning("%s: %s", command, warning)
        paths.append(write_result(result, command, document, out_dir, config.output.format))
    return paths
