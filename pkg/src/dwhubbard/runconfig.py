"""Run documents for the CLI: sections, unit-carrying quantities, presets and merging."""
from __future__ import annotations

import logging
import math
from typing import Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from dwhubbard.core import AMU, HBAR

logger = logging.getLogger(__name__)

Unit = Literal[
    "Hz", "rad/s", "nm", "a_z", "hbar_omega_z", "J", "1/J",
    "1/a_z", "1/nm", "amu", "kg", "dimensionless",
]

_KIND_UNITS: dict[str, tuple[str, ...]] = {
    "mass": ("amu", "kg"),
    "frequency": ("Hz", "rad/s", "hbar_omega_z"),
    "length": ("nm", "a_z"),
    "wavenumber": ("1/a_z", "1/nm"),
    "coupling": ("J", "hbar_omega_z"),
    "time": ("1/J",),
    "energy": ("hbar_omega_z",),
}


class ConfigError(ValueError):
    """Invalid run configuration; ``errors`` holds one line per offending field."""

    def __init__(self, message: str, errors: list[str] | None = None) -> None:
        super().__init__(message)
        self.errors = errors or []

    def __str__(self) -> str:
        base = super().__str__()
        if not self.errors:
            return base
        return base + "\n" + "\n".join(f"  {line}" for line in self.errors)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Quantity(_Section):
    value: float
    unit: Unit

    def _expect(self, kind: str, where: str) -> None:
        if self.unit not in _KIND_UNITS[kind]:
            raise ConfigError(
                f"Unit {self.unit!r} is not a {kind}",
                [f"{where}.unit: expected one of {', '.join(_KIND_UNITS[kind])}"],
            )

    def mass(self, where: str = "mass") -> float:
        """kg."""
        self._expect("mass", where)
        return self.value * AMU if self.unit == "amu" else self.value

    def angular_frequency(self, where: str = "frequency", omega_z: float | None = None) -> float:
        """rad/s; ``Hz`` means 2π·value."""
        self._expect("frequency", where)
        if self.unit == "Hz":
            return 2.0 * math.pi * self.value
        if self.unit == "hbar_omega_z":
            if omega_z is None:
                raise ConfigError("hbar_omega_z needs a trap frequency", [f"{where}.unit: not allowed here"])
            return self.value * omega_z
        return self.value

    def length(self, a_z: float, where: str = "length") -> float:
        """Metres, given the axial oscillator length ``a_z`` in metres."""
        self._expect("length", where)
        return self.value * 1e-9 if self.unit == "nm" else self.value * a_z

    def wavenumber(self, a_z: float, where: str = "wavenumber") -> float:
        """1/m."""
        self._expect("wavenumber", where)
        return self.value * 1e9 if self.unit == "1/nm" else self.value / a_z

    def in_units_of(self, kind: str, where: str) -> float:
        self._expect(kind, where)
        return self.value


def _q(value: float, unit: str) -> Quantity:
    return Quantity(value=value, unit=unit)


class TrapSection(_Section):
    mass: Quantity = Field(default_factory=lambda: _q(6.0151228874, "amu"))
    omega_z: Quantity = Field(default_factory=lambda: _q(1000.0, "Hz"))
    # ω_z/ω_ρ
    aspect_ratio: float = 0.01
    # The barrier is fixed by the first of eta, V0, J_target that is set
    eta: Quantity | None = None
    V0: Quantity | None = None
    J_target: Quantity | None = Field(default_factory=lambda: _q(150.0, "rad/s"))
    n_points: int | None = None

    @model_validator(mode="after")
    def _check(self) -> TrapSection:
        if not self.aspect_ratio > 0:
            raise ValueError("aspect_ratio must be positive")
        if self.eta is None and self.V0 is None and self.J_target is None:
            raise ValueError("one of eta, V0, J_target is required")
        return self


class PotentialSection(_Section):
    kind: Literal["none", "contact", "jk_negative", "jk_positive"] = "jk_negative"
    a_s: Quantity | None = Field(default_factory=lambda: _q(-9.54, "nm"))
    r0: Quantity | None = Field(default_factory=lambda: _q(1.66, "nm"))
    Lambda: float | None = None
    kappa: Quantity | None = None
    # Further effective ranges compared side by side by the pair command
    extra_ranges: list[Quantity] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> PotentialSection:
        if self.kind != "none" and self.a_s is None:
            raise ValueError(f"{self.kind} needs a_s")
        if self.kind.startswith("jk") and self.r0 is None:
            raise ValueError(f"{self.kind} needs r0")
        if self.kind == "jk_positive" and (self.Lambda is None) == (self.kappa is None):
            raise ValueError("jk_positive needs exactly one of Lambda, kappa")
        return self


class CouplingRatios(_Section):
    """U_i, I, K as multiples of U."""

    U_i: float = 0.0
    I: float = 0.0  # noqa: E741
    K: float = 0.0


class ModelSection(_Section):
    statistics: Literal["fermion", "boson"] = "fermion"
    # explicit: U, U_i, I, K below; trap: computed from [trap] and [potential]
    source: Literal["explicit", "trap"] = "explicit"
    U: Quantity = Field(default_factory=lambda: _q(0.0, "J"))
    U_i: Quantity = Field(default_factory=lambda: _q(0.0, "J"))
    I: Quantity = Field(default_factory=lambda: _q(0.0, "J"))  # noqa: E741
    K: Quantity = Field(default_factory=lambda: _q(0.0, "J"))
    ratios: CouplingRatios | None = None
    u_definition: Literal["energy-shift", "matrix-element"] = "energy-shift"


class DynamicsSection(_Section):
    init: Literal["same-site", "split", "split-antisymmetric"] = "same-site"
    method: Literal["analytic", "eigh", "DOP853"] = "analytic"
    t_max: Quantity = Field(default_factory=lambda: _q(100.0, "1/J"))
    step: Quantity = Field(default_factory=lambda: _q(0.002, "1/J"))
    average: bool = False

    @model_validator(mode="after")
    def _check(self) -> DynamicsSection:
        if not self.t_max.value > 0 or not self.step.value > 0:
            raise ValueError("t_max and step must be positive")
        if self.step.value > self.t_max.value:
            raise ValueError("step must not exceed t_max")
        return self

    def times(self) -> np.ndarray:
        t_max = self.t_max.in_units_of("time", "dynamics.t_max")
        step = self.step.in_units_of("time", "dynamics.step")
        n = int(math.floor(t_max / step + 1e-9))
        return step * np.arange(n + 1)


class SweepSection(_Section):
    parameter: Literal["U/J", "a_s", "V0"]
    start: float
    stop: float
    step: float
    inclusive: bool = True
    # a_s: nm or a_z; V0: hbar_omega_z; U/J: J
    unit: Unit | None = None

    def values(self) -> np.ndarray:
        if not self.step > 0:
            raise ConfigError("Empty sweep", [f"sweep.step: must be positive, got {self.step}"])
        span = (self.stop - self.start) / self.step
        if self.inclusive:
            n = int(math.floor(span + 1e-9)) + 1
        else:
            n = int(math.ceil(span - 1e-9))
        if n <= 0:
            raise ConfigError(
                "Empty sweep",
                [f"sweep: [{self.start}, {self.stop}] with step {self.step} holds no points"],
            )
        # Rounded so repeated steps print as the decimal grid they stand for
        return np.round(self.start + self.step * np.arange(n), 12)

    def quantity(self, value: float) -> Quantity:
        default = {"U/J": "J", "a_s": "a_z", "V0": "hbar_omega_z"}[self.parameter]
        return _q(float(value), self.unit or default)


class OutputSection(_Section):
    format: Literal["csv", "json"] = "csv"
    directory: str | None = None
    name: str | None = None


class RunConfig(_Section):
    trap: TrapSection = Field(default_factory=TrapSection)
    potential: PotentialSection = Field(default_factory=PotentialSection)
    model: ModelSection = Field(default_factory=ModelSection)
    dynamics: DynamicsSection = Field(default_factory=DynamicsSection)
    sweep: SweepSection | None = None
    output: OutputSection = Field(default_factory=OutputSection)


def a_z_of(mass: float, omega_z: float, hbar: float = HBAR) -> float:
    return math.sqrt(hbar / (mass * omega_z))


def load_presets(path: str) -> dict[str, dict]:
    """Named presets: ``{name: {command, description, config, alias_of}}``.

    Aliases map to the same preset; ``alias_of`` names the canonical entry
    (None for canonical entries themselves).
    """
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        logger.warning("Presets file not found: %s", path)
        return {}

    presets = {}
    aliases = {}
    for name, item in (data or {}).get("presets", {}).items():
        presets[name] = {
            "command": item.get("command"),
            "description": item.get("description", ""),
            "config": item.get("config") or {},
            "alias_of": None,
        }
        for alias in item.get("aliases") or []:
            aliases[alias] = name
    for alias, name in aliases.items():
        if alias in presets:
            logger.warning("Preset alias %s shadows a preset, ignored", alias)
            continue
        presets[alias] = {**presets[name], "alias_of": name}
    n_aliases = sum(p["alias_of"] is not None for p in presets.values())
    logger.info("Loaded %d presets (%d aliases) from %s", len(presets) - n_aliases, n_aliases, path)
    return presets


def load_config_file(path: str) -> dict:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file is not valid YAML: {path}", [str(e)]) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file must hold a mapping: {path}")
    return data


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; ``override`` wins, nested mappings merge key by key."""
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def _diagnostics(error: ValidationError) -> list[str]:
    lines = []
    for item in error.errors():
        where = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{where}: {item['msg']}")
    return lines


def validate_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError("Invalid run configuration", _diagnostics(e)) from e


def parse_sweep(text: str) -> dict:
    """``U/J=-20:20:0.1`` → sweep section mapping."""
    try:
        parameter, spec = text.split("=", 1)
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError as e:
        raise ConfigError(f"Bad sweep {text!r}", ["sweep: expected PARAM=START:STOP:STEP"]) from e
    return {"parameter": parameter.strip(), "start": start, "stop": stop, "step": step}


def resolve_config(
    preset: dict | None = None,
    config_path: str | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Preset < config file < command-line overrides."""
    data: dict = {}
    if preset:
        data = merge(data, preset)
    if config_path:
        data = merge(data, load_config_file(config_path))
    if overrides:
        data = merge(data, overrides)
    config = validate_config(data)
    if config.sweep is not None:
        config.sweep.values()
    return config
