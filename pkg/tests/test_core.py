from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from dwhubbard.core import (
    HBAR,
    LI6_MASS,
    DomainError,
    NumericError,
    TrapConfig,
    UnitSystem,
    calibrate_trap,
    derive_trap,
    double_well,
    eta_tilde,
    is_tight_binding,
    trap_from_barrier,
)

from conftest import OMEGA_Z


def test_calibrated_trap_has_requested_frequencies():
    trap = calibrate_trap(LI6_MASS, 3e-6, OMEGA_Z, aspect_ratio=0.01)
    derived = derive_trap(trap)
    assert derived.omega_z == pytest.approx(OMEGA_Z, rel=1e-12)
    assert trap.omega_rho == pytest.approx(100.0 * OMEGA_Z, rel=1e-12)
    assert derived.zeta == pytest.approx(0.1, rel=1e-12)
    assert derived.a_rho / derived.a_z == pytest.approx(0.1, rel=1e-12)


def test_barrier_height_in_oscillator_units(li6_trap):
    derived = derive_trap(li6_trap)
    assert derived.V0 / (HBAR * derived.omega_z) == pytest.approx(2.0, rel=1e-12)
    assert eta_tilde(li6_trap) == pytest.approx(4.0, rel=1e-12)


def test_trap_config_accepts_lambda_alias():
    trap = TrapConfig.model_validate({"mass": LI6_MASS, "omega_rho": 1.0, "lambda": 2.0, "eta": 1e-6})
    assert trap.lam == 2.0


@pytest.mark.parametrize("field", ["mass", "omega_rho", "eta"])
def test_non_positive_trap_inputs_are_rejected(field):
    values = {"mass": LI6_MASS, "omega_rho": 1e5, "lam": 1e-10, "eta": 1e-6}
    values[field] = -values[field]
    with pytest.raises(DomainError) as info:
        derive_trap(TrapConfig(**values))
    assert info.value.field == field


def test_double_well_shape():
    eta_t = 3.0
    assert double_well(np.array([-eta_t, eta_t]), eta_t) == pytest.approx([0.0, 0.0])
    assert double_well(0.0, eta_t) == pytest.approx(eta_t**2 / 8.0)


def test_unit_system_scales(li6_trap):
    derived = derive_trap(li6_trap)
    units = UnitSystem.from_trap(derived)
    assert units.to_oscillator(derived.a_z, "length") == pytest.approx(1.0)
    assert units.to_si(1.0, "energy") == pytest.approx(HBAR * derived.omega_z)
    assert units.to_si(1.0, "frequency") == pytest.approx(derived.omega_z)
    with pytest.raises(DomainError):
        units.to_si(1.0, "charge")


def test_shallow_barrier_is_flagged(caplog):
    derived = derive_trap(trap_from_barrier(LI6_MASS, OMEGA_Z, 0.5))
    with caplog.at_level(logging.WARNING):
        assert not is_tight_binding(derived)
    assert "zero-point" in caplog.text
    assert is_tight_binding(derive_trap(trap_from_barrier(LI6_MASS, OMEGA_Z, 3.0)))


def test_numeric_error_reports_diagnostics():
    err = NumericError("solver failed", report={"residual": 1e-3})
    assert "residual=0.001" in str(err)
    assert math.isclose(err.report["residual"], 1e-3)
