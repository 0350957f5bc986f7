from __future__ import annotations

import math

import numpy as np
import pytest
from pydantic import ValidationError

from dwhubbard.core import DomainError
from dwhubbard.potentials import (
    ContactInteraction,
    JostKohnNegative,
    JostKohnPositive,
    NoInteraction,
    evaluate_positive_factored,
    interaction_range,
    kappa_from_lambda,
    lambda_from_kappa,
    parse_potential,
    phase_shifts,
    verify_scattering,
)


@pytest.mark.parametrize("a_s, r0", [(1.0, 1.0), (-1.0, 0.0), (-1.0, -2.0)])
def test_negative_branch_validation(a_s, r0):
    with pytest.raises(ValidationError):
        JostKohnNegative(a_s=a_s, r0=r0)


@pytest.mark.parametrize("a_s, Lambda", [(1.5, 0.0), (10.0, 1.0), (10.0, -1.5)])
def test_positive_branch_validation(a_s, Lambda):
    with pytest.raises(ValidationError):
        JostKohnPositive(a_s=a_s, r0=1.0, Lambda=Lambda)


def test_kappa_and_lambda_are_inverse():
    a_s, r0 = 10.0, 1.0
    Lambda = lambda_from_kappa(50.0, a_s, r0)
    assert -1.0 < Lambda < 1.0
    assert kappa_from_lambda(Lambda, a_s, r0) == pytest.approx(50.0, rel=1e-12)

    potential = JostKohnPositive(a_s=a_s, r0=r0, kappa=50.0)
    assert potential.Lambda == pytest.approx(Lambda, rel=1e-14)
    assert potential.kappa == pytest.approx(50.0, rel=1e-12)
    assert potential.binding_energy == pytest.approx(-(50.0**2), rel=1e-12)


def test_kappa_and_lambda_are_exclusive():
    with pytest.raises(ValidationError):
        JostKohnPositive(a_s=10.0, r0=1.0, Lambda=0.5, kappa=50.0)


def test_lambda_from_kappa_domain():
    with pytest.raises(DomainError):
        lambda_from_kappa(-1.0, 10.0, 1.0)
    with pytest.raises(DomainError):
        kappa_from_lambda(0.0, 1.0, 1.0)


def test_negative_branch_shape():
    potential = JostKohnNegative(a_s=-9.54, r0=1.66)
    r = np.linspace(0.0, 30.0, 301)
    v = potential.evaluate(r)
    assert v[0] == pytest.approx(-potential.depth, rel=1e-12)
    assert np.all(v <= 0.0)
    assert np.all(np.diff(v) >= 0.0)
    assert abs(v[-1]) < 1e-12 * potential.depth


def test_factored_positive_matches_direct():
    potential = JostKohnPositive(a_s=10.0, r0=1.0, kappa=50.0)
    r = np.geomspace(1e-3, 20.0, 200)
    direct = potential.evaluate(r)
    factored = evaluate_positive_factored(potential, r)
    np.testing.assert_allclose(factored, direct, rtol=1e-8, atol=1e-10 * np.abs(direct).max())


def test_parse_potential_dispatches_on_kind():
    assert isinstance(parse_potential({"kind": "jk_negative", "a_s": -9.54, "r0": 1.66}), JostKohnNegative)
    assert isinstance(parse_potential({"kind": "contact", "a_s": -0.1}), ContactInteraction)
    assert isinstance(parse_potential({"kind": "none"}), NoInteraction)
    positive = parse_potential({"kind": "jk_positive", "a_s": 10.0, "r0": 1.0, "kappa": 50.0})
    assert positive.kappa == pytest.approx(50.0)
    with pytest.raises(ValidationError):
        parse_potential({"kind": "yukawa", "a_s": 1.0})


def test_contact_is_not_pointwise():
    contact = ContactInteraction(a_s=-0.1)
    with pytest.raises(DomainError):
        contact.evaluate(np.array([0.0, 1.0]))
    assert contact.coupling == pytest.approx(4.0 * math.pi * -0.1)
    with pytest.raises(DomainError):
        phase_shifts(contact, np.array([0.1]))


def test_rescaled_changes_units_only():
    si = JostKohnNegative(a_s=-9.54e-9, r0=1.66e-9)
    nm = si.rescaled(1e-9)
    assert nm.a_s == pytest.approx(-9.54)
    assert nm.r0 == pytest.approx(1.66)
    assert nm.reduced_mass == si.reduced_mass
    assert si.rescaled(1e-9, reduced_mass=1.0).reduced_mass == 1.0


def test_interaction_range_is_finite():
    potential = JostKohnNegative(a_s=-9.54, r0=1.66)
    reach = interaction_range(potential)
    assert potential.r0 < reach < 1e3 * potential.r0
    assert interaction_range(NoInteraction()) == 0.0


def test_scattering_length_is_recovered_for_li6():
    fit = verify_scattering(JostKohnNegative(a_s=-9.54, r0=1.66))
    assert fit.recovered
    assert fit.a_s_fit == pytest.approx(-9.54, rel=0.01)
    assert fit.r0_fit == pytest.approx(1.66, rel=0.05)
    assert not fit.warnings


def test_scattering_check_trivial_cases():
    assert verify_scattering(NoInteraction()).recovered
    with pytest.raises(DomainError):
        verify_scattering(ContactInteraction(a_s=-1.0))
