from __future__ import annotations

import numpy as np
import pytest

from dwhubbard import integrals
from dwhubbard.core import DomainError, NumericError
from dwhubbard.integrals import (
    contact_onsite_U,
    hubbard_parameters,
    interaction_element,
    mode_correlation,
    monte_carlo_onsite_U,
    refined_element,
)
from dwhubbard.potentials import ContactInteraction, JostKohnNegative, NoInteraction

A_RHO = 0.1


def test_mode_correlation_is_exact_at_zero_shift(doublet):
    a = doublet.psi_l**2
    b = doublet.psi_r**2
    corr = mode_correlation(a, b, doublet.z)
    assert float(corr(np.array([0.0]))[0]) == pytest.approx(np.sum(a * b) * doublet.spacing, abs=1e-12)


def test_zero_potential_gives_zero(doublet):
    params = hubbard_parameters(doublet, NoInteraction(), A_RHO)
    assert (params.U, params.U_i, params.I, params.K) == (0.0, 0.0, 0.0, 0.0)
    assert params.J == doublet.J


def test_contact_closed_form(doublet):
    a_s = -0.05
    expected = 2.0 * a_s / A_RHO**2 * np.sum(doublet.psi_l**4) * doublet.spacing
    assert contact_onsite_U(doublet, a_s, A_RHO) == pytest.approx(expected, rel=1e-12)
    assert contact_onsite_U(doublet, 0.0, A_RHO) == 0.0
    assert contact_onsite_U(doublet, 2 * a_s, A_RHO) == pytest.approx(2 * expected, rel=1e-12)


def test_contact_couplings_share_the_overlap(doublet):
    params = hubbard_parameters(doublet, ContactInteraction(a_s=-0.05), A_RHO)
    assert params.U < 0
    assert params.U_rr == pytest.approx(params.U, rel=1e-10)
    assert params.U_i == pytest.approx(params.K, rel=1e-12)


def test_rejects_bad_radial_length(doublet):
    with pytest.raises(DomainError):
        interaction_element(
            doublet.psi_l, doublet.psi_l, doublet.psi_l, doublet.psi_l,
            ContactInteraction(a_s=-0.05), -1.0, doublet.z,
        )


@pytest.fixture(scope="module")
def jk_parameters(doublet):
    return hubbard_parameters(doublet, JostKohnNegative(a_s=-0.05, r0=0.01), A_RHO)


def test_attractive_finite_range_couplings(jk_parameters):
    p = jk_parameters
    assert p.U < 0
    assert p.U_rr == pytest.approx(p.U, rel=1e-8)
    assert abs(p.U_i / p.U) < 1e-2
    assert abs(p.K / p.U) < 1e-2
    assert abs(p.I / p.U) < 0.1
    assert p.provenance["a_rho_over_a_z"] == A_RHO


def test_particle_relabelling_symmetry(doublet):
    potential = JostKohnNegative(a_s=-0.05, r0=0.01)
    l, r, z = doublet.psi_l, doublet.psi_r, doublet.z
    forward = interaction_element(l, r, l, r, potential, A_RHO, z)
    swapped = interaction_element(r, l, r, l, potential, A_RHO, z)
    assert swapped == pytest.approx(forward, rel=1e-8)


def test_onsite_value_is_stable_when_resolution_doubles(doublet):
    potential = JostKohnNegative(a_s=-0.05, r0=0.01)
    l, z = doublet.psi_l, doublet.z
    coarse = interaction_element(l, l, l, l, potential, A_RHO, z, resolution=1)
    fine = interaction_element(l, l, l, l, potential, A_RHO, z, resolution=2)
    assert fine == pytest.approx(coarse, rel=1e-6)
    assert refined_element(l, l, l, l, potential, A_RHO, z) == fine


def test_unconverged_quadrature_is_a_numeric_error(doublet, monkeypatch):
    def drifting(*args):
        return -1.0 - 0.01 / args[-1]

    monkeypatch.setattr(integrals, "interaction_element", drifting)
    with pytest.raises(NumericError) as info:
        hubbard_parameters(doublet, JostKohnNegative(a_s=-0.05, r0=0.01), A_RHO)
    report = info.value.report
    assert report["resolution"] == 1
    assert report["coarse"] == pytest.approx(-1.01)
    assert report["fine"] == pytest.approx(-1.005)
    assert report["relative_change"] > integrals.REFINEMENT_TOL


def test_short_range_limit_approaches_contact(doublet):
    r0 = 1e-3
    a_s = -1e-3 * r0
    jk = interaction_element(
        doublet.psi_l, doublet.psi_l, doublet.psi_l, doublet.psi_l,
        JostKohnNegative(a_s=a_s, r0=r0), A_RHO, doublet.z,
    )
    contact = contact_onsite_U(doublet, a_s, A_RHO)
    assert jk == pytest.approx(contact, rel=0.1)


@pytest.mark.slow
def test_monte_carlo_agrees_with_quadrature(doublet, jk_parameters):
    mean, stderr = monte_carlo_onsite_U(
        doublet, JostKohnNegative(a_s=-0.05, r0=0.01), A_RHO, n_samples=10_000_000, seed=7,
    )
    assert abs(mean - jk_parameters.U) < max(3.0 * stderr, 0.02 * abs(jk_parameters.U))
