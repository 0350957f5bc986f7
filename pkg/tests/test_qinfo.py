from __future__ import annotations

import math

import numpy as np
import pytest

from dwhubbard.core import DomainError
from dwhubbard.dynamics import analytic_trajectory, observable_series
from dwhubbard.hubbard import BOSON_NAMED, FERMION_NAMED, TwoSiteState, analytic_spectrum
from dwhubbard.models import DerivedCouplings, HubbardParameters
from dwhubbard.qinfo import (
    eigenstate_entropies,
    eigenstate_entropy_table,
    entanglement_measure,
    fluctuation_table,
    ground_state_fluctuations,
    number_difference_moments,
    q_parameter,
    q_parameter_operator,
    single_particle_density_matrix,
    single_particle_entropy,
    spatial_density_matrix,
    spatial_entropy,
)

from conftest import random_parameters

TIMES = np.linspace(0.0, 20.0, 401)


def trajectory(model, init, **kwargs):
    c = DerivedCouplings.from_parameters(HubbardParameters(J=1.0, **kwargs))
    return analytic_trajectory(model, init, c, TIMES)


def random_state(rng, model):
    size = 4 if model == "fermion" else 3
    c = rng.normal(size=size) + 1j * rng.normal(size=size)
    return TwoSiteState(model, c / np.linalg.norm(c))


def test_antisymmetric_eigenstate_carries_one_bit():
    assert spatial_entropy(TwoSiteState("fermion", FERMION_NAMED["-"])) == pytest.approx(1.0, abs=1e-12)
    assert spatial_entropy(TwoSiteState("boson", BOSON_NAMED["-"])) == pytest.approx(1.0, abs=1e-12)


def test_ground_state_entropy_without_interaction():
    p = HubbardParameters(J=1.0)
    fermion = TwoSiteState("fermion", analytic_spectrum(p, "fermion").vector("a"))
    boson = TwoSiteState("boson", analytic_spectrum(p, "boson").vector("a"))
    np.testing.assert_allclose(np.diag(spatial_density_matrix(fermion).matrix), 0.25, atol=1e-12)
    assert spatial_entropy(fermion) == pytest.approx(2.0, abs=1e-12)
    assert spatial_entropy(boson) == pytest.approx(1.5, abs=1e-12)


def test_product_states():
    pair = TwoSiteState("fermion", [1, 0, 0, 0])
    assert spatial_entropy(pair) == 0.0
    assert single_particle_entropy(pair) == pytest.approx(1.0, abs=1e-12)
    assert entanglement_measure(pair) == pytest.approx(0.0, abs=1e-12)
    bosons = TwoSiteState("boson", [1, 0, 0])
    assert spatial_entropy(bosons) == 0.0
    assert single_particle_entropy(bosons) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("model", ["fermion", "boson"])
def test_density_matrices_are_states(model, rng):
    for _ in range(20):
        state = random_state(rng, model)
        for rho in (spatial_density_matrix(state, "left"), spatial_density_matrix(state, "right"),
                    single_particle_density_matrix(state)):
            np.testing.assert_allclose(rho.matrix, rho.matrix.conj().T, atol=1e-14)
            assert rho.trace == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.eigvalsh(rho.matrix).min() > -1e-12
        s1 = single_particle_entropy(state)
        if model == "fermion":
            assert 1.0 - 1e-12 <= s1 <= 2.0 + 1e-12
        else:
            assert -1e-12 <= s1 <= 1.0 + 1e-12


def test_entanglement_measure_agrees_across_statistics():
    fermion = observable_series(trajectory("fermion", "same-site", U=2.0, U_i=0.1, K=0.05))
    boson = observable_series(trajectory("boson", "same-site", U=2.0, U_i=0.1, K=0.05))
    np.testing.assert_allclose(fermion["E_rho1"], boson["E_rho1"], atol=1e-10)
    assert fermion["E_rho1"].min() > -1e-12


@pytest.mark.parametrize("U", [0.0, 1.0, 10.0])
@pytest.mark.parametrize("init", ["same-site", "split"])
def test_fermion_spatial_entropy_dominates(U, init):
    fermion = observable_series(trajectory("fermion", init, U=U))
    boson = observable_series(trajectory("boson", init, U=U))
    assert np.all(fermion["S_spatial"] >= boson["S_spatial"] - 1e-12)


def test_split_start_entropy_ranges():
    fermion = observable_series(trajectory("fermion", "split", U=1.0))
    boson = observable_series(trajectory("boson", "split", U=1.0))
    assert fermion["S_spatial"].min() >= 1.0 - 1e-12
    assert fermion["S_spatial"].max() <= 2.0 + 1e-12
    assert boson["S_spatial"].max() <= 1.6 + 0.05


def test_series_columns_match_state_functions():
    traj = trajectory("fermion", "same-site", U=1.0, U_i=0.2, I=-0.02, K=0.02)
    series = observable_series(traj)
    for i in (0, 57, 300):
        state = traj.state(i)
        assert series["S_spatial"][i] == pytest.approx(spatial_entropy(state), abs=1e-12)
        assert series["S1"][i] == pytest.approx(single_particle_entropy(state), abs=1e-10)
        assert series["Q_left"][i] == pytest.approx(q_parameter(state, "left"), abs=1e-14)


def test_q_parameter_initial_values():
    assert q_parameter(TwoSiteState("fermion", [1, 0, 0, 0])) == 0.0
    assert q_parameter(TwoSiteState("boson", [1, 0, 0])) == -2.0
    assert q_parameter(TwoSiteState("boson", [1, 0, 0]), "right") == 0.0


def test_q_parameter_without_interaction():
    fermion = observable_series(trajectory("fermion", "same-site"))
    boson = observable_series(trajectory("boson", "same-site"))
    np.testing.assert_allclose(fermion["Q_left"], 0.0, atol=1e-12)
    np.testing.assert_allclose(fermion["Q_left"], fermion["Q_right"], atol=1e-14)
    assert boson["Q_left"].min() >= -2.0 - 1e-12
    assert boson["Q_left"].max() <= 1e-12


@pytest.mark.parametrize("model", ["fermion", "boson"])
@pytest.mark.parametrize("site", ["left", "right"])
def test_q_parameter_routes_agree(model, site, rng):
    for _ in range(20):
        state = random_state(rng, model)
        assert q_parameter(state, site) == pytest.approx(q_parameter_operator(state, site), abs=1e-12)


def test_unknown_site_is_rejected():
    with pytest.raises(DomainError):
        q_parameter(TwoSiteState("boson", [1, 0, 0]), "middle")


def test_fluctuations_without_interaction():
    report = ground_state_fluctuations(DerivedCouplings.from_parameters(HubbardParameters(J=1.0)))
    assert report.dN == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)), rel=1e-12)
    assert report.dE_phi_F == pytest.approx(math.sqrt(3.0) / 4.0, rel=1e-12)
    assert report.d_SQL_F == pytest.approx(0.5, rel=1e-12)
    assert report.d_SQL_B == pytest.approx(1.0 / math.sqrt(2.0) - 0.5, rel=1e-12)
    assert report.mean_W == 0.0


def test_fluctuations_strong_repulsion():
    report = ground_state_fluctuations(DerivedCouplings.from_parameters(HubbardParameters(J=1.0, U=1e6)))
    assert report.dN < 1e-3
    assert report.dE_phi_F < 1e-3
    assert report.d_SQL_F < 1e-3
    assert report.d_SQL_B < 1e-3
    assert report.dE_phi_B == pytest.approx(1.0, abs=1e-3)


def test_fluctuations_strong_attraction():
    report = ground_state_fluctuations(DerivedCouplings.from_parameters(HubbardParameters(J=1.0, U=-1e6)))
    assert report.dN == pytest.approx(0.5, abs=1e-3)
    assert report.dE_phi_F == pytest.approx(0.5, abs=1e-3)
    assert report.dE_phi_B == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-3)
    assert report.d_SQL_F == pytest.approx(1.0, abs=1e-3)
    assert report.d_SQL_B == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("model", ["fermion", "boson"])
def test_number_difference_matches_fluctuation_report(model, rng):
    for _ in range(10):
        U = rng.uniform(-20, 20)
        p = HubbardParameters(J=1.0, U=U)
        state = TwoSiteState(model, analytic_spectrum(p, model).vector("a"))
        mean, dW = number_difference_moments(state)
        report = ground_state_fluctuations(DerivedCouplings.from_parameters(p))
        assert mean == pytest.approx(0.0, abs=1e-12)
        assert dW == pytest.approx(report.dW, rel=1e-10)


def test_eigenstate_entropies(rng):
    row = eigenstate_entropies(random_parameters(rng))
    assert set(row) == {"S_a_F", "S_c_F", "S_a_B", "S_c_B"}
    free = eigenstate_entropies(HubbardParameters(J=1.0))
    assert free["S_a_F"] == pytest.approx(2.0)
    assert free["S_c_F"] == pytest.approx(2.0)
    assert free["S_a_B"] == pytest.approx(1.5)


def test_tables_are_in_units_of_J():
    params = [HubbardParameters(J=2.0, U=u) for u in (-4.0, 0.0, 4.0)]
    entropies = eigenstate_entropy_table(params)
    np.testing.assert_allclose(entropies["U_over_J"], [-2.0, 0.0, 2.0])
    fluct = fluctuation_table(params)
    assert fluct["dN"][1] == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)))
    assert list(fluct) == ["U_over_J", "dE_phi_F", "dE_phi_B", "dN", "dW", "d_SQL_F", "d_SQL_B"]
