from __future__ import annotations

import math

import pytest
from pydantic import ValidationError

from dwhubbard.core import HBAR, LI6_MASS, DomainError
from dwhubbard.pairsolver import (
    FREE_ENERGY,
    RelativeMotionProblem,
    busch_energy,
    first_order_shift,
    onsite_U_from_pair,
    pair_sweep,
    problem_for_trap,
    solve_relative_ground,
)
from dwhubbard.potentials import ContactInteraction, JostKohnNegative, NoInteraction

from conftest import OMEGA_Z

# a_ho = d/√2
A_HO = 1.0 / math.sqrt(2.0)


def test_problem_validation():
    with pytest.raises(ValidationError):
        RelativeMotionProblem(potential=NoInteraction())
    with pytest.raises(ValidationError):
        RelativeMotionProblem(potential=NoInteraction(reduced_mass=1.0), r_max=5.0)


def test_free_pair_is_the_oscillator_ground_state():
    problem = RelativeMotionProblem(potential=NoInteraction(reduced_mass=1.0))
    solution = solve_relative_ground(problem)
    assert solution.E_rel == pytest.approx(FREE_ENERGY, abs=1e-6)
    assert solution.residual < 1e-8
    assert onsite_U_from_pair(solution, problem, "energy-shift") == pytest.approx(0.0, abs=1e-6)
    assert onsite_U_from_pair(solution, problem, "matrix-element") == 0.0


@pytest.mark.parametrize("a_s_over_a_ho, branch", [
    (-0.5, "ground"),
    (-0.1, "ground"),
    (-0.02, "ground"),
    (0.05, "trap"),
    (0.5, "trap"),
])
def test_contact_pair_matches_busch(a_s_over_a_ho, branch):
    a_s = a_s_over_a_ho * A_HO
    problem = RelativeMotionProblem(potential=ContactInteraction(a_s=a_s, reduced_mass=1.0))
    solution = solve_relative_ground(problem)
    assert solution.E_rel == pytest.approx(busch_energy(a_s, branch), abs=1e-4)
    assert (solution.E_rel < FREE_ENERGY) == (a_s < 0)
    assert solution.u0 is not None


def test_busch_branches():
    assert busch_energy(0.0) == FREE_ENERGY
    assert 0.5 < busch_energy(-0.1) < FREE_ENERGY
    assert FREE_ENERGY < busch_energy(0.1) < 2.5


def test_weak_coupling_reproduces_first_order_shift():
    a = -1e-4
    assert (busch_energy(a) - FREE_ENERGY) / first_order_shift(a) == pytest.approx(1.0, rel=1e-3)


def test_short_range_jk_agrees_with_contact():
    a_s = -0.05 * A_HO
    jk = JostKohnNegative(a_s=a_s, r0=1e-3, reduced_mass=1.0)
    solution = solve_relative_ground(RelativeMotionProblem(potential=jk))
    assert solution.E_rel == pytest.approx(busch_energy(a_s), rel=0.01)


def test_li6_pair_is_shifted_down():
    potential = JostKohnNegative(a_s=-9.54e-9, r0=1.66e-9)
    problem = problem_for_trap(potential, LI6_MASS, OMEGA_Z)
    solution = solve_relative_ground(problem)
    assert solution.E_rel < FREE_ENERGY
    assert onsite_U_from_pair(solution, problem) < 0
    assert onsite_U_from_pair(solution, problem, "matrix-element") < 0


def test_unknown_definition_is_rejected():
    problem = RelativeMotionProblem(potential=NoInteraction(reduced_mass=1.0))
    solution = solve_relative_ground(problem)
    with pytest.raises(DomainError):
        onsite_U_from_pair(solution, problem, "binding")


def test_pair_sweep_rows():
    eta = 4.0 * math.sqrt(HBAR / (LI6_MASS * OMEGA_Z))
    rows = pair_sweep([2.0, 4.0], LI6_MASS, eta, {"contact": ContactInteraction(a_s=-9.54e-9)})
    assert [row["V0_over_hbar_omega_z"] for row in rows] == [2.0, 4.0]
    assert all(row["contact"] < 0 for row in rows)
