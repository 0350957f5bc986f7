from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import linalg

from dwhubbard.core import DomainError
from dwhubbard.dvr import (
    Grid1D,
    build_hamiltonian_1d,
    calibrate_barrier,
    default_grid,
    finite_difference_doublet,
    kinetic_matrix,
    mode_interpolator,
    modes_table,
    solve_doublet,
    tunneling_matrix_element,
)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid1D(-5.0, 5.0, 32)
    with pytest.raises(DomainError):
        Grid1D(-4.0, 5.0, 128)


def test_grid_is_exactly_symmetric():
    z = Grid1D(-7.3, 7.3, 257).points()
    assert np.array_equal(z, -z[::-1])


def test_kinetic_matrix_reproduces_harmonic_levels():
    z = Grid1D(-10.0, 10.0, 201).points()
    H = kinetic_matrix(z) + np.diag(0.5 * z**2)
    levels = linalg.eigh(H, eigvals_only=True, subset_by_index=[0, 3])
    np.testing.assert_allclose(levels, [0.5, 1.5, 2.5, 3.5], atol=1e-8)


def test_doublet_modes(doublet):
    dz = doublet.spacing
    np.testing.assert_allclose(doublet.psi_s, doublet.psi_s[::-1], atol=1e-12)
    np.testing.assert_allclose(doublet.psi_a, -doublet.psi_a[::-1], atol=1e-12)
    np.testing.assert_allclose(doublet.psi_l, doublet.psi_r[::-1], atol=1e-12)
    assert np.sum(doublet.psi_l**2) * dz == pytest.approx(1.0, abs=1e-12)
    assert np.sum(doublet.psi_l * doublet.psi_r) * dz == pytest.approx(0.0, abs=1e-12)
    # Left mode lives in the left well
    left = doublet.z < 0
    assert np.sum(doublet.psi_l[left] ** 2) * dz > 0.99
    assert doublet.tight_binding
    assert doublet.J > 0


@pytest.mark.parametrize("eta_t", [3.0, 4.0])
def test_tunneling_routes_agree(eta_t):
    grid = default_grid(eta_t)
    sol = solve_doublet(grid, eta_t)
    ham = build_hamiltonian_1d(grid, eta_t)
    assert sol.J == pytest.approx(0.5 * sol.doublet_gap, rel=1e-6)
    assert tunneling_matrix_element(sol, ham) == pytest.approx(sol.J, rel=1e-9)


def test_deep_barrier_tunneling_agrees_absolutely():
    eta_t = math.sqrt(80.0)  # V0 = 10 ħω_z
    sol = solve_doublet(default_grid(eta_t), eta_t)
    assert abs(sol.J - 0.5 * sol.doublet_gap) < 1e-10


def test_grid_doubling_is_converged():
    eta_t = 3.0
    coarse = solve_doublet(default_grid(eta_t, 513), eta_t)
    fine = solve_doublet(default_grid(eta_t, 1025), eta_t)
    np.testing.assert_allclose(coarse.energies, fine.energies, atol=1e-8)


def test_finite_difference_oracle_is_close():
    eta_t = 3.0
    grid = default_grid(eta_t)
    sol = solve_doublet(grid, eta_t)
    e0, e1 = finite_difference_doublet(grid, eta_t)
    assert e0 == pytest.approx(sol.energies[0], rel=1e-2)
    assert e1 == pytest.approx(sol.energies[1], rel=1e-2)


def test_shallow_barrier_warns():
    sol = solve_doublet(default_grid(2.0), 2.0)
    assert not sol.tight_binding
    assert any("tight-binding" in w for w in sol.warnings)


def test_coarse_grid_warns():
    ham = build_hamiltonian_1d(Grid1D(-30.0, 30.0, 65), 4.0)
    assert ham.warnings


def test_doublet_rejects_small_k(doublet):
    with pytest.raises(DomainError):
        solve_doublet(default_grid(4.0), 4.0, k=1)


def test_calibrate_barrier_hits_target():
    target = 150.0 / (2.0 * math.pi * 1000.0)
    eta_t = calibrate_barrier(target, n_points=257)
    sol = solve_doublet(default_grid(eta_t, 257), eta_t)
    assert 0.5 * sol.doublet_gap == pytest.approx(target, rel=1e-8)


def test_mode_interpolator(doublet):
    psi = mode_interpolator(doublet.psi_l, doublet.z)
    np.testing.assert_allclose(psi(doublet.z[100:400]), doublet.psi_l[100:400], atol=1e-10)
    assert psi(np.array([doublet.z[0] - 1.0, doublet.z[-1] + 1.0])).tolist() == [0.0, 0.0]


def test_modes_table_columns(doublet):
    table = modes_table(doublet)
    assert list(table) == ["z", "psi_s", "psi_a", "psi_l", "psi_r"]
    assert all(len(v) == len(doublet.z) for v in table.values())
