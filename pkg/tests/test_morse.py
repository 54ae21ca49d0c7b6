import math

import numpy as np
import pytest

import morsekick as mk

HF = mk.MOLECULES["hf"]


def test_derived_constants_oracle():
    # One-line arithmetic oracle for the HF preset.
    b = 1.1741 / math.sqrt(2.0 * 1744.59 * 0.225)
    assert HF.B == pytest.approx(b, rel=1e-14)
    assert b == pytest.approx(0.0419037, rel=1e-5)
    assert HF.omega_e == pytest.approx(2.0 * b * 0.225, rel=1e-14)
    assert HF.omega_e == pytest.approx(0.0188567, rel=1e-5)
    assert HF.j == pytest.approx(1.0 / b - 0.5, rel=1e-14)
    assert HF.n_bound == 24


def test_omega_identity_exact():
    # hbar*omega_e = 2*B*De holds exactly as computed.
    assert HF.omega_e == 2.0 * HF.B * HF.De


def test_params_validation():
    with pytest.raises(ValueError):
        mk.MorseParams(m=-1.0, De=0.2, beta=1.0)
    with pytest.raises(ValueError):
        mk.MorseParams(m=10.0, De=0.2, beta=0.0)
    # B >= 2 means no bound state at all
    with pytest.raises(ValueError):
        mk.MorseParams(m=1.0, De=0.01, beta=5.0)


def test_potential_well_bottom_and_threshold():
    assert mk.morse_potential(HF, 0.0) == pytest.approx(-HF.De, abs=0.0)
    assert mk.morse_potential(HF, 1e3) == pytest.approx(0.0, abs=1e-12)
    assert mk.morse_potential(HF, np.inf if False else 50.0) == pytest.approx(0.0, abs=1e-12)


def test_potential_point_value():
    # Direct evaluation of the potential formula at x = 1 bohr.
    expected = -0.225 + 0.225 * (1.0 - math.exp(-1.1741)) ** 2
    assert expected == pytest.approx(-0.117597, rel=1e-5)
    assert mk.morse_potential(HF, 1.0) == pytest.approx(expected, rel=1e-14)


def test_analytic_energy_values():
    # E_n = we*(n+1/2)*(1 - B*(n+1/2)/2) - De, frozen from the formula.
    we, b, de = HF.omega_e, HF.B, HF.De
    e0 = we * 0.5 * (1 - b * 0.25) - de
    assert mk.analytic_energy(HF, 0) == pytest.approx(e0, rel=1e-14)
    assert e0 == pytest.approx(-0.2156704, rel=1e-6)
    gap = mk.analytic_energy(HF, 1) - mk.analytic_energy(HF, 0)
    assert gap == pytest.approx(we * (1 - b), rel=1e-12)
    assert gap == pytest.approx(0.0180665, rel=1e-5)


def test_analytic_energy_out_of_spectrum():
    top = math.floor(HF.j)
    mk.analytic_energy(HF, top)  # valid
    with pytest.raises(ValueError):
        mk.analytic_energy(HF, top + 1)
    with pytest.raises(ValueError):
        mk.analytic_energy(HF, -1)


def test_bound_state_count_and_energies(hf, basis_default):
    assert basis_default.n_states == 24
    energies = np.asarray(basis_default.energies)
    assert np.all(np.diff(energies) > 0)
    assert np.all(energies < 0)
    assert energies[0] == pytest.approx(-0.2156704, rel=1e-6)
    for n in range(21):
        assert abs(energies[n] - mk.analytic_energy(hf, n)) < 1e-6
    for n in range(21, 24):
        assert abs(energies[n] - mk.analytic_energy(hf, n)) < 1e-4


def test_bound_states_orthonormal(basis_default):
    mat = basis_default.state_matrix
    overlap = mat.conj() @ mat.T * basis_default.grid.dx
    assert np.max(np.abs(overlap - np.eye(24))) < 1e-8
    assert abs(mk.inner_product(basis_default.states[5], basis_default.states[7])) < 1e-8


def test_ground_state_nodeless(basis_default):
    amps = basis_default.states[0].amplitudes.real
    significant = amps[np.abs(amps) > 1e-8 * np.max(np.abs(amps))]
    assert np.all(significant > 0) or np.all(significant < 0)


def test_excited_state_node_count(basis_default):
    # Oscillation theorem: state nu has nu sign changes.
    amps = basis_default.states[3].amplitudes.real
    significant = amps[np.abs(amps) > 1e-6 * np.max(np.abs(amps))]
    assert int(np.sum(np.diff(np.sign(significant)) != 0)) == 3


def test_negative_count_matches_formula(hf, grid_default):
    h = mk.morse.kinetic_matrix(grid_default, hf.m)
    h[np.diag_indices_from(h)] += mk.morse_potential(hf, grid_default.x)
    import scipy.linalg as sla

    w = sla.eigh(h, eigvals_only=True)
    assert int(np.sum(w < 0)) == hf.n_bound


def test_grid_too_small_raises(hf):
    with pytest.raises(mk.GridTooSmallError):
        mk.solve_bound_states(hf, mk.make_grid(-2.0, 6.0, 256))


def test_presets_exist():
    for name in ("hf", "hcl", "h2"):
        params = mk.MOLECULES[name]
        assert params.n_bound >= 1
        assert 0 < params.B < 2
