import numpy as np
import pytest

import morsekick as mk
from conftest import normalized_gaussian


def test_make_grid_spacing():
    g = mk.make_grid(-2.0, 38.0, 2048)
    assert g.dx == pytest.approx(0.01953125, abs=0.0)
    assert g.x[0] == -2.0
    assert g.x[-1] == pytest.approx(38.0 - g.dx)


def test_momentum_lattice_span():
    g = mk.make_grid(-2.0, 38.0, 2048)
    p = g.momenta
    p_max = np.pi / g.dx
    assert p_max == pytest.approx(160.8495438637974, rel=1e-13)
    assert p.max() == pytest.approx(p_max - 2 * np.pi / (g.n_points * g.dx), rel=1e-12)
    assert p.min() == pytest.approx(-p_max, rel=1e-12)
    spacing = np.diff(np.sort(p))
    assert np.allclose(spacing, 2 * np.pi / (g.n_points * g.dx), rtol=1e-12)


@pytest.mark.parametrize("n", [7, 0, 12, 100])
def test_make_grid_rejects_non_power_of_two(n):
    with pytest.raises(ValueError):
        mk.make_grid(0.0, 1.0, n)


def test_make_grid_rejects_bad_bounds():
    with pytest.raises(ValueError):
        mk.make_grid(1.0, 1.0, 16)
    with pytest.raises(ValueError):
        mk.make_grid(2.0, -2.0, 16)


def test_wavefunction_length_checked(grid_small):
    with pytest.raises(ValueError):
        mk.Wavefunction(grid_small, np.zeros(17))


def test_inner_product_normalization(ground_small):
    assert mk.inner_product(ground_small, ground_small) == pytest.approx(1.0, abs=1e-12)


def test_inner_product_orthogonality(basis_small):
    val = mk.inner_product(basis_small.states[0], basis_small.states[1])
    assert abs(val) < 1e-8


def test_inner_product_linearity(ground_small):
    doubled = mk.Wavefunction(ground_small.grid, 2.0 * ground_small.amplitudes)
    assert mk.inner_product(ground_small, doubled) == pytest.approx(2.0, abs=1e-12)


def test_inner_product_conjugate_symmetry(grid_small):
    rng = np.random.default_rng(7)
    a = mk.Wavefunction(grid_small, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    b = mk.Wavefunction(grid_small, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    assert mk.inner_product(a, b) == pytest.approx(np.conj(mk.inner_product(b, a)), abs=1e-12)


def test_inner_product_grid_mismatch(grid_small, grid_default):
    a = mk.Wavefunction(grid_small, np.zeros(1024, complex))
    b = mk.Wavefunction(grid_default, np.zeros(2048, complex))
    with pytest.raises(mk.GridMismatchError):
        mk.inner_product(a, b)


def test_norm_squared_zero_and_one(grid_small, ground_small):
    assert mk.norm_squared(mk.Wavefunction(grid_small, np.zeros(1024, complex))) == 0.0
    assert mk.norm_squared(ground_small) == pytest.approx(1.0, abs=1e-12)


def test_roundtrip_identity(grid_small):
    rng = np.random.default_rng(3)
    psi = mk.Wavefunction(grid_small, rng.normal(size=1024) + 1j * rng.normal(size=1024))
    back = mk.to_position(mk.to_momentum(psi))
    assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-12


def test_parseval(grid_small):
    rng = np.random.default_rng(11)
    for seed in range(5):
        amps = rng.normal(size=1024) + 1j * rng.normal(size=1024)
        psi = mk.Wavefunction(grid_small, amps)
        assert mk.norm_squared(mk.to_momentum(psi)) == pytest.approx(
            mk.norm_squared(psi), rel=1e-12
        )


def test_plane_wave_single_bin(grid_small):
    # A grid-commensurate plane wave occupies exactly one momentum bin.
    k_index = 37
    p0 = grid_small.momenta[k_index]
    amps = np.exp(1j * p0 * grid_small.x) / np.sqrt(grid_small.length)
    psi_p = mk.to_momentum(mk.Wavefunction(grid_small, amps))
    mags = np.abs(psi_p.amplitudes)
    assert np.argmax(mags) == k_index
    others = np.delete(mags, k_index)
    assert np.max(others) < 1e-12 * mags[k_index]


def test_gaussian_fourier_pair(grid_default):
    # Oracle: continuum Fourier transform of a Gaussian, evaluated on the
    # momentum lattice and mapped to DFT conventions.
    sigma, x0 = 1.0, 10.0
    g = grid_default
    psi = (np.pi * sigma**2) ** -0.25 * np.exp(-((g.x - x0) ** 2) / (2 * sigma**2))
    psi_p = mk.to_momentum(mk.Wavefunction(g, psi.astype(complex)))
    p = g.momenta
    analytic = (sigma**2 / np.pi) ** 0.25 * np.exp(-(p**2) * sigma**2 / 2.0)
    expected = (
        np.sqrt(2 * np.pi) / (np.sqrt(g.n_points) * g.dx)
        * np.exp(1j * p * g.x_min)
        * analytic
        * np.exp(-1j * p * x0)
    )
    assert np.max(np.abs(psi_p.amplitudes - expected)) < 1e-10
    # Width check: sigma in position maps to 1/sigma in momentum, so the
    # uncertainty product of the densities is exactly 1/2.
    sd_x = np.sqrt(np.sum((g.x - x0) ** 2 * np.abs(psi) ** 2) * g.dx)
    w = np.abs(psi_p.amplitudes) ** 2
    sd_p = np.sqrt(np.sum(p**2 * w) / np.sum(w))
    assert sd_x * sd_p == pytest.approx(0.5, rel=1e-6)


def test_operations_leave_inputs_unmodified(grid_small):
    rng = np.random.default_rng(5)
    amps = rng.normal(size=1024) + 1j * rng.normal(size=1024)
    psi = mk.Wavefunction(grid_small, amps.copy())
    other = normalized_gaussian(grid_small, 5.0, 1.0)
    mk.to_momentum(psi)
    mk.inner_product(psi, other)
    mk.norm_squared(psi)
    mk.expectation_x(psi)
    mk.expectation_p(psi)
    assert np.array_equal(psi.amplitudes, amps)
