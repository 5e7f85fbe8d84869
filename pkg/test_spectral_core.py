import numpy as np
import pytest
from numpy.testing import assert_allclose

from framework.errors import CutoffError
from models import GridField, ModeExpansion, PulsePotential
from services.spectral_core import (
    apply_h0,
    charge_current_density,
    free_energy,
    full_energy,
    grid_free_energy,
    inner_product,
    make_mode,
    spectral_derivative,
    spinors,
    to_grid,
    to_modes,
)

SIGMA_X = np.array([[0, 1], [1, 0]])
SIGMA_Z = np.array([[1, 0], [0, -1]])


@pytest.mark.parametrize("r", [-3, -1, 0, 2, 8])
def test_spinors_are_orthogonal_eigenvectors(cfg, r):
    u_plus, u_minus = (u[0] for u in spinors(cfg, [r]))
    p, E = float(cfg.momentum(r)), float(cfg.energy(r))
    h = p * SIGMA_X + cfg.m * SIGMA_Z

    assert_allclose(h @ u_plus, E * u_plus, atol=1e-14)
    assert_allclose(h @ u_minus, -E * u_minus, atol=1e-14)
    assert_allclose(np.vdot(u_plus, u_plus).real, 1 / cfg.L, rtol=1e-14)
    assert_allclose(np.vdot(u_minus, u_minus).real, 1 / cfg.L, rtol=1e-14)
    assert abs(np.vdot(u_plus, u_minus)) < 1e-15


def test_negative_spinor_at_zero_momentum(cfg):
    _, u_minus = spinors(cfg, [0])
    assert_allclose(u_minus[0], [0.0, 1 / np.sqrt(cfg.L)])


def test_single_mode_on_grid_is_plane_wave(cfg):
    mode = make_mode(3, -1, cfg)
    f = to_grid(ModeExpansion.single(cfg.R, -1, 3), cfg, t=0.4)
    expected = mode.u[None, :] * np.exp(-1j * (mode.eps0 * 0.4 - mode.p * cfg.z))[:, None]
    assert_allclose(f.samples, expected, atol=1e-13)


def test_grid_and_modes_agree(cfg):
    x = ModeExpansion.from_dict(cfg.R, {(1, 1): 0.6, (1, 0): 0.48j, (-1, -2): 0.64})
    f = to_grid(x, cfg)
    back, leakage = to_modes(f, cfg)

    assert leakage < 1e-24
    assert_allclose(back.coeffs, x.coeffs, atol=1e-13)
    assert_allclose(f.norm_sq(), x.norm_sq(), rtol=1e-13)
    y = ModeExpansion.single(cfg.R, 1, 1)
    assert_allclose(inner_product(to_grid(y, cfg), f), inner_product(y, x), atol=1e-13)


def test_gauge_phase_pushes_norm_out_of_band(cfg):
    f = to_grid(ModeExpansion.single(cfg.R, 1, 1), cfg)
    phase = np.exp(-3j * np.cos(2 * np.pi * cfg.z / cfg.L))
    shifted = GridField(samples=f.samples * phase[:, None], L=cfg.L)
    x, leakage = to_modes(shifted, cfg)

    assert leakage > 1e-8
    assert x.norm_sq() < 1.0
    assert_allclose(x.norm_sq() + leakage, shifted.norm_sq(), rtol=1e-12)


def test_free_energy_routes_agree(cfg):
    x = ModeExpansion.from_dict(cfg.R, {(1, 1): 0.8, (-1, 3): 0.6})
    expected = 0.64 * cfg.energy(1) - 0.36 * cfg.energy(3)
    assert_allclose(free_energy(x, cfg), expected, rtol=1e-13)
    assert_allclose(grid_free_energy(to_grid(x, cfg), cfg), expected, rtol=1e-12)


def test_h0_on_mode_gives_signed_energy(cfg):
    f = to_grid(ModeExpansion.single(cfg.R, -1, 2), cfg)
    assert_allclose(apply_h0(f, cfg).samples, -cfg.energy(2) * f.samples, atol=1e-12)


def test_constant_scalar_potential_shifts_energy(cfg):
    f = to_grid(ModeExpansion.single(cfg.R, 1, 1), cfg)
    shifted = full_energy(f, PulsePotential.constant(cfg.z, a0=0.25), cfg)
    assert_allclose(shifted - grid_free_energy(f, cfg), cfg.q * 0.25, rtol=1e-12)


def test_single_mode_densities_are_uniform(cfg):
    f = to_grid(ModeExpansion.single(cfg.R, 1, 2), cfg)
    rho, J = charge_current_density(f, cfg.q)
    p, E = cfg.momentum(2), cfg.energy(2)
    assert_allclose(rho, cfg.q / cfg.L, rtol=1e-12)
    # velocity p/E
    assert_allclose(J, cfg.q * p / (E * cfg.L), rtol=1e-12)


def test_spectral_derivative_of_harmonic(cfg):
    values = np.sin(3 * 2 * np.pi * cfg.z / cfg.L)
    expected = 3 * 2 * np.pi / cfg.L * np.cos(3 * 2 * np.pi * cfg.z / cfg.L)
    assert_allclose(spectral_derivative(values, cfg), expected, atol=1e-12)


def test_mode_outside_cutoff_rejected(cfg):
    with pytest.raises(CutoffError):
        make_mode(cfg.R + 1, 1, cfg)
    with pytest.raises(CutoffError):
        ModeExpansion.from_dict(cfg.R, {(1, cfg.R + 1): 1.0})


def test_grid_of_wrong_size_rejected(cfg):
    with pytest.raises(CutoffError):
        to_modes(GridField(samples=np.zeros((32, 2)), L=cfg.L), cfg)
