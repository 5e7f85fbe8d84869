import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from framework.errors import ConditionError, CutoffError
from models import GaugePulse, ModeExpansion, PositivePacket, SimConfig, VacuumSet
from services.hole_theory import (
    absolute_lambdas,
    chi_from_current,
    current_derivative,
    cutoff_scan,
    fit_line,
    free_current_profile,
    ht_energy_sweep,
    packet_single_mode,
    packet_two_mode,
    pauli_orthogonality_check,
    sea_and_packet,
    slope_integral,
    two_mode_current,
    two_mode_current_derivative,
    vacuum_energy_shift,
    zero_crossing,
)


@pytest.mark.parametrize("r, s", [(1, 0), (2, -1), (-3, 1)])
def test_two_mode_current_closed_form(cfg, r, s):
    p = packet_two_mode(r, s, cfg)
    assert_allclose(free_current_profile(p, cfg.t1, cfg), two_mode_current(r, s, cfg.t1, cfg, cfg.z), atol=1e-13)
    assert_allclose(current_derivative(p, cfg.t1, cfg), two_mode_current_derivative(r, s, cfg.t1, cfg, cfg.z),
                    atol=1e-12)


def test_degenerate_packets_rejected(cfg):
    with pytest.raises(ConditionError):
        packet_two_mode(2, 2, cfg)
    with pytest.raises(CutoffError):
        packet_two_mode(cfg.R + 1, 0, cfg)
    with pytest.raises(ConditionError, match="unsatisfiable"):
        chi_from_current(packet_single_mode(1, cfg), 1.0, cfg.t1, cfg)


def test_packet_must_be_normalized():
    with pytest.raises(ValidationError):
        PositivePacket(f=[0.0, 1.0, 1.0])


def test_packet_resized_keeps_support(cfg):
    p = packet_two_mode(2, -1, cfg)
    wide = p.resized(12)
    assert wide.R == 12
    assert sorted(wide.support.tolist()) == [-1, 2]
    with pytest.raises(CutoffError):
        p.resized(1)


def test_unperturbed_sea_energy(cfg):
    sea = VacuumSet(R=cfg.R)
    assert sea.orbitals().shape == (2 * cfg.R + 1, 2, 2 * cfg.R + 1)
    assert_allclose(sea.unperturbed_energy(cfg.energy(sea.r)), -np.sum(cfg.energy(sea.r)), rtol=1e-15)


def test_derived_pulse_profile_is_minus_lambda_dJ(cfg):
    p = packet_two_mode(1, 0, cfg)
    pulse = chi_from_current(p, 3.0, cfg.t1, cfg)
    assert_allclose(pulse.chi(cfg.z, cfg.t1), -3.0 * current_derivative(p, cfg.t1, cfg), atol=1e-12)


@pytest.mark.parametrize("route", ["formula", "direct"])
def test_vacuum_orbitals_do_not_shift(sweep_cfg, route):
    p = packet_two_mode(1, 0, sweep_cfg)
    lam = absolute_lambdas(p, [2.0], "slope", sweep_cfg)[0]
    shift = vacuum_energy_shift(chi_from_current(p, lam, sweep_cfg.t1, sweep_cfg), sweep_cfg, route=route)
    assert shift.per_mode.shape == (2 * sweep_cfg.R + 1,)
    assert shift.max_abs < 1e-10


def test_sweep_follows_straight_line_below_vacuum(sweep_cfg):
    p = packet_two_mode(1, 0, sweep_cfg)
    slope = slope_integral(p, sweep_cfg)
    lambdas = absolute_lambdas(p, [0.0, 1.0, 2.0], "slope", sweep_cfg)
    reports = ht_energy_sweep(p, lambdas, sweep_cfg)

    packet_energy = 0.5 * (sweep_cfg.energy(1) + sweep_cfg.energy(0))
    assert_allclose(reports[0].E_TR_t0, packet_energy, rtol=1e-12)
    assert_allclose(reports[0].E_TR_tf, packet_energy, atol=1e-10)
    for rep in reports:
        assert rep.abs_diff < 1e-8
        assert rep.identity_residual < 1e-10
        assert abs(rep.dE_hvac) < 1e-9
    assert reports[-1].E_TR_tf < 0

    fitted, _ = fit_line(reports)
    assert_allclose(fitted, -slope, rtol=1e-6)
    assert_allclose(zero_crossing(reports), packet_energy / slope, rtol=1e-6)


def test_sea_and_packet_stay_orthonormal(sweep_cfg):
    p = packet_two_mode(1, 0, sweep_cfg)
    lam = absolute_lambdas(p, [2.0], "slope", sweep_cfg)[0]
    states = sea_and_packet(p, sweep_cfg)
    assert len(states) == 2 * sweep_cfg.R + 2
    pulse = chi_from_current(p, lam, sweep_cfg.t1, sweep_cfg)
    assert pauli_orthogonality_check(states, pulse, sweep_cfg) < 1e-9


def test_relative_energy_independent_of_sea_cutoff(sweep_cfg):
    p = packet_two_mode(1, 0, sweep_cfg)
    lam = absolute_lambdas(p, [2.0], "slope", sweep_cfg)[0]
    scan = cutoff_scan(p, lam, [4, 8], sweep_cfg)
    assert [R for R, _ in scan] == [4, 8]
    energies = [rep.E_TR_tf for _, rep in scan]
    assert_allclose(energies[0], energies[1], atol=1e-9)


def test_zero_lambda_pulse_is_trivial(cfg):
    p = packet_two_mode(1, 0, cfg)
    pulse = chi_from_current(p, 0.0, cfg.t1, cfg)
    assert isinstance(pulse, GaugePulse)
    assert pulse.is_zero


def test_sweep_energy_is_relative_to_the_sea_at_large_cutoff():
    big = SimConfig(R=32, N=256)
    p = packet_two_mode(1, 0, big)
    (report,) = ht_energy_sweep(p, [0.0], big)
    # the sea alone sums to about -1e3 here
    assert abs(report.E_TR_tf - report.E_TR_t0) < 1e-12
    assert abs(report.dE_hvac) < 1e-12
    assert report.identity_residual < 1e-14


def test_orthogonality_check_keeps_input_overlap(cfg):
    theta = 1.0
    a = ModeExpansion.single(cfg.R, 1, 0)
    b = ModeExpansion.from_dict(cfg.R, {(1, 0): np.cos(theta), (1, 1): np.sin(theta)})
    pulse = GaugePulse(cos_coeffs=[0.0, 0.3], L=cfg.L, q=cfg.q, t0=cfg.t0, t1=cfg.t1)
    assert_allclose(pauli_orthogonality_check([a, b], pulse, cfg), np.cos(theta), atol=1e-9)
