import numpy as np
import pytest
from numpy.testing import assert_allclose

from framework.errors import IntegratorError
from models import GaugePulse, GridField, IntegratorConfig, ModeExpansion, PulsePotential, SimConfig
from services.evolution import exact_final_state, free_propagate, gauge_phase_apply
from services.oracle_integrator import continuity_residual, dump_rows, integrate, l2_distance, step_bound
from services.spectral_core import free_energy, full_energy, to_grid


def cos_pulse(cfg, amplitude=0.3) -> GaugePulse:
    return GaugePulse(cos_coeffs=[0.0, amplitude], L=cfg.L, q=cfg.q, t0=cfg.t0, t1=cfg.t1)


def packet(cfg) -> ModeExpansion:
    return ModeExpansion.from_dict(cfg.R, {(1, 1): 1 / np.sqrt(2), (1, 0): 1 / np.sqrt(2)})


@pytest.fixture
def short_cfg() -> SimConfig:
    return SimConfig(R=8, N=64, t1=0.2, tf=0.3)


def test_free_evolution_matches_mode_phases(cfg):
    x0 = packet(cfg)
    run = integrate(to_grid(x0, cfg), cos_pulse(cfg, 0.0), cfg, IntegratorConfig(dt=2e-3))
    expected = to_grid(free_propagate(x0, cfg.tf - cfg.t0, cfg), cfg).samples

    assert l2_distance(run.final[0], expected, cfg) < 1e-5
    assert run.norm_drift < 1e-12
    assert run.times[0] == cfg.t0
    assert_allclose(run.times[-1], cfg.tf, rtol=1e-14)
    assert_allclose(run.times[run.switch_index], cfg.t1, rtol=1e-14)


def test_oracle_converges_to_exact_state_at_second_order(cfg):
    pulse = cos_pulse(cfg)
    x0 = packet(cfg)
    exact = to_grid(exact_final_state(x0, pulse, cfg).state, cfg).samples

    errors = []
    for dt in (2e-3, 1e-3):
        run = integrate(to_grid(x0, cfg), pulse, cfg, IntegratorConfig(dt=dt))
        errors.append(l2_distance(run.final[0], exact, cfg))
        assert run.norm_drift < 1e-10

    assert errors[0] < 1e-4
    assert abs(errors[0] / errors[1] - 4.0) < 0.5


def test_step_bound_violation_rejected(cfg):
    pulse = cos_pulse(cfg)
    assert step_bound(pulse, cfg, 0.05) > 0.5
    with pytest.raises(IntegratorError, match="step bound"):
        integrate(to_grid(packet(cfg), cfg), pulse, cfg, IntegratorConfig(dt=0.05))


def test_gmres_and_fixed_point_agree(short_cfg):
    psi0 = to_grid(packet(short_cfg), short_cfg)
    pulse = cos_pulse(short_cfg)
    fixed = integrate(psi0, pulse, short_cfg, IntegratorConfig(dt=1e-2))
    krylov = integrate(psi0, pulse, short_cfg, IntegratorConfig(dt=1e-2, solver="gmres"))
    assert_allclose(krylov.final, fixed.final, atol=1e-9)


def test_batch_densities_are_summed(short_cfg):
    pulse = cos_pulse(short_cfg)
    icfg = IntegratorConfig(dt=1e-2)
    a = to_grid(packet(short_cfg), short_cfg)
    b = to_grid(ModeExpansion.single(short_cfg.R, -1, 3), short_cfg)
    both = integrate([a, b], pulse, short_cfg, icfg)
    runs = [integrate(f, pulse, short_cfg, icfg) for f in (a, b)]

    assert both.final.shape == (2, short_cfg.N, 2)
    assert_allclose(both.rho, runs[0].rho + runs[1].rho, atol=1e-13)
    assert_allclose(both.J, runs[0].J + runs[1].J, atol=1e-13)
    assert_allclose(continuity_residual(both, short_cfg.q, short_cfg), continuity_residual(runs, short_cfg.q, short_cfg),
                    atol=1e-12)


def test_continuity_residual_falls_at_second_order(cfg):
    pulse = cos_pulse(cfg)
    psi0 = to_grid(packet(cfg), cfg)
    residuals = [continuity_residual(integrate(psi0, pulse, cfg, IntegratorConfig(dt=dt)), cfg.q, cfg)
                 for dt in (2e-3, 1e-3)]
    assert residuals[0] < 1e-4
    assert abs(residuals[0] / residuals[1] - 4.0) < 0.5


def test_residual_needs_shared_time_grid(short_cfg):
    pulse = cos_pulse(short_cfg)
    psi0 = to_grid(packet(short_cfg), short_cfg)
    runs = [integrate(psi0, pulse, short_cfg, IntegratorConfig(dt=dt)) for dt in (1e-2, 5e-3)]
    with pytest.raises(IntegratorError):
        continuity_residual(runs, short_cfg.q, short_cfg)


def test_snapshots_and_dump(short_cfg):
    psi0 = to_grid(packet(short_cfg), short_cfg)
    run = integrate(psi0, cos_pulse(short_cfg), short_cfg, IntegratorConfig(dt=1e-2, sample_every=10),
                    times=(short_cfg.t1,))

    at_switch = run.snapshot(short_cfg.t1)
    assert len(at_switch) == 1
    assert isinstance(at_switch[0], GridField)
    with pytest.raises(KeyError):
        run.snapshot(0.123)

    rows = dump_rows(run, short_cfg)
    assert rows.shape == (len(run.snapshot_times) * short_cfg.N, 8)
    assert_allclose(rows[:short_cfg.N, 1], short_cfg.z)


def test_energy_under_pulse_potential_matches_integrator(cfg):
    pulse = cos_pulse(cfg)
    x0 = packet(cfg)
    t = 0.5 * (cfg.t0 + cfg.t1)
    pot = PulsePotential.of(pulse, cfg.z, t)

    # inside the window the exact state is the free state under the gauge phase
    free = to_grid(free_propagate(x0, t - cfg.t0, cfg), cfg)
    exact = gauge_phase_apply(free, pulse, t)
    density = np.sum(np.abs(free.samples) ** 2, axis=1)
    expected = free_energy(x0, cfg) + cfg.q * cfg.dz * np.sum(pot.A0 * density)
    assert abs(pot.A0).max() > 0.1
    assert_allclose(full_energy(exact, pot, cfg), expected, rtol=1e-10)

    run = integrate(to_grid(x0, cfg), pulse, cfg, IntegratorConfig(dt=1e-3), times=(t,))
    (state,) = run.snapshot(t)
    assert_allclose(full_energy(state, pot, cfg), expected, atol=5e-4)
