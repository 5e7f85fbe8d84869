import numpy as np
import pytest
from numpy.testing import assert_allclose

from framework.errors import ConditionError, CutoffError, LeakageError
from models import GaugePulse, ModeExpansion, PulseSection
from services.evolution import (
    build_pulse,
    energy_shift_direct,
    energy_shift_formula,
    exact_final_batch,
    exact_final_state,
    free_propagate,
    gauge_identity_residual,
)
from services.spectral_core import free_energy, to_grid


def cos_pulse(cfg, amplitude=0.3, envelope="sin2") -> GaugePulse:
    return GaugePulse(cos_coeffs=[0.0, amplitude], L=cfg.L, q=cfg.q, t0=cfg.t0, t1=cfg.t1, envelope=envelope)


def packet(cfg) -> ModeExpansion:
    return ModeExpansion.from_dict(cfg.R, {(1, 1): 1 / np.sqrt(2), (1, 0): 1 / np.sqrt(2)})


def test_zero_pulse_is_free_evolution(cfg):
    x0 = packet(cfg)
    result = exact_final_state(x0, cos_pulse(cfg, 0.0), cfg)
    free = free_propagate(x0, cfg.tf - cfg.t0, cfg).embed(cfg.evolution_cutoff)

    assert result.leakage < 1e-24
    assert_allclose(result.state.coeffs, free.coeffs, atol=1e-14)


def test_pulse_keeps_norm_on_evolution_band(cfg):
    result = exact_final_state(packet(cfg), cos_pulse(cfg), cfg)
    assert result.state.R == cfg.evolution_cutoff
    assert_allclose(result.state.norm_sq() + result.leakage, 1.0, atol=1e-13)


@pytest.mark.parametrize("envelope", ["sin2", "smoothstep"])
def test_energy_shift_routes_agree(cfg, envelope):
    x0 = packet(cfg)
    pulse = cos_pulse(cfg, envelope=envelope)
    formula = energy_shift_formula(x0, pulse, cfg)

    assert abs(formula) > 1e-3
    assert_allclose(energy_shift_direct(x0, pulse, cfg), formula, atol=1e-10)


def test_final_state_does_not_depend_on_envelope(cfg):
    x0 = packet(cfg)
    a = exact_final_state(x0, cos_pulse(cfg, envelope="sin2"), cfg)
    b = exact_final_state(x0, cos_pulse(cfg, envelope="smoothstep"), cfg)
    assert_allclose(a.state.coeffs, b.state.coeffs, atol=1e-14)


def test_single_negative_mode_energy_unchanged(cfg):
    x0 = ModeExpansion.single(cfg.R, -1, cfg.R)
    result = exact_final_state(x0, cos_pulse(cfg), cfg)
    assert_allclose(free_energy(result.state, cfg), free_energy(x0, cfg), atol=1e-12)


def test_batch_matches_single_states(cfg):
    pulse = cos_pulse(cfg)
    states = [packet(cfg), ModeExpansion.single(cfg.R, -1, 2)]
    batch, leakage = exact_final_batch(np.stack([x.coeffs for x in states]), pulse, cfg)
    for x, coeffs, leak in zip(states, batch, leakage):
        single = exact_final_state(x, pulse, cfg)
        assert_allclose(coeffs, single.state.coeffs, atol=1e-14)
        assert_allclose(leak, single.leakage, atol=1e-20)


def test_gauge_identity_on_grid(cfg):
    f = to_grid(packet(cfg), cfg)
    assert gauge_identity_residual(f, cos_pulse(cfg), cfg.t1, cfg) < 1e-9


def test_strong_pulse_raises_leakage_error(cfg):
    with pytest.raises(LeakageError) as err:
        exact_final_state(packet(cfg), cos_pulse(cfg, amplitude=30.0), cfg)
    assert err.value.leakage > err.value.threshold


def test_pulse_harmonics_beyond_cutoff_rejected(cfg):
    with pytest.raises(CutoffError):
        build_pulse(PulseSection(cos=[0.0] * (cfg.R + 1) + [0.1]), cfg)


def test_pulse_from_profile_recovers_harmonics(cfg):
    pulse = GaugePulse(cos_coeffs=[0.1, 0.0, 0.2], sin_coeffs=[0.0, -0.4], L=cfg.L)
    fitted = GaugePulse.from_profile(pulse.profile, L=cfg.L, N=cfg.N, max_harmonic=cfg.R)
    assert_allclose(fitted.cos_coeffs, pulse.cos_coeffs, atol=1e-14)
    assert_allclose(fitted.sin_coeffs, pulse.sin_coeffs, atol=1e-14)


def test_pulse_from_non_periodic_profile_rejected(cfg):
    with pytest.raises(ConditionError) as err:
        GaugePulse.from_profile(lambda z: z, L=cfg.L, N=cfg.N, max_harmonic=cfg.R)
    assert "periodic" in str(err.value)
