"""
Closed-form evolution under a gauge-type pulse.

For a potential of the form (A0, Az) = (d chi/dt, -d chi/dz) switched on at t0
and off at t1 the solution is

    psi(tf) = exp(-i H0 (tf - t1)) exp(-i q chi(z, t1)) exp(-i H0 (t1 - t0)) psi(t0)

Free propagation is diagonal in the mode basis. The gauge phase is applied
pointwise on the grid and projected back onto the evolution band, with the
discarded norm reported as leakage.
"""
import logging
from typing import Tuple

import numpy as np

from framework.errors import LeakageError
from models.config import PulseSection, SimConfig
from models.fields import GridField, ModeExpansion
from models.pulse import GaugePulse
from models.reports import EvolutionResult
from services.spectral_core import (
    analyze,
    apply_h0,
    coefficients_from_amplitudes,
    densities,
    free_energy,
    quadrature,
    sigma_x,
    signed_energies,
    spectral_derivative,
    spinor_amplitudes,
    spinor_table,
    synthesize,
)

logger = logging.getLogger(__name__)


def build_pulse(section: PulseSection, cfg: SimConfig) -> GaugePulse:
    """Harmonic pulse described by the run configuration"""
    pulse = GaugePulse(
        cos_coeffs=section.cos or [0.0],
        sin_coeffs=section.sin or [0.0],
        L=cfg.L,
        q=cfg.q,
        t0=cfg.t0,
        t1=cfg.t1,
        envelope=section.envelope,
    )
    pulse.check_band(cfg.R)
    return pulse


def free_propagate(x: ModeExpansion, dt: float, cfg: SimConfig) -> ModeExpansion:
    """c_{lam,r} -> c_{lam,r} exp(-i lam E_r dt)"""
    phases = np.exp(-1j * signed_energies(cfg, x.R) * dt)
    return ModeExpansion(coeffs=x.coeffs * phases)


def grid_points(f: GridField) -> np.ndarray:
    return -0.5 * f.L + f.L / f.N * np.arange(f.N)


def gauge_phase_apply(f: GridField, pulse: GaugePulse, t: float) -> GridField:
    """psi(z_j) -> exp(-i q chi(z_j, t)) psi(z_j)"""
    phase = np.exp(-1j * pulse.q * pulse.chi(grid_points(f), t))
    return GridField(samples=f.samples * phase[:, None], L=f.L)


def exact_final_batch(coeffs: np.ndarray, pulse: GaugePulse, cfg: SimConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact propagator applied to a stack of states.

    coeffs has shape (M, 2, 2R+1); the result has shape (M, 2, 2Re+1) with
    Re = cfg.evolution_cutoff, together with the leakage of each state.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    R = (coeffs.shape[-1] - 1) // 2
    cutoff = cfg.evolution_cutoff

    before = np.exp(-1j * signed_energies(cfg, R) * (cfg.t1 - cfg.t0))
    table = _spinor_amplitude_stack(coeffs * before, cfg)
    psi_t1 = synthesize(table, cfg)

    phase = np.exp(-1j * pulse.q * pulse.chi(cfg.z, cfg.t1))
    amplitudes, leakage = analyze(psi_t1 * phase[:, None], cfg, cutoff)
    projected = coefficients_from_amplitudes(amplitudes, cfg)

    after = np.exp(-1j * signed_energies(cfg, cutoff) * (cfg.tf - cfg.t1))
    return projected * after, np.atleast_1d(leakage)


def _spinor_amplitude_stack(coeffs: np.ndarray, cfg: SimConfig) -> np.ndarray:
    R = (coeffs.shape[-1] - 1) // 2
    return np.einsum("mlr,lrc->mrc", coeffs, spinor_table(cfg, R))


def check_leakage(leakage: np.ndarray, cfg: SimConfig, detail: str = "") -> float:
    worst = float(np.max(leakage)) if np.size(leakage) else 0.0
    if worst > cfg.leakage_tol:
        raise LeakageError(worst, cfg.leakage_tol, detail or f"raise N (now {cfg.N}) or weaken the pulse")
    if worst > 0.1 * cfg.leakage_tol:
        logger.warning(f"Projection leakage {worst:.3e} is within a factor 10 of the budget {cfg.leakage_tol:.1e}")
    return worst


def exact_final_state(x0: ModeExpansion, pulse: GaugePulse, cfg: SimConfig) -> EvolutionResult:
    """State at tf on the evolution band, plus the norm the projection discarded"""
    coeffs, leakage = exact_final_batch(x0.coeffs[None], pulse, cfg)
    worst = check_leakage(leakage, cfg)
    logger.debug(f"Exact propagation to tf={cfg.tf}: leakage {worst:.3e}")
    return EvolutionResult(state=ModeExpansion(coeffs=coeffs[0]), leakage=worst)


def energy_shift_formula(x0: ModeExpansion, pulse: GaugePulse, cfg: SimConfig) -> float:
    """
    q * integral of chi(z, t1) d/dz (psi0^dagger sigma_x psi0) over z, where psi0 is x0
    freely evolved to t1. Equals the change of the free energy across the pulse.
    """
    psi = synthesize(spinor_amplitudes(x0, cfg, cfg.t1 - cfg.t0), cfg)
    _, current = densities(psi, pulse.q)
    integrand = pulse.chi(cfg.z, cfg.t1) * spectral_derivative(current, cfg)
    return float(quadrature(integrand, cfg))


def energy_shift_direct(x0: ModeExpansion, pulse: GaugePulse, cfg: SimConfig) -> float:
    """free_energy(exact_final_state(x0)) - free_energy(x0)"""
    result = exact_final_state(x0, pulse, cfg)
    return free_energy(result.state, cfg) - free_energy(x0, cfg)


def gauge_identity_residual(f: GridField, pulse: GaugePulse, t: float, cfg: SimConfig) -> float:
    """
    Largest pointwise deviation between exp(iq chi) H0 exp(-iq chi) psi and
    (H0 - q sigma_x d chi/dz) psi on the grid.
    """
    conjugated = gauge_phase_apply(apply_h0(gauge_phase_apply(f, pulse, t), cfg), pulse.scaled(-1.0), t)
    shifted = apply_h0(f, cfg).samples - pulse.q * pulse.dchi_dz(cfg.z, t)[:, None] * sigma_x(f.samples)
    return float(np.max(np.abs(conjugated.samples - shifted)))
