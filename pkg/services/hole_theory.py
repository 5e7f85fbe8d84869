"""
Hole-theory bookkeeping: the filled negative-energy sea, an added positive-energy
packet, their energies relative to the unperturbed sea, and the pulse sweep that
drives the relative energy below zero.
"""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from framework.errors import ConditionError, CutoffError
from models.config import SimConfig
from models.fields import ModeExpansion, PositivePacket, VacuumSet
from models.pulse import GaugePulse
from models.reports import HTEnergyReport, VacuumShift
from services.evolution import check_leakage, exact_final_batch
from services.spectral_core import (
    densities,
    quadrature,
    signed_energies,
    spectral_derivative,
    spinor_amplitudes,
    spinor_table,
    spinors,
    synthesize,
)

logger = logging.getLogger(__name__)


def packet_two_mode(r: int, s: int, cfg: SimConfig) -> PositivePacket:
    """(phi_{+1,r} + phi_{+1,s}) / sqrt(2)"""
    if r == s:
        raise ConditionError(f"two-mode packet needs distinct modes, got r = s = {r}")
    for idx in (r, s):
        if abs(idx) > cfg.R:
            raise CutoffError(f"mode r={idx} outside cutoff R={cfg.R}")
    f = np.zeros(2 * cfg.R + 1, dtype=complex)
    f[[r + cfg.R, s + cfg.R]] = 1 / np.sqrt(2)
    return PositivePacket(f=f)


def packet_single_mode(r: int, cfg: SimConfig) -> PositivePacket:
    if abs(r) > cfg.R:
        raise CutoffError(f"mode r={r} outside cutoff R={cfg.R}")
    f = np.zeros(2 * cfg.R + 1, dtype=complex)
    f[r + cfg.R] = 1.0
    return PositivePacket(f=f)


# free current of the packet

def free_current_profile(p: PositivePacket, t1: float, cfg: SimConfig) -> np.ndarray:
    """J(z_j, t1) of the freely evolved packet (packet amplitudes are given at t0)"""
    psi = synthesize(spinor_amplitudes(p.expansion(), cfg, t1 - cfg.t0), cfg)
    return densities(psi, cfg.q)[1]


def current_derivative(p: PositivePacket, t1: float, cfg: SimConfig) -> np.ndarray:
    return spectral_derivative(free_current_profile(p, t1, cfg), cfg)


def _two_mode_terms(r: int, s: int, t1: float, cfg: SimConfig, z) -> Tuple[float, float, np.ndarray]:
    # u_{+1} = N (1, a) with a = p/(E+m)
    u_plus, _ = spinors(cfg, [r, s])
    (n_r, nu_r), (n_s, nu_s) = u_plus.real
    flat = n_r * nu_r + n_s * nu_s
    slope = n_r * n_s * (nu_s / n_s + nu_r / n_r)
    dp = float(cfg.momentum(r) - cfg.momentum(s))
    dE = float(cfg.energy(r) - cfg.energy(s))
    phase = dE * (t1 - cfg.t0) - dp * np.asarray(z, dtype=float)
    return flat, slope, phase


def two_mode_current(r: int, s: int, t1: float, cfg: SimConfig, z) -> np.ndarray:
    """
    Closed form of the two-mode packet current:
    q/2 (u_r^+ sx u_r + u_s^+ sx u_s + 2 N_r N_s (p_s/(E_s+m) + p_r/(E_r+m)) cos((E_r-E_s)t - (p_r-p_s)z))
    """
    flat, slope, phase = _two_mode_terms(r, s, t1, cfg, z)
    return cfg.q * (flat + slope * np.cos(phase))


def two_mode_current_derivative(r: int, s: int, t1: float, cfg: SimConfig, z) -> np.ndarray:
    """q (p_r - p_s) N_r N_s (p_s/(E_s+m) + p_r/(E_r+m)) sin((E_r-E_s)t - (p_r-p_s)z)"""
    _, slope, phase = _two_mode_terms(r, s, t1, cfg, z)
    dp = float(cfg.momentum(r) - cfg.momentum(s))
    return cfg.q * dp * slope * np.sin(phase)


def slope_integral(p: PositivePacket, cfg: SimConfig) -> float:
    """Integral of (dJ/dz)^2 at t1; the sweep line falls with this slope"""
    return float(quadrature(current_derivative(p, cfg.t1, cfg) ** 2, cfg))


def chi_from_current(p: PositivePacket, lambda_strength: float, t1: float, cfg: SimConfig,
                     envelope: str = "sin2") -> GaugePulse:
    """Pulse whose profile at t1 is -lambda dJ/dz of the freely evolved packet"""
    derivative = current_derivative(p, t1, cfg)
    scale = float(np.max(np.abs(free_current_profile(p, t1, cfg)))) + abs(cfg.q)
    if np.max(np.abs(derivative)) <= 1e-12 * scale:
        raise ConditionError("condition dJ/dz != 0 unsatisfiable: the packet current is flat at t1 "
                             f"(support r = {p.support.tolist()})")
    return GaugePulse.from_profile(
        -lambda_strength * derivative,
        L=cfg.L,
        N=cfg.N,
        max_harmonic=cfg.R,
        q=cfg.q,
        t0=cfg.t0,
        t1=cfg.t1,
        envelope=envelope,
    )


def absolute_lambdas(p: PositivePacket, lambdas: Sequence[float], units: str, cfg: SimConfig) -> List[float]:
    if units == "absolute":
        return [float(lam) for lam in lambdas]
    integral = slope_integral(p, cfg)
    return [float(lam) / integral for lam in lambdas]


# the sea

def vacuum_energy_shift(pulse: GaugePulse, cfg: SimConfig, route: str = "formula") -> VacuumShift:
    """
    Free-energy change of every occupied negative-energy orbital across the pulse.

    route="formula" integrates chi(z, t1) against the derivative of each orbital's
    current; route="direct" compares free energies before and after exact evolution.
    """
    sea = VacuumSet(R=cfg.R)
    orbitals = sea.orbitals()
    if route == "formula":
        amplitudes = np.einsum("mlr,lrc->mrc", orbitals, spinor_table(cfg, cfg.R))
        _, current = densities(synthesize(amplitudes, cfg), pulse.q)
        integrand = pulse.chi(cfg.z, cfg.t1) * spectral_derivative(current, cfg)
        per_mode = quadrature(integrand, cfg)
    elif route == "direct":
        final, leakage = exact_final_batch(orbitals, pulse, cfg)
        check_leakage(leakage, cfg, "vacuum orbitals")
        before = _stack_energies(orbitals, cfg)
        per_mode = _stack_energies(final, cfg) - before
    else:
        raise ValueError(f"unknown route '{route}'")
    total = math.fsum(per_mode)
    logger.debug(f"Vacuum shift ({route}): max |d eps| = {np.max(np.abs(per_mode)):.3e}, total {total:.3e}")
    return VacuumShift(r=sea.r, per_mode=np.asarray(per_mode, dtype=float), total=total)


def _stack_energies(coeffs: np.ndarray, cfg: SimConfig) -> np.ndarray:
    R = (coeffs.shape[-1] - 1) // 2
    return np.sum(signed_energies(cfg, R) * np.abs(coeffs) ** 2, axis=(-2, -1))


# the sweep

def ht_energy_point(p: PositivePacket, pulse: GaugePulse, lam: float, slope: float, cfg: SimConfig) -> HTEnergyReport:
    """Evolve the packet and every sea orbital under one pulse and assemble the relative energies"""
    sea = VacuumSet(R=cfg.R)
    packet = p.expansion(cfg.R)
    stack = np.concatenate([packet.coeffs[None], sea.orbitals()])
    final, leakage = exact_final_batch(stack, pulse, cfg)
    worst = check_leakage(leakage, cfg, f"lambda={lam:.6g}")

    before = _stack_energies(stack, cfg)
    after = _stack_energies(final, cfg)
    E_TR_t0 = float(before[0])
    d_xi_fp = float(after[0] - before[0])
    dE_hvac = math.fsum(after[1:] - before[1:])
    # relative to the unperturbed sea, orbital by orbital: no difference of two large totals
    E_TR_tf = float(after[0]) + dE_hvac
    return HTEnergyReport(
        lam=lam,
        E_TR_t0=E_TR_t0,
        dE_hvac=dE_hvac,
        d_xi_fp=d_xi_fp,
        E_TR_tf=E_TR_tf,
        predicted=E_TR_t0 - lam * slope,
        leakage=worst,
    )


def ht_energy_sweep(p: PositivePacket, lambdas: Sequence[float], cfg: SimConfig,
                    envelope: str = "sin2") -> List[HTEnergyReport]:
    """
    Relative energy of sea plus packet after the pulse chi(z, t1) = -lambda dJ/dz,
    for each (absolute) lambda, in input order.
    """
    if p.R > cfg.R:
        raise CutoffError(f"packet cutoff {p.R} exceeds the sea cutoff {cfg.R}")
    slope = slope_integral(p, cfg)
    sea = VacuumSet(R=cfg.R)
    logger.debug(f"Unperturbed sea energy at R={cfg.R}: {sea.unperturbed_energy(cfg.energy(sea.r)):.12g}")
    base = chi_from_current(p, 1.0, cfg.t1, cfg, envelope)
    reports = []
    for lam in lambdas:
        report = ht_energy_point(p, base.scaled(lam), float(lam), slope, cfg)
        logger.info(f"lambda={lam:.6g}: E_TR(tf)={report.E_TR_tf:.12g}, predicted {report.predicted:.12g}")
        reports.append(report)
    return reports


def fit_line(reports: Sequence[HTEnergyReport]) -> Tuple[float, float]:
    """Least-squares slope and intercept of E_TR(tf) against lambda"""
    lam = np.array([rep.lam for rep in reports])
    energy = np.array([rep.E_TR_tf for rep in reports])
    slope, intercept = np.polyfit(lam, energy, 1)
    return float(slope), float(intercept)


def zero_crossing(reports: Sequence[HTEnergyReport]) -> float:
    """lambda at which the fitted line reaches zero relative energy"""
    slope, intercept = fit_line(reports)
    return -intercept / slope if slope else math.inf


def cutoff_scan(p: PositivePacket, lam: float, cutoffs: Sequence[int], cfg: SimConfig) -> List[Tuple[int, HTEnergyReport]]:
    """E_TR(tf) at fixed absolute lambda for several sea cutoffs on the same grid"""
    rows = []
    for R in cutoffs:
        scan_cfg = cfg.with_updates(R=R)
        packet = p.resized(R)
        pulse = chi_from_current(packet, lam, scan_cfg.t1, scan_cfg)
        report = ht_energy_point(packet, pulse, lam, slope_integral(packet, scan_cfg), scan_cfg)
        logger.info(f"cutoff R={R}: E_TR(tf)={report.E_TR_tf:.12g}")
        rows.append((R, report))
    return rows


def pauli_orthogonality_check(states: Sequence[ModeExpansion], pulse: GaugePulse, cfg: SimConfig) -> float:
    """max |<psi_a(tf), psi_b(tf)> - delta_ab| after the common exact evolution"""
    width = max(x.R for x in states)
    stack = np.stack([x.embed(width).coeffs for x in states])
    final, leakage = exact_final_batch(stack, pulse, cfg)
    check_leakage(leakage, cfg, "orthogonality check")
    flat = final.reshape(len(states), -1)
    gram = flat.conj() @ flat.T
    return float(np.max(np.abs(gram - np.eye(len(states)))))


def sea_and_packet(p: PositivePacket, cfg: SimConfig) -> List[ModeExpansion]:
    """Every occupied orbital of the hole-theory system: the sea followed by the packet"""
    sea = VacuumSet(R=cfg.R)
    return [ModeExpansion(coeffs=c) for c in sea.orbitals()] + [p.expansion(cfg.R)]
