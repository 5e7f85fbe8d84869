from .spectral_core import to_grid, to_modes, synthesize, analyze, free_energy, full_energy, charge_current_density
from .evolution import build_pulse, free_propagate, exact_final_state, energy_shift_formula, energy_shift_direct
from .hole_theory import packet_two_mode, chi_from_current, vacuum_energy_shift, ht_energy_sweep, cutoff_scan
from .fock_qft import FockBasis, build_H0, build_rho, build_J, schwinger_sum, continuity_violation_report
from .oracle_integrator import Trajectory, integrate, continuity_residual
from .output_store import OutputStore

__all__ = [
    "to_grid",
    "to_modes",
    "synthesize",
    "analyze",
    "free_energy",
    "full_energy",
    "charge_current_density",
    "build_pulse",
    "free_propagate",
    "exact_final_state",
    "energy_shift_formula",
    "energy_shift_direct",
    "packet_two_mode",
    "chi_from_current",
    "vacuum_energy_shift",
    "ht_energy_sweep",
    "cutoff_scan",
    "FockBasis",
    "build_H0",
    "build_rho",
    "build_J",
    "schwinger_sum",
    "continuity_violation_report",
    "Trajectory",
    "integrate",
    "continuity_residual",
    "OutputStore"
]
