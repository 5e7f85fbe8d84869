import logging

import numpy as np

from framework.errors import ConditionError, CutoffError, LeakageError
from models import CommandResult, RunConfig
from resources.common import demo_packet, store_for
from services.hole_theory import (
    absolute_lambdas,
    chi_from_current,
    cutoff_scan,
    fit_line,
    ht_energy_sweep,
    pauli_orthogonality_check,
    sea_and_packet,
    slope_integral,
    vacuum_energy_shift,
    zero_crossing,
)

logger = logging.getLogger(__name__)

NAME = "ht_sweep"
CUTOFF_NAME = "ht_cutoff"
SECTIONS = ("sim", "pulse", "packet", "sweep", "tolerances")
COLUMNS = ["lambda", "E_TR_t0", "dE_hvac", "d_xi_fp", "E_TR_tf", "predicted_E48", "abs_diff"]


def run(config: RunConfig) -> CommandResult:
    """
    Sweep the current-derived pulse strength and check that the relative energy of
    sea plus packet follows the straight line xi_f(t0) - lambda * integral (dJ/dz)^2,
    crossing below the unperturbed vacuum.
    """
    result = CommandResult()
    cfg = config.sweep_sim()
    tol = config.tolerances
    store = store_for(config)
    fingerprint = config.fingerprint(*SECTIONS)
    try:
        packet = demo_packet(config, cfg)
        slope = slope_integral(packet, cfg)
        lambdas = absolute_lambdas(packet, config.pulse.lambdas, config.pulse.lambda_units, cfg)
        result.line(f"packet (r={config.packet.r}, s={config.packet.s}): integral (dJ/dz)^2 = {slope:.15g}")

        reports = ht_energy_sweep(packet, lambdas, cfg, config.pulse.envelope)
        rows = [[rep.lam, rep.E_TR_t0, rep.dE_hvac, rep.d_xi_fp, rep.E_TR_tf, rep.predicted, rep.abs_diff]
                for rep in reports]
        result.files[NAME] = str(store.write_table(NAME, COLUMNS, rows, fingerprint))

        result.require("max |E_TR_tf - predicted|", max(rep.abs_diff for rep in reports), tol.sweep_line)
        result.require("max report identity residual", max(rep.identity_residual for rep in reports), 1e-10)
        result.require("max |dE_hvac|", max(abs(rep.dE_hvac) for rep in reports), (2 * cfg.R + 1) * tol.vacuum_mode)

        if len(reports) >= 2:
            fitted, _ = fit_line(reports)
            result.line(f"fitted slope {fitted:.15g}, quadrature slope {-slope:.15g}")
            result.require("fitted slope relative error", abs(fitted + slope) / slope, 1e-6)
            crossing = zero_crossing(reports)
            result.line(f"E_TR(tf) crosses zero at lambda* = {crossing:.6g}")
        lowest = min(rep.E_TR_tf for rep in reports)
        result.require("lowest E_TR_tf below the unperturbed vacuum", lowest, 0.0, passed=lowest < 0,
                       detail="extend the lambda list")

        strongest = chi_from_current(packet, max(lambdas, key=abs), cfg.t1, cfg, config.pulse.envelope)
        shift = vacuum_energy_shift(strongest, cfg)
        result.require("max per-mode vacuum shift", shift.max_abs, tol.vacuum_mode)
        deviation = pauli_orthogonality_check(sea_and_packet(packet, cfg), strongest, cfg)
        result.require("Gram deviation of sea plus packet", deviation, tol.orthogonality)

        scan_lambda = absolute_lambdas(packet, [config.sweep.cutoff_scan_lambda], config.pulse.lambda_units, cfg)[0]
        scan = cutoff_scan(packet, scan_lambda, config.sweep.cutoff_scan, cfg)
        scan_rows = [[R, rep.lam, rep.E_TR_tf, rep.leakage] for R, rep in scan]
        result.files[CUTOFF_NAME] = str(store.write_table(CUTOFF_NAME, ["R", "lambda", "E_TR_tf", "leakage"],
                                                          scan_rows, fingerprint))
        spread = float(np.ptp([rep.E_TR_tf for _, rep in scan]))
        result.line(f"E_TR(tf) across cutoffs {list(config.sweep.cutoff_scan)}: spread {spread:.3e}")
    except (LeakageError, ConditionError, CutoffError) as e:
        logger.error(f"Sweep failed: {e}")
        result.fail(e)
    return result
