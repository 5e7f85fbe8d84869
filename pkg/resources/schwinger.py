import logging

import numpy as np

from framework.errors import CutoffError
from models import CommandResult, RunConfig
from resources.common import store_for
from services.fock_qft import FockBasis, random_state_energies, schwinger_rows, spectrum_check

logger = logging.getLogger(__name__)

NAME = "schwinger"
SECTIONS = ("sim", "fock", "tolerances", "seed")
COLUMNS = ["R_F", "S_spectral", "S_direct", "abs_diff", "dim"]


def run(config: RunConfig) -> CommandResult:
    """Schwinger term by two routes across Fock cutoffs, plus the H0 lower bound on the truncated space"""
    result = CommandResult()
    cfg = config.sim
    tol = config.tolerances
    fock = config.fock
    try:
        rows = schwinger_rows(fock.R_F_scan, fock.P, fock.z_points, cfg)
        table = [[row.R_F, row.S_spectral, row.S_direct, row.abs_diff, row.dim] for row in rows]
        path = store_for(config).write_table(NAME, COLUMNS, table, config.fingerprint(*SECTIONS))
        result.files[NAME] = str(path)

        for row in rows:
            result.line(f"R_F={row.R_F}: S={row.S_spectral:.15g} (dim {row.dim})")
        smallest = min(row.S_spectral for row in rows)
        result.require("smallest S", smallest, 0.0, passed=smallest > 0, detail="S must be positive")
        result.require("max route difference", max(row.abs_diff for row in rows),
                       tol.schwinger_routes)
        result.require("max z spread of S", max(row.z_spread for row in rows), tol.z_invariance)

        values = [row.S_spectral for row in sorted(rows, key=lambda row: row.R_F)]
        increasing = all(b > a for a, b in zip(values, values[1:]))
        result.line(f"S strictly increasing with R_F: {'yes' if increasing else 'no'}")
        if not increasing:
            steps = np.diff(values)
            result.require("smallest S increment", float(steps.min()), 0.0, passed=False,
                           detail="S(R_F) should grow with the cutoff")

        basis = FockBasis(fock.R_F, fock.P)
        lowest, vacuum, multiplicity = spectrum_check(basis, cfg)
        result.line(f"H0 on R_F={fock.R_F}, P={fock.P}: lowest eigenvalue {lowest:.3e} "
                    f"(vacuum {vacuum:.3e}, multiplicity {multiplicity})")
        result.require("H0 vacuum eigenvalue", abs(vacuum), 0.0, passed=vacuum == 0.0 and lowest >= 0 and multiplicity == 1)
        energies = random_state_energies(basis, cfg, fock.random_states, np.random.default_rng(config.seed))
        lowest_expectation = float(energies.min())
        result.line(f"min <H0> over {energies.size} random states: {lowest_expectation:.6g}")
        result.require("<H0> below zero by", max(0.0, -lowest_expectation), 1e-12)
    except CutoffError as e:
        logger.error(f"Fock computation failed: {e}")
        result.fail(e)
    return result
