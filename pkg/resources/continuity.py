import logging
from typing import List

from framework.errors import ConditionError, CutoffError, IntegratorError, LeakageError
from models import CommandResult, ContinuityRow, RunConfig
from resources.common import demo_packet, run_pulse, store_for
from services.fock_qft import FockBasis, continuity_violation_report
from services.hole_theory import sea_and_packet
from services.oracle_integrator import continuity_residual, dump_rows, integrate
from services.spectral_core import to_grid

logger = logging.getLogger(__name__)

NAME = "continuity"
DUMP_NAME = "trajectory"
SECTIONS = ("sim", "pulse", "packet", "integrator", "continuity", "fock", "tolerances")

# largest Fock cutoff on which the full (uncapped) occupation space is built
FULL_SPACE_CUTOFF = 2

ROUNDOFF_FLOOR = 1e-10


def run(config: RunConfig) -> CommandResult:
    """
    Single-particle and N-electron continuity residuals on the grid under the pulse,
    with their convergence under dt halving, next to the field-theory obstruction.
    """
    result = CommandResult()
    cfg = config.sim
    tol = config.tolerances
    store = store_for(config)
    fingerprint = config.fingerprint(*SECTIONS)
    try:
        packet = demo_packet(config, cfg)
        pulse = run_pulse(config, cfg, packet)
        packet_field = to_grid(packet.expansion(cfg.R), cfg)
        orbitals = [to_grid(x, cfg) for x in sea_and_packet(packet, cfg)] if config.continuity.include_sea else []

        rows: List[ContinuityRow] = []
        for dt in (config.integrator.dt, 0.5 * config.integrator.dt):
            icfg = config.integrator.model_copy(update={"dt": dt})
            packet_run = integrate(packet_field, pulse, cfg, icfg)
            sea = continuity_residual(integrate(orbitals, pulse, cfg, icfg), cfg.q, cfg) if orbitals else None
            row = ContinuityRow(dt=dt, packet=continuity_residual(packet_run, cfg.q, cfg), sea=sea)
            rows.append(row)
            result.line(f"dt={dt:.3e}: packet residual {row.packet:.6e}"
                        + (f", sea plus packet residual {row.sea:.6e}" if orbitals else ""))

        columns = ["dt", "packet", "sea"] if orbitals else ["dt", "packet"]
        table = [[getattr(row, col) for col in columns] for row in rows]
        result.files[NAME] = str(store.write_table(NAME, columns, table, fingerprint))

        for label in columns[1:]:
            coarse, fine = getattr(rows[0], label), getattr(rows[1], label)
            if fine > ROUNDOFF_FLOOR:
                ratio = coarse / fine
                result.require(f"{label} residual ratio under dt halving", abs(ratio - tol.ratio_target),
                               tol.ratio_band, detail=f"ratio {ratio:.4f}")
            else:
                result.line(f"{label} residual at round-off ({fine:.3e}); ratio not measured")

        if config.continuity.dump:
            icfg = config.integrator.model_copy(update={"sample_every": max(1, config.integrator.sample_every or 20)})
            trajectory = integrate(packet_field, pulse, cfg, icfg)
            columns = ["t", "z", "re_psi1", "im_psi1", "re_psi2", "im_psi2", "rho", "J"]
            result.files[DUMP_NAME] = str(store.write_table(DUMP_NAME, columns, dump_rows(trajectory, cfg), fingerprint))

        basis = FockBasis(min(config.fock.R_F, FULL_SPACE_CUTOFF))
        z, z_prime = config.fock.z_points[0], config.fock.z_points[-1]
        report = continuity_violation_report(basis, cfg, z, z_prime)
        result.line(f"field theory, R_F={report.R_F} full space (dim {report.dim}):")
        result.line(f"  <0|rho|0> = {report.rho_vacuum:.10g} (vacuum offset of the un-normal-ordered density, not subtracted)")
        result.line(f"  i[H0, rho] + dJ/dz residual {report.h0_rho_residual:.3e}")
        result.line(f"  <0|[rho(z'), rho(z)]|0> = {report.rho_rho_vacuum:.3e} "
                    f"({'holds' if report.rho_rho_holds else 'fails'})")
        result.line(f"  [J(z'), rho(z)] = 0 {'holds' if report.current_rho_holds else 'fails'}: "
                    f"Schwinger term {report.schwinger:.15g}, from dJ/dz {report.derivative_route:.15g}")
        result.require("Schwinger obstruction", report.schwinger, 0.0, passed=report.schwinger > 0,
                       detail="the obstruction must be nonzero")
        result.require("vacuum <[rho(z'), rho(z)]>", report.rho_rho_vacuum, tol.z_invariance)
    except IntegratorError as e:
        logger.error(f"Integration failed: {e}")
        result.fail(e)
    except (LeakageError, ConditionError, CutoffError) as e:
        logger.error(f"Continuity check failed: {e}")
        result.fail(e)
    return result
