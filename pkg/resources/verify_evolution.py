import logging

from framework.errors import ConditionError, IntegratorError, LeakageError
from models import CommandResult, RunConfig
from resources.common import demo_packet, run_pulse, store_for
from services.evolution import energy_shift_direct, energy_shift_formula, exact_final_state, free_propagate
from services.oracle_integrator import integrate, l2_distance
from services.spectral_core import to_grid

logger = logging.getLogger(__name__)

NAME = "verify_evolution"
SECTIONS = ("sim", "pulse", "packet", "integrator", "tolerances")

# errors below this are round-off and carry no convergence information
ROUNDOFF_FLOOR = 1e-11


def run(config: RunConfig) -> CommandResult:
    """
    Compare the closed-form final state with the grid integrator at dt and dt/2:
    L2 error, convergence ratio under step halving, leakage, norm drift and the
    two routes to the free-energy change.
    """
    result = CommandResult()
    cfg = config.sim
    tol = config.tolerances
    try:
        packet = demo_packet(config, cfg)
        pulse = run_pulse(config, cfg, packet)
        x0 = packet.expansion(cfg.R)

        exact = exact_final_state(x0, pulse, cfg)
        psi_exact = to_grid(exact.state, cfg).samples
        result.line(f"exact propagator: leakage {exact.leakage:.3e}, norm {exact.state.norm_sq():.15f}")
        if pulse.is_zero:
            free = free_propagate(x0, cfg.tf - cfg.t0, cfg).embed(exact.state.R)
            result.line(f"zero pulse: |exact - free| = {abs(exact.state.coeffs - free.coeffs).max():.3e}")

        psi0 = to_grid(x0, cfg)
        errors = []
        rows = []
        for dt in (config.integrator.dt, 0.5 * config.integrator.dt):
            icfg = config.integrator.model_copy(update={"dt": dt})
            trajectory = integrate(psi0, pulse, cfg, icfg)
            err = l2_distance(trajectory.final[0], psi_exact, cfg)
            errors.append(err)
            rows.append([dt, err, trajectory.norm_drift])
            result.line(f"dt={dt:.3e}: L2 error {err:.6e}, norm drift {trajectory.norm_drift:.3e}")

        result.require("exact vs oracle L2 error", errors[0], tol.evolution_l2)
        if errors[1] > ROUNDOFF_FLOOR:
            ratio = errors[0] / errors[1]
            result.require("convergence ratio under dt halving", abs(ratio - tol.ratio_target), tol.ratio_band,
                           detail=f"ratio {ratio:.4f}, errors {errors[0]:.3e} -> {errors[1]:.3e}")
        else:
            result.line("convergence ratio: errors at round-off, not measured")

        formula = energy_shift_formula(x0, pulse, cfg)
        direct = energy_shift_direct(x0, pulse, cfg)
        result.line(f"free-energy change: formula {formula:.15g}, direct {direct:.15g}")
        result.require("energy-shift route difference", abs(formula - direct), 1e-8)

        path = store_for(config).write_table(NAME, ["dt", "l2_error", "norm_drift"], rows, config.fingerprint(*SECTIONS))
        result.files[NAME] = str(path)
    except IntegratorError as e:
        logger.error(f"Oracle integration failed: {e}")
        result.fail(e)
    except (LeakageError, ConditionError) as e:
        logger.error(f"Exact evolution failed: {e}")
        result.fail(e)
    return result
