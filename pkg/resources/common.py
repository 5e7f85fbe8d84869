import logging

from models import GaugePulse, PositivePacket, RunConfig, SimConfig
from services.evolution import build_pulse
from services.hole_theory import absolute_lambdas, chi_from_current, packet_two_mode
from services.output_store import OutputStore

logger = logging.getLogger(__name__)


def store_for(config: RunConfig) -> OutputStore:
    return OutputStore(config.output_dir)


def demo_packet(config: RunConfig, cfg: SimConfig) -> PositivePacket:
    return packet_two_mode(config.packet.r, config.packet.s, cfg)


def run_pulse(config: RunConfig, cfg: SimConfig, packet: PositivePacket) -> GaugePulse:
    """
    The pulse a single-run command uses: the configured harmonics, or the
    current-derived profile at the first nonzero lambda of the sweep list.
    """
    if config.pulse.mode == "harmonics":
        return build_pulse(config.pulse, cfg)
    lambdas = absolute_lambdas(packet, config.pulse.lambdas, config.pulse.lambda_units, cfg)
    strength = next((lam for lam in lambdas if lam != 0), 0.0)
    logger.info(f"Using current-derived pulse at lambda={strength:.6g}")
    return chi_from_current(packet, strength, cfg.t1, cfg, config.pulse.envelope)
