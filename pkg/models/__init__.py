from .config import (
    SimConfig,
    IntegratorConfig,
    RunConfig,
    PulseSection,
    PacketSection,
    FockSection,
    SweepSection,
    ContinuitySection,
    ToleranceSection,
    OutputSection
)
from .fields import PlaneWaveMode, ModeExpansion, GridField, PositivePacket, VacuumSet
from .pulse import GaugePulse, PulsePotential
from .reports import (
    EvolutionResult,
    VacuumShift,
    HTEnergyReport,
    SchwingerRow,
    ContinuityViolationReport,
    ContinuityRow,
    CommandResult
)

__all__ = [
    "SimConfig",
    "IntegratorConfig",
    "RunConfig",
    "PulseSection",
    "PacketSection",
    "FockSection",
    "SweepSection",
    "ContinuitySection",
    "ToleranceSection",
    "OutputSection",
    "PlaneWaveMode",
    "ModeExpansion",
    "GridField",
    "PositivePacket",
    "VacuumSet",
    "GaugePulse",
    "PulsePotential",
    "EvolutionResult",
    "VacuumShift",
    "HTEnergyReport",
    "SchwingerRow",
    "ContinuityViolationReport",
    "ContinuityRow",
    "CommandResult"
]
