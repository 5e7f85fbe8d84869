from . import continuity, ht_sweep, schwinger, verify_evolution
from . import report

# CLI subcommand -> handler
COMMANDS = {
    "verify-evolution": verify_evolution.run,
    "ht-sweep": ht_sweep.run,
    "schwinger": schwinger.run,
    "continuity": continuity.run,
    "report": report.run,
}

__all__ = ["COMMANDS", "verify_evolution", "ht_sweep", "schwinger", "continuity", "report"]
