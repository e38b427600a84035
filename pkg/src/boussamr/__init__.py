"""boussamr: dispersive shallow-water solver with adaptive mesh refinement.

A one-dimensional finite-volume shallow-water solver with an optional
Boussinesq momentum correction, run on a patch hierarchy refined in
both space and time.
"""

__version__ = "0.1.0"

from .config import RunConfig, load_config, make_config
from .driver import RunResult, Simulation, run_config
from .errors import (CflViolation, ConfigError, ContractViolation,
                     NestingError, NumericalError, SingularSystemError,
                     SynchronizationError)
from .scenarios import canonical_scenarios

__all__ = [
    "__version__",
    "RunConfig",
    "load_config",
    "make_config",
    "RunResult",
    "Simulation",
    "run_config",
    "canonical_scenarios",
    "ConfigError",
    "ContractViolation",
    "NumericalError",
    "CflViolation",
    "SingularSystemError",
    "NestingError",
    "SynchronizationError",
]
