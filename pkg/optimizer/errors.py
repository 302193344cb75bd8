"""Custom exceptions for the bid optimizer."""

from typing import Any, Dict, List, Optional


class BidOptimizerError(Exception):
    """Base class for every failure raised by this package."""

    pass


class MalformedProgramError(BidOptimizerError):
    """Raised when a linear program is rejected before solving."""

    pass


class LpSolverError(BidOptimizerError):
    """Raised when the simplex iteration cap is exceeded or the tableau breaks down."""

    pass


class ContractViolation(BidOptimizerError):
    """Raised when an operation is called outside its preconditions."""

    pass


class SizeLimitError(BidOptimizerError):
    """Raised when an enumeration guard is exceeded."""

    pass


class NucleolusError(BidOptimizerError):
    """Raised when the staged nucleolus scheme fails. Carries stage diagnostics."""

    def __init__(self, message: str, stages: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.stages = stages or []


class ConfigError(BidOptimizerError):
    """Raised when a configuration document fails to parse or validate."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class SimulationTerminated(BidOptimizerError):
    """Raised when a round is requested with zero active bidders."""

    pass


class OutputError(BidOptimizerError):
    """Raised when a result file cannot be written."""

    pass
