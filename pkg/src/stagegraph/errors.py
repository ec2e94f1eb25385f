"""Exception types shared across the library."""


class StagegraphError(Exception):
    """Base class for all library errors."""


class InputError(StagegraphError):
    """Malformed user input: unknown states, bad formulas, schema violations."""


class PreconditionError(StagegraphError):
    """An operation was called outside its contract (e.g. step on a disabled transition)."""


class SolverInconclusive(StagegraphError):
    """A solver query returned Unknown where a definite answer was required."""


class SolverProtocolError(StagegraphError):
    """An external solver produced output outside the SMT-LIB contract."""


class ExactComputationTooLarge(StagegraphError):
    """Backward-reachability saturation exceeded its node budget."""


class OracleTooLarge(StagegraphError):
    """Explicit state enumeration exceeded its node budget."""
