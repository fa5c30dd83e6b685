class RelayAllocatorError(Exception):
    """Base class for every error raised by relay_allocator."""


class ChannelError(RelayAllocatorError, ValueError):
    pass


class ChannelFileError(RelayAllocatorError):
    def __init__(self, path, reason: str, line: int | None = None):
        self.path = str(path)
        self.reason = reason
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {reason}")


class DimensionError(RelayAllocatorError, ValueError):
    pass


class NegativePowerError(RelayAllocatorError, ValueError):
    pass


class BudgetError(RelayAllocatorError, ValueError):
    pass


class NonFiniteError(RelayAllocatorError, ValueError):
    pass


class DegenerateQuadraticError(RelayAllocatorError, ValueError):
    pass


class EmptyInputError(RelayAllocatorError, ValueError):
    pass


class UnboundedInnerProblemError(RelayAllocatorError):
    """The per-subcarrier Lagrangian has no minimizer (a power price is zero)."""


class OracleSizeError(RelayAllocatorError, ValueError):
    pass


class ConfigError(RelayAllocatorError, ValueError):
    pass


class InconsistentRatesError(RelayAllocatorError):
    pass


class InnerSolveError(RelayAllocatorError):
    """No case of the per-subcarrier KKT system produced a stationary point."""
