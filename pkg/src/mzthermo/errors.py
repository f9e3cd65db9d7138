"""Exception types shared across the package."""


class ThermometryError(Exception):
    """Base class for all package errors."""


class DimensionError(ThermometryError, ValueError):
    """Operand shapes do not match the Hilbert-space layout."""

    def __init__(self, message, *, expected=None, got=None):
        super().__init__(message)
        self.expected = expected
        self.got = got


class NotHermitianError(ThermometryError, ValueError):
    def __init__(self, message, *, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class NotDensityMatrixError(ThermometryError, ValueError):
    pass


class CapacityError(ThermometryError, ValueError):
    """A request exceeds a configured size cap (qubits, matrix bytes, grid points)."""

    def __init__(self, message, *, requested=None, limit=None):
        super().__init__(message)
        self.requested = requested
        self.limit = limit


class SubspaceLeakError(ThermometryError, RuntimeError):
    """Arm-a outcome outside {all zeros, all ones}: the simulation left the N00N subspace."""

    def __init__(self, message, *, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class ParameterError(ThermometryError, ValueError):
    """A parameter violates an operation's precondition."""
