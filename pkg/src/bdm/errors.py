"""Exception types raised across the package."""


class BdmError(Exception):
    """Base class for all errors raised by this package."""


class NotPrimeError(BdmError, ValueError):
    """Field arithmetic was requested for a modulus that is not prime."""


class ParseError(BdmError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceededError(BdmError):
    """An enumeration would exceed its configured size cap."""


class InvalidStateError(BdmError, ValueError):
    """A BDM state violates the drain/battery invariant or its slot range."""


class UnreachableStateError(BdmError):
    """Backward reconstruction of a canonical path did not reach the initial state."""


class IncompletePredecessorsError(BdmError):
    """A census is too shallow to certify that all predecessors are present."""


class ParameterError(BdmError, ValueError):
    pass
