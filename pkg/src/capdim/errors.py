"""Exception taxonomy shared across modules."""


class CapdimError(Exception):
    """Base class for all library errors."""


class SizeError(CapdimError):
    """A generator or product would exceed the point budget."""


class DomainError(CapdimError):
    """A numeric argument lies outside its mathematical domain."""


class ContractError(CapdimError):
    """Arguments violate a structural precondition (lengths, dims)."""


class ParseError(CapdimError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None
                         else "line %d: %s" % (line, message))
        self.line = line


class ResolutionError(CapdimError):
    """A requested scale falls below the cloud's resolution guard."""

    def __init__(self, message, scale=None):
        super().__init__(message)
        self.scale = scale


class ConvergenceError(CapdimError):
    """Solver hit its iteration cap; carries the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NumericError(CapdimError):
    """A numerical operation failed beyond recoverable tolerance."""
