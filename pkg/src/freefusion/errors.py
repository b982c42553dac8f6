"""Exception hierarchy."""


class FreeFusionError(Exception):
    """Base class for all package errors."""


class ContractError(FreeFusionError, ValueError):
    """A precondition on an argument was violated."""


class NumericError(FreeFusionError, ArithmeticError):
    """A numerical routine failed (NaN/Inf, wrong branch, no convergence)."""


class SingularityError(NumericError):
    """A matrix or scalar that must be inverted is (numerically) singular."""

    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class ConvergenceError(NumericError):
    """A fixed-point iteration hit its iteration cap."""

    def __init__(self, message, residual=None, where=None):
        super().__init__(message)
        self.residual = residual
        self.where = where


class DegenerateRowError(ContractError):
    """A data row has zero sample variance and cannot be standardized."""

    def __init__(self, row, trial=None):
        msg = f"row {row} has zero variance"
        if trial is not None:
            msg += f" (trial {trial})"
        super().__init__(msg)
        self.row = row
        self.trial = trial


class ParseError(FreeFusionError, ValueError):
    """Malformed CSV or JSON input."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col
