"""Exception hierarchy shared by every module.

Each error carries a ``hint`` with a remediation suggestion; the CLI maps
classes onto exit codes (see ``ccrmodel.cli``).
"""

from __future__ import annotations


class CcrError(Exception):
    """Base class for all package errors."""

    hint = ""

    def __init__(self, message: str, hint: str | None = None):
        super().__init__(message)
        if hint is not None:
            self.hint = hint


class ValidationError(CcrError, ValueError):
    """Input failed a structural or numeric check."""

    hint = "check the shapes and values of the inputs"


class DimensionError(ValidationError):
    """Shapes or ranks are inconsistent."""

    hint = "check rank and sparsity against the matrix dimensions"


class DegenerateBasisError(CcrError, ArithmeticError):
    """A matrix that must have full column rank does not."""

    hint = "lower the rank or raise the sparsity levels"


class NotPSDError(ValidationError):
    hint = "covariance parameters produce an indefinite matrix; shrink |rho|"


class StateError(CcrError):
    """Operation requires a dataset state it does not have."""

    hint = "center the dataset within groups first"


class UndefinedCorrelationError(CcrError, ArithmeticError):
    hint = "a projected score has zero variance in one group"


class ConvergenceError(CcrError, ArithmeticError):
    hint = "increase max_iterations or loosen the tolerance"


class ScenarioError(ValidationError):
    hint = "adjust the group correlations so every group covariance is PSD"
