"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so keep the hierarchy flat.
"""


class QCollapseError(Exception):
    """Base class for every error raised by this package."""


class LayoutError(QCollapseError, ValueError):
    """Register layout or bitstring width is inconsistent."""


class NormError(QCollapseError, ValueError):
    """A state failed the unit-norm invariant."""


class InvalidPeriodError(QCollapseError, ValueError):
    pass


class PostSelectionError(QCollapseError, ValueError):
    """Requested outcome has zero Born probability."""


class BudgetExceededError(QCollapseError, RuntimeError):
    """Period recovery ran out of samples before identifying r."""

    def __init__(self, message, system=None, z_samples=None):
        super().__init__(message)
        self.system = system
        self.z_samples = list(z_samples or [])


class DimacsParseError(QCollapseError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptySubspaceError(QCollapseError, ValueError):
    pass


class DegenerateDynamicsError(QCollapseError, RuntimeError):
    """Projection annihilated the state during constrained evolution."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
