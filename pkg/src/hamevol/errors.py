"""Exceptions raised by the integrators and drivers.

Precondition and domain violations raise plain :class:`ValueError`; the
classes here cover failures that happen while a computation is running.
"""


class IntegrationError(RuntimeError):
    """Base class for numerical failures.

    ``position`` is filled in by the trajectory drivers with the coordinate
    (1/eV) at which the failing integration started, when known.
    """

    position = None


class EvaluationError(IntegrationError):
    """A Hamiltonian entry, stage or error estimate was not finite."""

    def __init__(self, message, t=None, i=None, j=None, stage=None):
        super().__init__(message)
        self.t = t
        self.i = i
        self.j = j
        self.stage = stage


class StepUnderflowError(IntegrationError):
    """The step size became too small to change the independent variable."""


class MinimumStepError(IntegrationError):
    """The proposed step fell below the configured minimum step."""


class StepBudgetExceeded(IntegrationError):
    """More than ``maxstp`` steps were needed to cover the interval."""


class ScanBudgetExceeded(IntegrationError):
    """The parameter scan needed more than ``max_steps`` iterations."""

    def __init__(self, message="Too many steps in routine evolution_matter!"):
        super().__init__(message)
