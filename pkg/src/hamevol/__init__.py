"""Adaptive Cash-Karp integration of Schroedinger-type systems and neutrino
flavor evolution in matter."""

from .errors import (
    EvaluationError,
    IntegrationError,
    MinimumStepError,
    ScanBudgetExceeded,
    StepBudgetExceeded,
    StepUnderflowError,
)
from .physics import (
    DensityProfile,
    HamiltonianModel,
    MassSpectrum,
    MixingParameters,
    ProfileKind,
)
from .rk import IntegrationStats, StepControl, integrate

__version__ = "0.1.0"
