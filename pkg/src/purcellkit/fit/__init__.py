"""Lifetime and detuning fits on top of an in-repo Levenberg-Marquardt solver."""

from purcellkit.fit.detuning import (
    DegenerateScanError,
    fit_detuning_scan,
    two_mode_lifetime,
)
from purcellkit.fit.lifetime import (
    DecayModelKind,
    InsufficientDataError,
    Weighting,
    decay_curve,
    fit_decay_curve,
    fit_lifetime,
)
from purcellkit.fit.lsq import FitReport, SingularNormalEquationsError, minimize

__all__ = [
    "DecayModelKind",
    "DegenerateScanError",
    "FitReport",
    "InsufficientDataError",
    "SingularNormalEquationsError",
    "Weighting",
    "decay_curve",
    "fit_decay_curve",
    "fit_detuning_scan",
    "fit_lifetime",
    "minimize",
    "two_mode_lifetime",
]
