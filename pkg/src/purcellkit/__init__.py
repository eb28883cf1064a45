"""Cavity-enhanced emission of a color center in a diamond microring.

Subpackages: ``core`` (domain types), ``wgm`` (mode solver), ``purcell``
(enhancement arithmetic), ``dynamics`` (forward simulation), ``fit``
(inverse problems), ``spectra`` (synthetic spectra) and ``cli``.
"""

from purcellkit.core import (
    CavityMode,
    CouplingGeometry,
    DecayModel,
    EmitterTransition,
    NoGuidedModeError,
    Polarization,
    RingGeometry,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "CavityMode",
    "CouplingGeometry",
    "DecayModel",
    "EmitterTransition",
    "NoGuidedModeError",
    "Polarization",
    "RingGeometry",
    "ValidationError",
]
