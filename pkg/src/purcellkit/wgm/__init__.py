"""Approximate whispering-gallery-mode solver for the diamond microring."""

from purcellkit.wgm.bessel import bessel_j, bessel_jp, bessel_y, bessel_yp
from purcellkit.wgm.resonator import (
    GridTooCoarseError,
    RadialField,
    characteristic,
    field_for_mode,
    find_resonances,
    mode_volume,
    radial_field,
    volume_integral,
)
from purcellkit.wgm.slab import NoGuidedModeError, SlabSolution, slab_profile, solve_slab

__all__ = [
    "GridTooCoarseError", "NoGuidedModeError", "RadialField", "SlabSolution",
    "bessel_j", "bessel_jp", "bessel_y", "bessel_yp", "characteristic", "field_for_mode",
    "find_resonances", "mode_volume", "radial_field", "slab_profile", "solve_slab",
    "volume_integral",
]
