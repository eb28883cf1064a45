"""Domain types shared across purcellkit.

Units are fixed throughout the package: wavelengths in nm, lifetimes in ns,
lengths in um and rates in 1/ns.  All types are frozen dataclasses and
validate their invariants on construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any


class ValidationError(ValueError):
    """Raised when a domain value violates one of its invariants.

    ``invariant`` names the first violated rule, e.g. ``"zpl_branching_ratio"``.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class NoGuidedModeError(ValidationError):
    """The slab (or ring) cannot confine light, e.g. core index <= cladding."""

    def __init__(self, message: str, invariant: str = "core_index"):
        super().__init__(invariant, message)


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"


def _require(cond: bool, invariant: str, message: str) -> None:
    if not cond:
        raise ValidationError(invariant, message)


def _finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


@dataclass(frozen=True)
class CavityMode:
    """One optical resonance of the microring.

    ``mode_volume_cubic_lambda_over_n`` is V_mode in units of
    (wavelength / n)^3, the way mode volumes are usually quoted.
    """

    wavelength_nm: float
    quality_factor: float
    mode_volume_cubic_lambda_over_n: float
    polarization: Polarization = Polarization.TE
    azimuthal_number: int = 0
    radial_number: int = 1

    def __post_init__(self):
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        _require(_finite(self.wavelength_nm) and self.wavelength_nm > 0,
                 "wavelength_nm", f"must be > 0, got {self.wavelength_nm!r}")
        _require(_finite(self.quality_factor) and self.quality_factor > 0,
                 "quality_factor", f"must be > 0, got {self.quality_factor!r}")
        _require(_finite(self.mode_volume_cubic_lambda_over_n)
                 and self.mode_volume_cubic_lambda_over_n > 0,
                 "mode_volume_cubic_lambda_over_n",
                 f"must be > 0, got {self.mode_volume_cubic_lambda_over_n!r}")
        _require(int(self.radial_number) == self.radial_number and self.radial_number >= 1,
                 "radial_number", f"must be an integer >= 1, got {self.radial_number!r}")
        _require(int(self.azimuthal_number) == self.azimuthal_number
                 and self.azimuthal_number >= 0,
                 "azimuthal_number", f"must be an integer >= 0, got {self.azimuthal_number!r}")

    @property
    def linewidth_nm(self) -> float:
        return self.wavelength_nm / self.quality_factor

    def mode_volume_um3(self, refractive_index: float) -> float:
        """Mode volume in um^3 for a medium of index ``refractive_index``."""
        return mode_volume_to_um3(self.mode_volume_cubic_lambda_over_n,
                                  self.wavelength_nm, refractive_index)

    def shifted(self, delta_nm: float) -> CavityMode:
        """Copy of the mode with its wavelength moved by ``delta_nm``."""
        return _replace(self, wavelength_nm=self.wavelength_nm + delta_nm)


@dataclass(frozen=True)
class CouplingGeometry:
    """Field overlap between emitter dipole and cavity mode.

    ``overlap_eta`` is (E(r) . mu) / (|E_max| |mu|): 1 for an ideally placed and
    oriented dipole, 0 for one sitting on a node or orthogonal to the field.
    """

    overlap_eta: float = 1.0

    def __post_init__(self):
        _require(_finite(self.overlap_eta) and 0.0 <= self.overlap_eta <= 1.0,
                 "overlap_eta", f"must lie in [0, 1], got {self.overlap_eta!r}")


@dataclass(frozen=True)
class EmitterTransition:
    """A zero-phonon dipole line.

    Parameters
    ----------
    wavelength_nm : float
        Emission wavelength of the line.
    bulk_lifetime_ns : float
        Total lifetime without cavity coupling.
    zpl_branching_ratio : float
        Fraction of the bulk emission that goes into the zero-phonon line.
    leak_ratio : float
        Bulk rate over the rate into non-cavity channels.  Defaults to 1, i.e.
        the cavity does not suppress emission into other modes.
    geometry : CouplingGeometry
        Position/orientation overlap with the cavity field.
    """

    wavelength_nm: float
    bulk_lifetime_ns: float
    zpl_branching_ratio: float
    leak_ratio: float = 1.0
    geometry: CouplingGeometry = field(default_factory=CouplingGeometry)

    def __post_init__(self):
        if isinstance(self.geometry, dict):
            object.__setattr__(self, "geometry", CouplingGeometry(**self.geometry))
        _require(_finite(self.wavelength_nm) and self.wavelength_nm > 0,
                 "wavelength_nm", f"must be > 0, got {self.wavelength_nm!r}")
        _require(_finite(self.bulk_lifetime_ns) and self.bulk_lifetime_ns > 0,
                 "bulk_lifetime_ns", f"must be > 0, got {self.bulk_lifetime_ns!r}")
        _require(_finite(self.zpl_branching_ratio) and 0.0 < self.zpl_branching_ratio < 1.0,
                 "zpl_branching_ratio",
                 f"must lie in the open interval (0, 1), got {self.zpl_branching_ratio!r}")
        _require(_finite(self.leak_ratio) and self.leak_ratio > 0,
                 "leak_ratio", f"must be > 0, got {self.leak_ratio!r}")

    @property
    def zpl_lifetime_ns(self) -> float:
        return self.bulk_lifetime_ns / self.zpl_branching_ratio

    @property
    def sideband_lifetime_ns(self) -> float:
        return self.bulk_lifetime_ns / (1.0 - self.zpl_branching_ratio)

    def with_eta(self, eta: float) -> EmitterTransition:
        return _replace(self, geometry=CouplingGeometry(eta))


@dataclass(frozen=True)
class DecayModel:
    """Decay rates of an emitter, split into ZPL and phonon sideband channels.

    The cavity multiplies only the ZPL channel, by ``1 + purcell_factor``.
    """

    zpl_rate_per_ns: float
    sideband_rate_per_ns: float
    purcell_factor: float = 0.0

    def __post_init__(self):
        _require(_finite(self.zpl_rate_per_ns) and self.zpl_rate_per_ns >= 0,
                 "zpl_rate_per_ns", f"must be >= 0, got {self.zpl_rate_per_ns!r}")
        _require(_finite(self.sideband_rate_per_ns) and self.sideband_rate_per_ns >= 0,
                 "sideband_rate_per_ns", f"must be >= 0, got {self.sideband_rate_per_ns!r}")
        _require(_finite(self.purcell_factor) and self.purcell_factor >= 0,
                 "purcell_factor", f"must be >= 0, got {self.purcell_factor!r}")

    @classmethod
    def from_transition(cls, transition: EmitterTransition, purcell_factor: float = 0.0
                        ) -> DecayModel:
        tau0 = transition.bulk_lifetime_ns
        xi = transition.zpl_branching_ratio
        return cls(xi / tau0, (1.0 - xi) / tau0, purcell_factor)

    @property
    def total_rate_per_ns(self) -> float:
        return (1.0 + self.purcell_factor) * self.zpl_rate_per_ns + self.sideband_rate_per_ns

    @property
    def lifetime_ns(self) -> float:
        return 1.0 / self.total_rate_per_ns

    @property
    def zpl_branching_ratio(self) -> float:
        """Fraction of the (cavity-modified) emission going into the ZPL."""
        return (1.0 + self.purcell_factor) * self.zpl_rate_per_ns / self.total_rate_per_ns


@dataclass(frozen=True)
class RingGeometry:
    """Microring cross-section: a core slab of thickness ``membrane_thickness_um``
    cut into an annulus of the given outer diameter and width."""

    outer_diameter_um: float = 4.8
    ring_width_um: float = 0.7
    membrane_thickness_um: float = 0.28
    core_index: float = 2.4
    cladding_index_top: float = 1.0
    cladding_index_bottom: float = 1.0

    def __post_init__(self):
        for name in ("outer_diameter_um", "ring_width_um", "membrane_thickness_um"):
            value = getattr(self, name)
            _require(_finite(value) and value > 0, name, f"must be > 0, got {value!r}")
        _require(self.ring_width_um < self.outer_diameter_um / 2, "ring_width_um",
                 "must be smaller than the outer radius")
        for name in ("core_index", "cladding_index_top", "cladding_index_bottom"):
            value = getattr(self, name)
            _require(_finite(value) and value >= 1.0, name, f"must be >= 1, got {value!r}")
        if not self.core_index > max(self.cladding_index_top, self.cladding_index_bottom):
            raise NoGuidedModeError("core index must exceed both cladding indices")

    @property
    def outer_radius_um(self) -> float:
        return self.outer_diameter_um / 2

    @property
    def inner_radius_um(self) -> float:
        return self.outer_diameter_um / 2 - self.ring_width_um


def mode_volume_to_um3(volume_cubic_lambda_over_n: float, wavelength_nm: float,
                       refractive_index: float) -> float:
    return volume_cubic_lambda_over_n * (wavelength_nm * 1e-3 / refractive_index) ** 3


def mode_volume_from_um3(volume_um3: float, wavelength_nm: float,
                         refractive_index: float) -> float:
    return volume_um3 / (wavelength_nm * 1e-3 / refractive_index) ** 3


def validate(transition: EmitterTransition | dict[str, Any]) -> None:
    """Check every invariant of an emitter transition.

    Accepts either an :class:`EmitterTransition` or its JSON dict form.
    Returns None when valid and raises :class:`ValidationError` naming the
    first violated invariant otherwise.
    """
    data = to_dict(transition) if isinstance(transition, EmitterTransition) else transition
    from_dict(EmitterTransition, data)


def _replace(obj, **changes):
    from dataclasses import replace
    return replace(obj, **changes)


# JSON round-trip.  Python floats survive json.dumps/json.loads bit-exactly
# (repr is shortest round-tripping), so plain dicts are enough.

_TYPES = {cls.__name__: cls for cls in (CavityMode, CouplingGeometry, EmitterTransition,
                                        DecayModel, RingGeometry)}


def to_dict(obj) -> dict[str, Any]:
    d = asdict(obj)
    if isinstance(obj, CavityMode):
        d["polarization"] = obj.polarization.value
    return d


def from_dict(cls, data: dict[str, Any]):
    if isinstance(cls, str):
        cls = _TYPES[cls]
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(cls.__name__, f"unknown fields {sorted(unknown)}")
    kwargs = dict(data)
    if cls is EmitterTransition and isinstance(kwargs.get("geometry"), dict):
        kwargs["geometry"] = CouplingGeometry(**kwargs["geometry"])
    return cls(**kwargs)
