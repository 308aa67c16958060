"""
Arm geometry and census specification
"""

import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Tuple

from core.errors import ConfigurationError

DEFAULT_FRACTIONS = {'ANC': 0.1, 'LM': 0.5, 'TM': 0.2, 'OM': 0.2}
# Contact is generated between these rod groups only
DEFAULT_CONTACT_GROUPS = (
    ('ANC', 'LM'), ('LM', 'LM'), ('LM', 'TM'), ('TM', 'OM_L'), ('OM_L', 'OM_R'),
)
# Tapered radii never fall below this fraction of their base value
TAPER_TIP_RATIO = 0.02


@dataclass
class ArmSpec:
    total_length: float = 0.2
    base_diameter: float = 0.024
    taper_angle: float = 87.0
    tapered: bool = True
    tip_radius_ratio: float = TAPER_TIP_RATIO
    oblique_winding_angle: float = 74.0
    cross_section_fractions: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_FRACTIONS))
    n_lm: int = 8
    n_om_per_hand: int = 4
    n_tm_rings: int = 180
    elements_per_rod: int = 40
    ring_elements: int = 16
    om_elements_per_turn: int = 12
    youngs_modulus: float = 2.5e4
    density: float = 1042.0
    poisson_ratio: float = 0.5
    shear_correction: float = 4.0 / 3.0
    materials: Dict[str, str] = field(default_factory=lambda: {
        'ANC': 'ANC', 'LM': 'LM', 'TM': 'TM', 'OM': 'OM'})
    connection_scale: float = 1.0
    contact_scale: float = 1.0
    connection_reach: float = 2.0
    contact_reach: float = 1.2
    overlap_tolerance: float = 0.15
    contact_groups: Tuple[Tuple[str, str], ...] = DEFAULT_CONTACT_GROUPS

    def __post_init__(self):
        for name in ('total_length', 'base_diameter', 'youngs_modulus', 'density', 'shear_correction'):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"arm.{name}", "must be > 0")
        if not 0.0 < self.taper_angle <= 90.0:
            raise ConfigurationError("arm.taper_angle", "must lie in (0, 90]")
        if not 0.0 < self.oblique_winding_angle < 90.0:
            raise ConfigurationError("arm.oblique_winding_angle", "must lie in (0, 90)")
        if not TAPER_TIP_RATIO <= self.tip_radius_ratio <= 1.0:
            raise ConfigurationError("arm.tip_radius_ratio", f"must lie in [{TAPER_TIP_RATIO}, 1]")

        unknown = set(self.cross_section_fractions) - set(DEFAULT_FRACTIONS)
        if unknown:
            raise ConfigurationError("arm.cross_section_fractions", f"unknown groups {sorted(unknown)}")
        fractions = dict(DEFAULT_FRACTIONS)
        fractions.update({k: float(v) for k, v in self.cross_section_fractions.items()})
        if any(v <= 0 for v in fractions.values()):
            raise ConfigurationError("arm.cross_section_fractions", "fractions must be > 0")
        if sum(fractions.values()) > 1.0 + 1e-9:
            raise ConfigurationError("arm.cross_section_fractions",
                                     f"fractions sum to {sum(fractions.values()):.4f} > 1")
        self.cross_section_fractions = fractions

        for name, minimum in (('n_lm', 3), ('n_om_per_hand', 0), ('n_tm_rings', 0),
                              ('elements_per_rod', 2), ('ring_elements', 3), ('om_elements_per_turn', 2)):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
                raise ConfigurationError(f"arm.{name}", f"must be an integer >= {minimum}")
        if self.ring_elements % self.n_lm != 0:
            raise ConfigurationError("arm.ring_elements", f"must be a multiple of n_lm ({self.n_lm})")
        if not 0.0 <= self.poisson_ratio < 0.5 + 1e-12:
            raise ConfigurationError("arm.poisson_ratio", "must lie in [0, 0.5]")
        for name in ('connection_scale', 'contact_scale', 'overlap_tolerance'):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"arm.{name}", "must be >= 0")
        for name in ('connection_reach', 'contact_reach'):
            if not getattr(self, name) >= 1.0:
                raise ConfigurationError(f"arm.{name}", "must be >= 1 (multiples of r_i + r_j)")
        self.contact_groups = tuple(tuple(pair) for pair in self.contact_groups)

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "ArmSpec":
        known = {f.name for f in fields(cls)}
        for key in section or {}:
            if key not in known:
                raise ConfigurationError(f"arm.{key}", "unknown field")
        try:
            return cls(**(section or {}))
        except TypeError as e:
            raise ConfigurationError("arm", str(e)) from e

    # -- derived geometry ---------------------------------------------------

    @property
    def base_radius(self) -> float:
        return 0.5 * self.base_diameter

    @property
    def tip_ratio(self) -> float:
        if not self.tapered or self.taper_angle >= 90.0:
            return 1.0
        return float(self.tip_radius_ratio)

    def taper(self, z):
        """phi(z) = 1 - (1 - tip_ratio) z / L"""
        return 1.0 - (1.0 - self.tip_ratio) * z / self.total_length

    def surface_angle(self) -> float:
        """Angle in degrees between the tapered outer surface and the arm axis"""
        drop = self.base_radius * (1.0 - self.tip_ratio)
        return math.degrees(math.atan2(drop, self.total_length))

    def census(self) -> Dict[str, int]:
        return {
            'ANC': 1,
            'LM': self.n_lm,
            'OM': 2 * self.n_om_per_hand,
            'TM': self.n_tm_rings,
        }

    def n_rods(self) -> int:
        return sum(self.census().values())
