"""
Muscle constitutive laws and the coefficient table they are read from.

Active stress is sigma_max * f_a * f_l(eps) * f_v(eps_dot); passive stress is
a polynomial in (eps + 1) under tension and linear (E_c) under compression.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from core.errors import ConfigurationError
from core.logger import logger

N_COEFFS = 9
COEFF_SCHEMA_VERSION = 1
DEFAULT_MIN_STRAIN_RATE = -1.8
SIGMA_MAX = 130e3

# Compression moduli per group; OM and ANC answer to the LM value
COMPRESSION_MODULI = {'LM': 25e3, 'OM': 25e3, 'ANC': 25e3, 'TM': 10e3}
MATERIAL_GROUPS = ('ANC', 'LM', 'TM', 'OM')
FALLBACK_GROUPS = {'OM': 'LM', 'ANC': 'LM'}

# f_v constants
_FV_LENGTHENING_PLATEAU = 1.8
_FV_LENGTHENING_SPAN = 0.8
_FV_LENGTHENING_SLOPE = 7.56
_FV_CURVATURE = 0.25

_log = logger.get_logger('muscle')

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class MuscleMaterial:
    group: str
    sigma_max: float
    active_coeffs: np.ndarray
    passive_coeffs: np.ndarray
    compression_modulus: float
    min_strain_rate: float = DEFAULT_MIN_STRAIN_RATE
    source: str = 'unit'
    passive_offset: float = field(init=False, default=0.0)

    def __post_init__(self):
        object.__setattr__(self, 'active_coeffs', _coeff_array(self.active_coeffs, 'a'))
        object.__setattr__(self, 'passive_coeffs', _coeff_array(self.passive_coeffs, 'b'))
        if not self.sigma_max > 0:
            raise ConfigurationError(f"materials.{self.group}.sigma_max", "must be > 0")
        if not self.compression_modulus > 0:
            raise ConfigurationError(f"materials.{self.group}.E_c", "must be > 0")
        if not self.min_strain_rate < 0:
            raise ConfigurationError(f"materials.{self.group}.min_strain_rate", "must be < 0")
        at_rest = P.polyval(1.0, self.active_coeffs)
        if not np.isfinite(at_rest) or at_rest < 0:
            raise ConfigurationError(f"materials.{self.group}.a", "force-length at zero strain must be finite and >= 0")

        # Tension branch must meet the compression branch at zero strain
        offset = self.sigma_max * P.polyval(1.0, self.passive_coeffs)
        if abs(offset) > 1e-12 * self.sigma_max:
            object.__setattr__(self, 'passive_offset', float(offset))
            logger.log_event('passive_offset', {'group': self.group, 'offset_pa': float(offset),
                                                'source': self.source})
            _log.info(f"Subtracting passive offset {offset:.6g} Pa for group {self.group}")


def _coeff_array(values, name: str) -> np.ndarray:
    coeffs = np.zeros(N_COEFFS)
    values = np.asarray(values, dtype=float).ravel()
    if values.size > N_COEFFS:
        raise ConfigurationError(f"materials.{name}", f"at most {N_COEFFS} coefficients allowed")
    coeffs[:values.size] = values
    return coeffs


# -- constitutive laws -------------------------------------------------------

def force_length(strain: ArrayLike, material: MuscleMaterial) -> ArrayLike:
    """f_l = max(0, sum a_i (eps+1)^i), Horner evaluation"""
    return np.maximum(P.polyval(np.asarray(strain, dtype=float) + 1.0, material.active_coeffs), 0.0)


def force_velocity(strain_rate: ArrayLike, material: MuscleMaterial) -> ArrayLike:
    """Piecewise law in eps_dot* = eps_dot / eps_dot_min; lengthening for eps_dot* < 0"""
    x = np.asarray(strain_rate, dtype=float) / material.min_strain_rate
    lengthening = _FV_LENGTHENING_PLATEAU - _FV_LENGTHENING_SPAN * (1.0 + x) / (
        1.0 - _FV_LENGTHENING_SLOPE * np.minimum(x, 0.0) / _FV_CURVATURE)
    shortening = (1.0 - x) / (1.0 + np.maximum(x, 0.0) / _FV_CURVATURE)
    return np.maximum(np.where(x < 0.0, lengthening, shortening), 0.0)


def passive_stress(strain: ArrayLike, material: MuscleMaterial) -> ArrayLike:
    strain = np.asarray(strain, dtype=float)
    tension = material.sigma_max * P.polyval(strain + 1.0, material.passive_coeffs) - material.passive_offset
    return np.where(strain > 0.0, tension, material.compression_modulus * strain)


def active_stress(activation: ArrayLike, strain: ArrayLike, strain_rate: ArrayLike,
                  material: MuscleMaterial) -> ArrayLike:
    return (np.asarray(activation, dtype=float) * material.sigma_max
            * force_length(strain, material) * force_velocity(strain_rate, material))


def axial_internal_force(area: ArrayLike, sigma_active: ArrayLike, sigma_passive: ArrayLike) -> ArrayLike:
    """n3 = A (sigma_a + sigma_p)"""
    return np.asarray(area, dtype=float) * (np.asarray(sigma_active) + np.asarray(sigma_passive))


# -- coefficient sets --------------------------------------------------------

def _in_stretch_powers(poly_in_strain: Polynomial) -> np.ndarray:
    """Re-express a polynomial in eps as coefficients in (eps + 1)"""
    strain_of_stretch = Polynomial([-1.0, 1.0])
    return _coeff_array(poly_in_strain(strain_of_stretch).coef, 'expanded')


def unit_coefficients(sigma_max: float, compression_modulus: float):
    """Smooth shapes with f_l(0) = 1 and a passive law that starts at E_c"""
    active = _in_stretch_powers(Polynomial([1.0, 0.0, -4.0]) ** 3)
    passive = _in_stretch_powers(Polynomial([0.0, compression_modulus / sigma_max, 0.5, 1.0]))
    return active, passive


def unit_material(group: str, sigma_max: float = SIGMA_MAX,
                  compression_modulus: Optional[float] = None) -> MuscleMaterial:
    key = group if group in COMPRESSION_MODULI else FALLBACK_GROUPS.get(group, 'LM')
    modulus = COMPRESSION_MODULI[key] if compression_modulus is None else compression_modulus
    active, passive = unit_coefficients(sigma_max, modulus)
    return MuscleMaterial(group, sigma_max, active, passive, modulus, source='unit')


_ROW_COLUMNS = 2 + 2 * N_COEFFS + 1
_SCHEMA_DIRECTIVE = re.compile(r'#\s*schema_version\s*:\s*(\S+)')


def load_coefficient_file(path: Union[str, Path]) -> Dict[str, MuscleMaterial]:
    """Parse a coefficient table, one muscle group per row.

    Row layout: ``group sigma_max a0..a8 b0..b8 E_c [min_strain_rate]``.
    Errors carry the 1-based line number.
    """
    path = Path(path)
    field_name = 'materials.coefficient_file'
    if not path.exists():
        raise ConfigurationError(field_name, f"file not found: {path}")

    version = None
    materials: Dict[str, MuscleMaterial] = {}
    with open(path, 'r') as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith('#'):
                match = _SCHEMA_DIRECTIVE.match(line)
                if match and version is None:
                    version = match.group(1)
                    if version != str(COEFF_SCHEMA_VERSION):
                        raise ConfigurationError(field_name, f"unsupported schema_version {version}", line=lineno)
                continue
            if version is None:
                raise ConfigurationError(field_name, "missing '# schema_version: 1' directive", line=lineno)

            columns = line.split()
            if len(columns) not in (_ROW_COLUMNS, _ROW_COLUMNS + 1):
                raise ConfigurationError(
                    field_name, f"expected {_ROW_COLUMNS} or {_ROW_COLUMNS + 1} columns, got {len(columns)}",
                    line=lineno)
            group = columns[0]
            if group not in MATERIAL_GROUPS:
                raise ConfigurationError(field_name, f"unknown muscle group {group!r}", line=lineno)
            if group in materials:
                raise ConfigurationError(field_name, f"duplicate group {group!r}", line=lineno)
            try:
                numbers = [float(c) for c in columns[1:]]
            except ValueError as e:
                raise ConfigurationError(field_name, f"bad number: {e}", line=lineno) from e

            sigma_max = numbers[0]
            active = numbers[1:1 + N_COEFFS]
            passive = numbers[1 + N_COEFFS:1 + 2 * N_COEFFS]
            modulus = numbers[1 + 2 * N_COEFFS]
            min_rate = numbers[2 + 2 * N_COEFFS] if len(numbers) > 2 + 2 * N_COEFFS else DEFAULT_MIN_STRAIN_RATE
            try:
                materials[group] = MuscleMaterial(group, sigma_max, np.array(active), np.array(passive),
                                                  modulus, min_rate, source=str(path.name))
            except ConfigurationError as e:
                raise ConfigurationError(field_name, e.message, line=lineno) from e

    if version is None:
        raise ConfigurationError(field_name, "missing '# schema_version: 1' directive")
    return materials


def resolve_materials(coefficient_file: Optional[str], resolver=None) -> Dict[str, MuscleMaterial]:
    """Materials for every group; OM and ANC fall back to LM"""
    if not coefficient_file or coefficient_file == 'unit':
        return {group: unit_material(group) for group in MATERIAL_GROUPS}

    path = resolver(coefficient_file) if resolver is not None else Path(coefficient_file)
    table = load_coefficient_file(path)
    materials = {}
    for group in MATERIAL_GROUPS:
        if group in table:
            materials[group] = table[group]
        elif FALLBACK_GROUPS.get(group) in table:
            base = table[FALLBACK_GROUPS[group]]
            materials[group] = MuscleMaterial(group, base.sigma_max, base.active_coeffs, base.passive_coeffs,
                                              base.compression_modulus, base.min_strain_rate,
                                              source=f"{base.source}:{base.group}")
        else:
            raise ConfigurationError('materials.coefficient_file', f"no row for group {group}")
    return materials
