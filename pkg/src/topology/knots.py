"""
Link, writhe and the Calugareanu-Fuller-White check by segment-pair solid angles
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numba
import numpy as np
from numba import njit, prange

from core.errors import IllConditionedWarning
from core.logger import logger

from .ribbon import RibbonFrame, extend_curve, twist

_log = logger.get_logger('topology')

# Segment pairs closer than this fraction of the median segment length warn
RELATIVE_TOLERANCE = 1e-6


@njit(cache=True)
def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


@njit(cache=True)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(cache=True)
def _unit(v):
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n < 1e-300:
        return v * 0.0, False
    return v / n, True


@njit(cache=True)
def _clipped_asin(x):
    return math.asin(min(1.0, max(-1.0, x)))


@njit(cache=True)
def segment_pair_solid_angle(p1, p2, p3, p4):
    """Signed solid angle of segment p1p2 against segment p3p4.

    Sum of the arcsines between the four face normals of the tetrahedron,
    signed by (r34 x r12) . r13. Coplanar or touching pairs give 0.
    """
    r12 = p2 - p1
    r34 = p4 - p3
    r13 = p3 - p1
    r14 = p4 - p1
    r23 = p3 - p2
    r24 = p4 - p2
    n1, ok1 = _unit(_cross(r13, r14))
    n2, ok2 = _unit(_cross(r14, r24))
    n3, ok3 = _unit(_cross(r24, r23))
    n4, ok4 = _unit(_cross(r23, r13))
    if not (ok1 and ok2 and ok3 and ok4):
        return 0.0
    omega = (_clipped_asin(_dot(n1, n2)) + _clipped_asin(_dot(n2, n3))
             + _clipped_asin(_dot(n3, n4)) + _clipped_asin(_dot(n4, n1)))
    s = _dot(_cross(r34, r12), r13)
    if s > 0.0:
        return omega
    if s < 0.0:
        return -omega
    return 0.0


@njit(cache=True, parallel=True)
def _pair_sum(a, b, self_pairs):
    """Sum of solid angles over segment pairs; rows run in parallel.

    With ``self_pairs`` the curves are one curve and only i < j pairs that
    are not neighbours count. Row sums are reduced in row order.
    """
    n_a = a.shape[0] - 1
    n_b = b.shape[0] - 1
    rows = np.zeros(n_a)
    for i in prange(n_a):
        total = 0.0
        start = i + 2 if self_pairs else 0
        for j in range(start, n_b):
            total += segment_pair_solid_angle(a[i], a[i + 1], b[j], b[j + 1])
        rows[i] = total
    acc = 0.0
    for i in range(n_a):
        acc += rows[i]
    return acc


@njit(cache=True)
def _segment_distance(p1, p2, p3, p4):
    """Closest distance between segments p1p2 and p3p4"""
    d1 = p2 - p1
    d2 = p4 - p3
    r = p1 - p3
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    denom = a * e - b * b
    s = 0.0
    if denom > 1e-300:
        s = min(1.0, max(0.0, (b * f - c * e) / denom))
    t = (b * s + f) / e if e > 1e-300 else 0.0
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a)) if a > 1e-300 else 0.0
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a)) if a > 1e-300 else 0.0
    diff = p1 + s * d1 - (p3 + t * d2)
    return math.sqrt(_dot(diff, diff))


@njit(cache=True, parallel=True)
def _closest_pair(a, b, self_pairs, wrap):
    n_a = a.shape[0] - 1
    n_b = b.shape[0] - 1
    best = np.full(n_a, np.inf)
    partner = np.zeros(n_a, dtype=np.int64)
    for i in prange(n_a):
        start = i + 2 if self_pairs else 0
        stop = n_b - 1 if (wrap and i == 0) else n_b
        for j in range(start, stop):
            d = _segment_distance(a[i], a[i + 1], b[j], b[j + 1])
            if d < best[i]:
                best[i] = d
                partner[i] = j
    i = int(np.argmin(best))
    return i, partner[i], best[i]


def _prepare(curve, closed: bool) -> np.ndarray:
    """(3, n) curve to contiguous (n, 3) points, repeating the first point when closed"""
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 2 or curve.shape[0] != 3 or curve.shape[1] < 2:
        raise ValueError("curves must be (3, n) arrays with n >= 2")
    if closed:
        curve = np.column_stack([curve, curve[:, :1]])
    return np.ascontiguousarray(curve.T)


def _warn_if_close(a: np.ndarray, b: np.ndarray, self_pairs: bool, tolerance: Optional[float],
                   closed: bool = False) -> None:
    if self_pairs and a.shape[0] < 4:
        return
    if tolerance is None:
        lengths = np.linalg.norm(np.diff(a, axis=0), axis=1)
        tolerance = RELATIVE_TOLERANCE * float(np.median(lengths))
    i, j, distance = _closest_pair(a, b, self_pairs, self_pairs and closed)
    if distance < tolerance:
        message = f"segments {i} and {j} are {distance:.3e} apart (tolerance {tolerance:.3e})"
        _log.warning(message)
        warnings.warn(message, IllConditionedWarning, stacklevel=3)


def link(curve_a, curve_b, closed: bool = False, tolerance: Optional[float] = None) -> float:
    """Lk = (1/4pi) sum over all segment pairs of the signed solid angle"""
    a = _prepare(curve_a, closed)
    b = _prepare(curve_b, closed)
    _warn_if_close(a, b, False, tolerance)
    return float(_pair_sum(a, b, False) / (4.0 * np.pi))


def writhe(curve, closed: bool = False, tolerance: Optional[float] = None) -> float:
    """Wr = 2 (1/4pi) sum over i < j, neighbours and self-pairs excluded.

    Neighbouring segments share a node and are coplanar. On a closed curve the
    last and first segments are neighbours too.
    """
    c = _prepare(curve, closed)
    _warn_if_close(c, c, True, tolerance, closed)
    total = _pair_sum(c, c, True)
    if closed and c.shape[0] > 3:
        # the pair (first, last) shares the closing node
        total -= segment_pair_solid_angle(c[0], c[1], c[-2], c[-1])
    return float(2.0 * total / (4.0 * np.pi))


@dataclass(frozen=True)
class KnotQuantities:
    link: float
    writhe: float
    twist: float
    cfw_residual: float

    def as_row(self) -> Tuple[float, float, float, float]:
        return self.link, self.writhe, self.twist, self.cfw_residual


def knot_quantities(ribbon: RibbonFrame, extend: bool = True) -> KnotQuantities:
    """Lk of axial and auxiliary curves, Wr of the axial curve and Tw of the ribbon"""
    extended = extend_curve(ribbon) if extend and not ribbon.extended else ribbon
    lk = link(extended.positions, extended.auxiliary_curve())
    wr = writhe(extended.positions)
    tw = twist(extended)
    return KnotQuantities(lk, wr, tw, abs(lk - (wr + tw)))


def cfw_check(ribbon: RibbonFrame) -> KnotQuantities:
    """Extend the ribbon and report Lk, Wr, Tw with |Lk - (Wr + Tw)|"""
    return knot_quantities(ribbon, extend=True)


def set_threads(n: int) -> None:
    """Threads used by the pair sums"""
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
