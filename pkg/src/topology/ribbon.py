"""
Open ribbons: an axial curve, a unit normal per node and a radius per node
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from core.errors import SingularGeometryError
from core.rod import RodSlice, RodState
from core.rotations import batch_dot, batch_norm, parallel_transport, signed_angle

DEFAULT_EXTENSION = 1e3
ORTHOGONALITY_TOLERANCE = 1e-8


def segment_tangents(positions: np.ndarray) -> np.ndarray:
    """Unit tangents of the polygon segments, (3, n_nodes - 1)"""
    chords = np.diff(positions, axis=1)
    lengths = batch_norm(chords)
    if np.any(lengths <= 0.0):
        raise SingularGeometryError("zero-length segment has no tangent", element=int(np.argmin(lengths)))
    return chords / lengths


def node_tangents(positions: np.ndarray) -> np.ndarray:
    """End nodes take their segment's tangent; interior nodes the bisector"""
    t = segment_tangents(positions)
    nodes = np.empty_like(positions)
    nodes[:, 0] = t[:, 0]
    nodes[:, -1] = t[:, -1]
    middle = t[:, :-1] + t[:, 1:]
    norm = batch_norm(middle)
    if np.any(norm <= 0.0):
        raise SingularGeometryError("curve folds back on itself", element=int(np.argmin(norm)) + 1)
    nodes[:, 1:-1] = middle / norm
    return nodes


def orthogonalize_normals(positions: np.ndarray, normals: np.ndarray) -> np.ndarray:
    t = node_tangents(positions)
    u = normals - batch_dot(normals, t) * t
    norm = batch_norm(u)
    if np.any(norm <= 1e-12):
        raise SingularGeometryError("normal parallel to the curve tangent", element=int(np.argmin(norm)))
    return u / norm


def _nodes_from_elements(values: np.ndarray) -> np.ndarray:
    """Average element quantities onto nodes; ends copy their element"""
    values = np.asarray(values, dtype=float)
    inner = 0.5 * (values[..., :-1] + values[..., 1:])
    return np.concatenate([values[..., :1], inner, values[..., -1:]], axis=-1)


@dataclass
class RibbonFrame:
    """Axial curve x_i with normals d1_i and radii r_i.

    The auxiliary curve is x_i + r_i d1_i. ``alpha`` is the length of each
    straight end extension in units of the curve length.
    """
    positions: np.ndarray
    normals: np.ndarray
    radii: np.ndarray
    alpha: float = DEFAULT_EXTENSION
    extended: bool = False

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.normals = np.asarray(self.normals, dtype=float)
        n = self.positions.shape[1] if self.positions.ndim == 2 else 0
        if self.positions.shape != (3, n) or n < 2:
            raise ValueError("positions must be (3, n) with n >= 2")
        if self.normals.shape != self.positions.shape:
            raise ValueError("normals must match positions")
        self.radii = np.broadcast_to(np.asarray(self.radii, dtype=float), (n,)).copy()
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        t = node_tangents(self.positions)
        if (np.max(np.abs(batch_norm(self.normals) - 1.0)) > ORTHOGONALITY_TOLERANCE
                or np.max(np.abs(batch_dot(self.normals, t))) > ORTHOGONALITY_TOLERANCE):
            raise ValueError("normals must be unit vectors orthogonal to the node tangents")

    @classmethod
    def from_curve(cls, positions: np.ndarray, normals: np.ndarray, radii,
                   alpha: float = DEFAULT_EXTENSION) -> "RibbonFrame":
        """Build from arbitrary normals, projecting them off the node tangents"""
        positions = np.asarray(positions, dtype=float)
        return cls(positions, orthogonalize_normals(positions, np.asarray(normals, dtype=float)), radii, alpha)

    @classmethod
    def from_elements(cls, positions: np.ndarray, element_d1: np.ndarray, element_radii: np.ndarray,
                      alpha: float = DEFAULT_EXTENSION) -> "RibbonFrame":
        """Node ribbon from per-element d1 and radii of an open rod"""
        return cls.from_curve(positions, _nodes_from_elements(element_d1),
                              _nodes_from_elements(element_radii), alpha)

    @classmethod
    def from_rod(cls, state: RodState, rod: RodSlice, alpha: float = DEFAULT_EXTENSION) -> "RibbonFrame":
        if rod.closed:
            raise ValueError(f"rod '{rod.name}' is closed; ribbons are open curves")
        return cls.from_elements(state.node_positions[:, rod.nodes], state.directors[0][:, rod.elements],
                                 state.current_radii[rod.elements], alpha)

    @classmethod
    def from_trajectory_frame(cls, record, frame: int, rod_name: str = 'ANC',
                              alpha: float = DEFAULT_EXTENSION) -> "RibbonFrame":
        rod = record.rod(rod_name)
        return cls.from_elements(record.positions[frame][:, rod.nodes],
                                 record.directors[frame][0][:, rod.elements],
                                 record.radii[frame][rod.elements], alpha)

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[1]

    def length(self) -> float:
        return float(np.sum(batch_norm(np.diff(self.positions, axis=1))))

    def auxiliary_curve(self) -> np.ndarray:
        return self.positions + self.radii * self.normals

    def transformed(self, rotation: np.ndarray, translation=(0.0, 0.0, 0.0)) -> "RibbonFrame":
        """Rigidly moved copy"""
        shift = np.asarray(translation, dtype=float).reshape(3, 1)
        return replace(self, positions=rotation @ self.positions + shift, normals=rotation @ self.normals)

    def reversed(self) -> "RibbonFrame":
        return replace(self, positions=self.positions[:, ::-1].copy(), normals=self.normals[:, ::-1].copy(),
                       radii=self.radii[::-1].copy())


def extend_curve(ribbon: RibbonFrame, alpha: Optional[float] = None) -> RibbonFrame:
    """Append straight, untwisted segments of length alpha * L at both ends.

    The base segment runs back along the base tangent, the tip segment on
    along the tip tangent; the normals and radii of the end nodes are kept,
    so the auxiliary curve is extended parallel to the axial curve.
    """
    alpha = ribbon.alpha if alpha is None else alpha
    if alpha == 0.0:
        return replace(ribbon, positions=ribbon.positions.copy(), normals=ribbon.normals.copy(),
                       radii=ribbon.radii.copy(), alpha=0.0)
    x = ribbon.positions
    base_tangent = segment_tangents(x[:, :2])[:, 0]
    tip_tangent = segment_tangents(x[:, -2:])[:, 0]
    reach = alpha * ribbon.length()
    base = x[:, 0] - reach * base_tangent
    tip = x[:, -1] + reach * tip_tangent
    positions = np.column_stack([base, x, tip])
    normals = np.column_stack([ribbon.normals[:, 0], ribbon.normals, ribbon.normals[:, -1]])
    radii = np.concatenate([ribbon.radii[:1], ribbon.radii, ribbon.radii[-1:]])
    return RibbonFrame(positions, normals, radii, alpha, extended=True)


def twist(ribbon: RibbonFrame) -> float:
    """Tw = (1/2pi) sum of signed rotations of the normal about the tangent.

    Within a segment the rotation is measured between the normals of its two
    nodes, both projected onto the plane normal to the segment. Across a node
    the previous segment's projected normal is parallel-transported onto the
    next segment before comparing, so bending never shows up as twist.
    """
    t = segment_tangents(ribbon.positions)
    u = ribbon.normals

    def projected(vectors: np.ndarray) -> np.ndarray:
        p = vectors - batch_dot(vectors, t) * t
        return p / batch_norm(p)

    start = projected(u[:, :-1])
    end = projected(u[:, 1:])
    in_segment = signed_angle(start, end, t)
    carried = parallel_transport(end[:, :-1], t[:, :-1], t[:, 1:])
    at_nodes = signed_angle(carried, start[:, 1:], t[:, 1:])
    return float((np.sum(in_segment) + np.sum(at_nodes)) / (2.0 * np.pi))
