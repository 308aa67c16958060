"""
Reference ribbons and curves with known link, writhe and twist
"""

import math
from typing import Tuple

import numpy as np

from core.rotations import batch_cross, batch_dot, parallel_transport

from .ribbon import DEFAULT_EXTENSION, RibbonFrame, node_tangents


def twisted_straight_ribbon(turns: float, length: float = 1.0, n_nodes: int = 101,
                            radius: float = None, alpha: float = DEFAULT_EXTENSION) -> RibbonFrame:
    """Straight ribbon along +z whose normal turns ``turns`` times, right-handed for turns > 0"""
    s = np.linspace(0.0, 1.0, n_nodes)
    positions = np.stack([np.zeros(n_nodes), np.zeros(n_nodes), length * s])
    angle = 2.0 * np.pi * turns * s
    normals = np.stack([np.cos(angle), np.sin(angle), np.zeros(n_nodes)])
    radius = 0.01 * length if radius is None else radius
    return RibbonFrame(positions, normals, radius, alpha)


def helix_ribbon(pitch_angle: float, turns: int = 2, length: float = 1.0, nodes_per_turn: int = 64,
                 radius_fraction: float = 0.25, alpha: float = DEFAULT_EXTENSION) -> RibbonFrame:
    """Helix of fixed arc length with axial leads at both ends.

    ``pitch_angle`` is the angle in degrees between the helix tangent and its
    axis: 0 is a straight twisted ribbon, 90 a flat spiral of ``turns`` loops.
    The normal is the Frenet normal (towards the axis). Two straight leads on
    the axis keep the end tangents along +z, so the extended ribbon has
    Lk = turns for every pitch while twist converts into writhe.
    """
    if pitch_angle <= 0.0:
        return twisted_straight_ribbon(turns, length, turns * nodes_per_turn + 1, alpha=alpha)
    beta = math.radians(pitch_angle)
    R = length * math.sin(beta) / (2.0 * math.pi * turns)
    H = length * math.cos(beta)
    lead = R

    n = turns * nodes_per_turn + 1
    psi = np.linspace(0.0, 2.0 * np.pi * turns, n)
    helix = np.stack([R * np.cos(psi), R * np.sin(psi), H * psi / (2.0 * np.pi * turns)])
    helix_normals = -np.stack([np.cos(psi), np.sin(psi), np.zeros(n)])

    end = helix[:, -1]
    positions = np.column_stack([
        [0.0, 0.0, -2.0 * lead], [0.0, 0.0, -lead],
        helix,
        [0.0, 0.0, end[2] + lead], [0.0, 0.0, end[2] + 2.0 * lead],
    ])
    normals = np.column_stack([
        helix_normals[:, :1], helix_normals[:, :1],
        helix_normals,
        helix_normals[:, -1:], helix_normals[:, -1:],
    ])
    return RibbonFrame.from_curve(positions, normals, radius_fraction * R, alpha)


def hopf_link_circles(n: int = 200) -> Tuple[np.ndarray, np.ndarray]:
    """Two unit circles, each through the other's centre (closed, n points each)"""
    theta = 2.0 * np.pi * np.arange(n) / n
    a = np.stack([np.cos(theta), np.sin(theta), np.zeros(n)])
    b = np.stack([1.0 + np.cos(theta), np.zeros(n), np.sin(theta)])
    return a, b


def figure_eight(height: float, n_nodes: int = 400) -> Tuple[np.ndarray, np.ndarray]:
    """Closed figure-eight (x, y, z) = (cos t, sin 2t / 2, height sin t) and unit normals.

    The two strands cross over the origin with vertical gap 2 |height|, so
    flipping the sign of ``height`` passes one strand through the other. The
    normals are e_z made orthogonal to the tangent.
    """
    t = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    curve = np.stack([np.cos(t), 0.5 * np.sin(2.0 * t), height * np.sin(t)])
    tangents = np.stack([-np.sin(t), np.cos(2.0 * t), height * np.cos(t)])
    tangents /= np.linalg.norm(tangents, axis=0)
    normals = np.array([[0.0], [0.0], [1.0]]) - tangents[2] * tangents
    return curve, normals / np.linalg.norm(normals, axis=0)


def random_smooth_curve(rng: np.random.Generator, n_nodes: int = 50, n_modes: int = 3,
                        closed: bool = False, amplitude: float = 0.2) -> np.ndarray:
    """Low-mode Fourier curve.

    Closed curves perturb a unit circle (``n_nodes`` distinct points, the
    closing segment is implied); open curves perturb a unit segment along +z.
    """
    if closed:
        theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        curve = np.stack([np.cos(theta), np.sin(theta), np.zeros(n_nodes)])
        phases = theta
        modes = range(2, n_modes + 2)
    else:
        s = np.linspace(0.0, 1.0, n_nodes)
        curve = np.stack([np.zeros(n_nodes), np.zeros(n_nodes), s])
        phases = np.pi * s
        modes = range(1, n_modes + 1)
    for k in modes:
        a = rng.normal(size=(3, 1))
        b = rng.normal(size=(3, 1))
        curve = curve + amplitude / k * (a * np.cos(k * phases) + b * np.sin(k * phases))
    return curve


def random_ribbon(rng: np.random.Generator, n_nodes: int = 80, turns: float = None,
                  radius: float = 5e-4, alpha: float = DEFAULT_EXTENSION) -> RibbonFrame:
    """Random open curve with a normal that twists ``turns`` times relative to transport.

    Lk of the axial and auxiliary polygons approaches Wr + Tw as the ribbon
    radius shrinks against the segment length (about 0.0127 at 80 nodes);
    the default keeps |Lk - (Wr + Tw)| well under 1e-6.
    """
    positions = random_smooth_curve(rng, n_nodes)
    turns = rng.uniform(-2.0, 2.0) if turns is None else turns
    t = node_tangents(positions)

    # Bishop frame: carry the first normal node to node by parallel transport
    seed = np.cross(t[:, 0], rng.normal(size=3))
    transported = np.empty_like(positions)
    transported[:, 0] = seed / np.linalg.norm(seed)
    for i in range(1, n_nodes):
        carried = parallel_transport(transported[:, i - 1:i], t[:, i - 1:i], t[:, i:i + 1])[:, 0]
        transported[:, i] = carried / np.linalg.norm(carried)

    s = np.linspace(0.0, 1.0, n_nodes)
    angle = 2.0 * np.pi * turns * s + 0.3 * np.sin(np.pi * s * rng.integers(1, 4))
    binormal = batch_cross(t, transported)
    normals = np.cos(angle) * transported + np.sin(angle) * binormal
    normals = normals - batch_dot(normals, t) * t
    return RibbonFrame.from_curve(positions, normals, radius, alpha)
