"""
Arm construction: rod geometry, coupling generation and audits
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.spatial import cKDTree

from core.boundary import Clamp
from core.errors import ConstructionError
from core.logger import logger
from core.rod import RodElasticity, RodSlice, RodState
from plugins.connections import ConnectionSet
from plugins.contact import ContactPairSet
from plugins.pressure import PressureCouplingSet

from .assembly import ArmAssembly
from .spec import ArmSpec

_log = logger.get_logger('arm')


@dataclass(frozen=True)
class ArmGeometry:
    """Base radii and radial offsets derived from the area fractions"""
    anc_radius: float
    lm_radius: float
    lm_offset: float
    tm_radius: float
    ring_radius: float
    om_radius: float
    om_left_offset: float
    om_right_offset: float


def arm_geometry(spec: ArmSpec) -> ArmGeometry:
    R = spec.base_radius
    f = spec.cross_section_fractions
    r_a = R * math.sqrt(f['ANC'])
    r_l = R * math.sqrt(f['LM'] / spec.n_lm)
    inner = r_a + 2.0 * r_l
    # 4 pi R_ring r_T = f_TM pi R^2 with R_ring = inner + r_T
    r_t = 0.5 * (-inner + math.sqrt(inner ** 2 + f['TM'] * R ** 2))
    ring = inner + r_t
    n_om = max(2 * spec.n_om_per_hand, 1)
    cos_w = math.cos(math.radians(spec.oblique_winding_angle))
    r_o = R * math.sqrt(f['OM'] * cos_w / n_om)
    left = ring + r_t + r_o
    return ArmGeometry(r_a, r_l, r_a + r_l, r_t, ring, r_o, left, left + 2.0 * r_o)


def _element_centers_z(z_nodes: np.ndarray) -> np.ndarray:
    return 0.5 * (z_nodes[:-1] + z_nodes[1:])


def _straight_rod(spec: ArmSpec, offset: float, angle: float, radius: float,
                  name: str, group: str) -> RodState:
    z = np.linspace(0.0, spec.total_length, spec.elements_per_rod + 1)
    phi = spec.taper(z)
    radial = np.array([math.cos(angle), math.sin(angle), 0.0])
    positions = np.stack([offset * phi * radial[0], offset * phi * radial[1], z])
    radii = radius * spec.taper(_element_centers_z(z))
    normal = radial if offset > 0 else np.array([1.0, 0.0, 0.0])
    return RodState.from_centerline(positions, radii, normal, name=name, group=group)


def _ring(spec: ArmSpec, geometry: ArmGeometry, z: float, name: str) -> RodState:
    n = spec.ring_elements
    phi = float(spec.taper(z))
    # Element j is centred on angle 2 pi j / n, aligned with the LMs
    theta = 2.0 * np.pi * (np.arange(n) - 0.5) / n
    vertex = geometry.ring_radius * phi / math.cos(math.pi / n)
    positions = np.stack([vertex * np.cos(theta), vertex * np.sin(theta), np.full(n, z)])
    centers = 2.0 * np.pi * np.arange(n) / n
    normals = np.stack([np.cos(centers), np.sin(centers), np.zeros(n)])
    return RodState.from_centerline(positions, geometry.tm_radius * phi, normals, closed=True,
                                    name=name, group='TM')


def helix_angle_integral(spec: ArmSpec, helix_radius: float, z) -> np.ndarray:
    """int_0^z dz / R_h(z) for a helix whose radius follows the taper"""
    z = np.asarray(z, dtype=float)
    k = (1.0 - spec.tip_ratio) / spec.total_length
    if k == 0.0:
        return z / helix_radius
    return -np.log(1.0 - k * z) / (k * helix_radius)


def _helix_heights(spec: ArmSpec, helix_radius: float, n_elements: int) -> np.ndarray:
    """Node heights spaced uniformly in winding angle"""
    total = helix_angle_integral(spec, helix_radius, spec.total_length)
    samples = np.linspace(0.0, total, n_elements + 1)
    k = (1.0 - spec.tip_ratio) / spec.total_length
    if k == 0.0:
        return samples * helix_radius
    return (1.0 - np.exp(-k * helix_radius * samples)) / k


def om_turns(spec: ArmSpec, helix_radius: float) -> float:
    tan_w = math.tan(math.radians(spec.oblique_winding_angle))
    return float(tan_w * helix_angle_integral(spec, helix_radius, spec.total_length) / (2.0 * math.pi))


def _helix(spec: ArmSpec, helix_radius: float, radius: float, start_angle: float,
           handedness: int, name: str, group: str) -> RodState:
    turns = om_turns(spec, helix_radius)
    n = max(spec.elements_per_rod, int(math.ceil(turns * spec.om_elements_per_turn)))
    z = _helix_heights(spec, helix_radius, n)
    tan_w = math.tan(math.radians(spec.oblique_winding_angle))
    psi = start_angle + handedness * tan_w * helix_angle_integral(spec, helix_radius, z)
    rho = helix_radius * spec.taper(z)
    positions = np.stack([rho * np.cos(psi), rho * np.sin(psi), z])
    centers = 0.5 * (positions[:, :-1] + positions[:, 1:])
    normals = np.stack([centers[0], centers[1], np.zeros(n)])
    radii = radius * spec.taper(_element_centers_z(z))
    return RodState.from_centerline(positions, radii, normals, name=name, group=group)


def _build_rods(spec: ArmSpec, geometry: ArmGeometry) -> List[RodState]:
    rods = [_straight_rod(spec, 0.0, 0.0, geometry.anc_radius, 'ANC', 'ANC')]
    for k in range(spec.n_lm):
        angle = 2.0 * math.pi * k / spec.n_lm
        rods.append(_straight_rod(spec, geometry.lm_offset, angle, geometry.lm_radius, f'LM_{k}', 'LM'))
    for k in range(spec.n_om_per_hand):
        angle = 2.0 * math.pi * k / spec.n_om_per_hand
        rods.append(_helix(spec, geometry.om_left_offset, geometry.om_radius, angle, -1, f'OM_L_{k}', 'OM_L'))
    for k in range(spec.n_om_per_hand):
        angle = 2.0 * math.pi * (k + 0.5) / spec.n_om_per_hand
        rods.append(_helix(spec, geometry.om_right_offset, geometry.om_radius, angle, +1, f'OM_R_{k}', 'OM_R'))
    for k in range(spec.n_tm_rings):
        z = (k + 0.5) * spec.total_length / spec.n_tm_rings
        rods.append(_ring(spec, geometry, z, f'TM_{k}'))
    return rods


# -- coupling generation -----------------------------------------------------

def _elements_of(rods: Sequence[RodSlice]) -> np.ndarray:
    if not rods:
        return np.zeros(0, dtype=int)
    return np.concatenate([np.arange(r.elements.start, r.elements.stop) for r in rods])


def _generate_connections(spec: ArmSpec, state: RodState) -> Tuple[np.ndarray, np.ndarray]:
    centers = state.element_centers()
    radii = state.current_radii
    pairs_i: List[int] = []
    pairs_j: List[int] = []

    anc = state.rods_in_group('ANC')[0]
    lms = state.rods_in_group('LM')
    for lm in lms:
        for i in range(spec.elements_per_rod):
            pairs_i.append(anc.elements.start + i)
            pairs_j.append(lm.elements.start + i)
    for k, lm in enumerate(lms):
        neighbour = lms[(k + 1) % len(lms)]
        for i in range(spec.elements_per_rod):
            pairs_i.append(lm.elements.start + i)
            pairs_j.append(neighbour.elements.start + i)

    rings = state.rods_in_group('TM')
    stride = spec.ring_elements // spec.n_lm
    lm_trees = [cKDTree(centers[:, lm.elements].T) for lm in lms]
    for ring in rings:
        for k, lm in enumerate(lms):
            element = ring.elements.start + k * stride
            _, nearest = lm_trees[k].query(centers[:, element])
            pairs_i.append(element)
            pairs_j.append(lm.elements.start + int(nearest))

    ring_elements = _elements_of(rings)
    left = _elements_of(state.rods_in_group('OM_L'))
    right = _elements_of(state.rods_in_group('OM_R'))
    if ring_elements.size and left.size:
        tree = cKDTree(centers[:, ring_elements].T)
        _, nearest = tree.query(centers[:, left].T)
        pairs_i.extend(left.tolist())
        pairs_j.extend(ring_elements[nearest].tolist())

    targets = np.concatenate([left, ring_elements])
    if targets.size and right.size:
        tree = cKDTree(centers[:, targets].T)
        distance, nearest = tree.query(centers[:, right].T)
        partner = targets[nearest]
        reach = spec.connection_reach * (radii[right] + radii[partner])
        keep = distance <= reach
        pairs_i.extend(right[keep].tolist())
        pairs_j.extend(partner[keep].tolist())

    return np.asarray(pairs_i, dtype=int), np.asarray(pairs_j, dtype=int)


def _generate_contacts(spec: ArmSpec, state: RodState, element_group: np.ndarray,
                       element_rod: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    centers = state.element_centers()
    radii = state.current_radii
    found: Set[Tuple[int, int]] = set()
    for group_a, group_b in spec.contact_groups:
        a_elements = np.flatnonzero(element_group == group_a)
        b_elements = np.flatnonzero(element_group == group_b)
        if a_elements.size == 0 or b_elements.size == 0:
            continue
        tree = cKDTree(centers[:, b_elements].T)
        search = spec.contact_reach * (radii[a_elements].max() + radii[b_elements].max())
        neighbours = tree.query_ball_point(centers[:, a_elements].T, r=search)
        for a, hits in zip(a_elements, neighbours):
            for hit in hits:
                b = int(b_elements[hit])
                if element_rod[a] == element_rod[b]:
                    continue
                distance = np.linalg.norm(centers[:, b] - centers[:, a])
                if distance > spec.contact_reach * (radii[a] + radii[b]):
                    continue
                found.add((min(int(a), b), max(int(a), b)))
    ordered = sorted(found)
    return (np.asarray([p[0] for p in ordered], dtype=int),
            np.asarray([p[1] for p in ordered], dtype=int))


def _check_rest_overlap(spec: ArmSpec, state: RodState, contact_i: np.ndarray, contact_j: np.ndarray,
                        connected_rods: Set[Tuple[int, int]], element_rod: np.ndarray) -> None:
    centers = state.element_centers()
    radii = state.current_radii
    for i, j in zip(contact_i, contact_j):
        touching = radii[i] + radii[j]
        overlap = (touching - np.linalg.norm(centers[:, j] - centers[:, i])) / touching
        rods = (min(element_rod[i], element_rod[j]), max(element_rod[i], element_rod[j]))
        if overlap > spec.overlap_tolerance and rods not in connected_rods:
            rod_i, local_i = state.locate_element(int(i))
            rod_j, local_j = state.locate_element(int(j))
            raise ConstructionError(
                f"rest overlap {overlap:.3f} of (r_i + r_j) between {rod_i}[{local_i}] and "
                f"{rod_j}[{local_j}] exceeds tolerance {spec.overlap_tolerance}")


def build_arm(spec: ArmSpec) -> ArmAssembly:
    """Assemble the rods, couplings and base clamps of an arm at rest"""
    geometry = arm_geometry(spec)
    rods = _build_rods(spec, geometry)
    state = RodState.concatenate(rods)

    elasticity = RodElasticity.concatenate([
        RodElasticity.for_state(rod, spec.density, spec.youngs_modulus, poisson_ratio=spec.poisson_ratio,
                                shear_correction=spec.shear_correction)
        for rod in rods
    ])

    element_group = np.empty(state.n_elements, dtype='<U4')
    element_rank = np.zeros(state.n_elements, dtype=int)
    element_rod = np.zeros(state.n_elements, dtype=int)
    ranks: Dict[str, int] = {}
    for index, rod in enumerate(state.rods):
        element_group[rod.elements] = rod.group
        element_rank[rod.elements] = ranks.get(rod.group, 0)
        element_rod[rod.elements] = index
        ranks[rod.group] = ranks.get(rod.group, 0) + 1
    arc_length = state.element_centers()[2].copy()

    conn_i, conn_j = _generate_connections(spec, state)
    connections = ConnectionSet.from_rest(state, conn_i, conn_j, elasticity.youngs_modulus,
                                          scale=spec.connection_scale)
    connected_rods = {(min(element_rod[i], element_rod[j]), max(element_rod[i], element_rod[j]))
                      for i, j in zip(conn_i, conn_j)}

    contact_i, contact_j = _generate_contacts(spec, state, element_group, element_rod)
    _check_rest_overlap(spec, state, contact_i, contact_j, connected_rods, element_rod)
    contact_pairs = ContactPairSet.from_rest(state, contact_i, contact_j, elasticity.youngs_modulus,
                                             scale=spec.contact_scale)

    pressure = PressureCouplingSet.for_elements(np.flatnonzero(np.isin(element_group, ('ANC', 'LM'))))

    base_nodes = [rod.nodes.start for rod in state.rods if rod.group in ('ANC', 'LM')]
    clamps = [Clamp(state, base_nodes)]

    if spec.tip_ratio < 1.0:
        angle = spec.surface_angle()
        logger.log_event('taper', {'taper_angle': spec.taper_angle, 'tip_ratio': spec.tip_ratio,
                                   'surface_angle_deg': angle})
        _log.info(f"Tapered arm: tip ratio {spec.tip_ratio}, surface-to-axis angle {angle:.2f} deg")

    assembly = ArmAssembly(
        spec=spec,
        state=state,
        elasticity=elasticity,
        element_group=element_group,
        element_rank=element_rank,
        arc_length=arc_length,
        connections=connections,
        contact_pairs=contact_pairs,
        pressure=pressure,
        clamps=clamps,
    )
    _log.info(f"Built arm: {spec.n_rods()} rods, {state.n_elements} elements, "
              f"{len(connections)} connections, {len(contact_pairs)} contact pairs")
    return assembly


def attach_muscles(assembly: ArmAssembly, materials, schedules=()) -> None:
    """Bind muscle laws and schedules; the step bound then uses their stiffness"""
    from muscle.field import MuscleField

    assembly.muscle = MuscleField(assembly.element_group, assembly.element_rank, assembly.arc_length,
                                  assembly.spec.total_length, materials, schedules)
    assembly.elasticity.compression_modulus = assembly.muscle.tangent_modulus_bound()


# -- audits ------------------------------------------------------------------

def om_winding_angle(assembly: ArmAssembly, group: str = 'OM_L') -> float:
    """Angle in degrees between the first OM element and the arm axis"""
    rod = assembly.state.rods_in_group(group)[0]
    tangent = assembly.state.directors[2, :, rod.elements.start]
    return float(math.degrees(math.acos(min(1.0, abs(tangent[2])))))


def cross_section_audit(assembly: ArmAssembly) -> Dict[str, float]:
    """Area fractions of each muscle group at the arm base"""
    spec = assembly.spec
    state = assembly.state
    base_area = math.pi * spec.base_radius ** 2
    centers = state.element_centers()
    areas = {'ANC': 0.0, 'LM': 0.0, 'TM': 0.0, 'OM': 0.0}

    def unscaled(element: int) -> float:
        return float(state.rest_radii[element] / spec.taper(centers[2, element]))

    for rod in state.rods:
        e = rod.elements.start
        r = unscaled(e)
        if rod.group in ('ANC', 'LM'):
            areas[rod.group] += math.pi * r ** 2
        elif rod.group in ('OM_L', 'OM_R'):
            cos_w = abs(state.directors[2, 2, e])
            areas['OM'] += math.pi * r ** 2 / cos_w

    rings = state.rods_in_group('TM')
    if rings:
        e = rings[0].elements.start
        ring_radius = float(np.hypot(centers[0, e], centers[1, e]) / spec.taper(centers[2, e]))
        areas['TM'] = 4.0 * math.pi * ring_radius * unscaled(e)
    return {group: area / base_area for group, area in areas.items()}
