"""
Discrete Cosserat rods: state, elasticity, internal loads, damping and
position-Verlet stepping.

A :class:`RodState` stores its own connectivity (``element_nodes`` and
``voronoi_elements``), so the same arrays describe an open rod, a closed ring
or a packed block of many rods. Node arrays are (3, N), director arrays are
(3, 3, E) with rows d1, d2, d3.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigurationError, InstabilityError, SingularGeometryError
from .rotations import (
    batch_cross,
    batch_dot,
    batch_matTvec,
    batch_matmul,
    batch_matvec,
    batch_norm,
    frames_from_tangent_normal,
    log_map,
    orthonormalize,
    rotate_directors,
)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def scatter_add(out: np.ndarray, index: np.ndarray, values: np.ndarray) -> None:
    """out[:, index] += values with a fixed, index-ordered accumulation"""
    size = out.shape[-1]
    if out.ndim == 1:
        out += np.bincount(index, weights=values, minlength=size)
        return
    for c in range(out.shape[0]):
        out[c] += np.bincount(index, weights=values[c], minlength=size)


@dataclass(frozen=True)
class RodSlice:
    """Where one rod lives inside a (possibly packed) state"""
    name: str
    group: str
    nodes: slice
    elements: slice
    voronoi: slice
    closed: bool = False

    @property
    def n_elements(self) -> int:
        return self.elements.stop - self.elements.start


@dataclass
class RodState:
    node_positions: np.ndarray
    directors: np.ndarray
    node_velocities: np.ndarray
    angular_velocities: np.ndarray
    reference_lengths: np.ndarray
    current_radii: np.ndarray
    rest_radii: np.ndarray
    element_nodes: np.ndarray
    voronoi_elements: np.ndarray
    rods: List[RodSlice] = field(default_factory=list)

    def __post_init__(self):
        if self.reference_lengths.size < 2:
            raise ConfigurationError("rod.n_elements", "a rod needs at least 2 elements")
        if np.any(self.reference_lengths <= 0):
            raise ConfigurationError("rod.reference_lengths", "must be > 0")
        if np.any(self.current_radii <= 0):
            raise ConfigurationError("rod.radii", "must be > 0")
        if not self.rods:
            self.rods = [RodSlice("rod", "rod", slice(0, self.n_nodes), slice(0, self.n_elements),
                                  slice(0, self.n_voronoi), self.is_closed_topology())]

    # -- construction -------------------------------------------------------

    @classmethod
    def from_centerline(cls, positions: np.ndarray, radii: ArrayLike, normal: ArrayLike,
                        closed: bool = False, name: str = "rod", group: str = "rod") -> "RodState":
        """Rod through ``positions`` with d3 along each chord and d1 from ``normal``.

        For a closed rod the last element joins the last node back to node 0, so
        ``positions`` holds n nodes for n elements.
        """
        positions = np.array(positions, dtype=float)
        n_nodes = positions.shape[1]
        n_elements = n_nodes if closed else n_nodes - 1
        if n_elements < (3 if closed else 2):
            raise ConfigurationError("rod.n_elements", f"too few elements for rod '{name}'")

        first = np.arange(n_elements)
        second = (first + 1) % n_nodes
        element_nodes = np.stack([first, second])
        if closed:
            voronoi = np.stack([first, (first + 1) % n_elements])
        else:
            voronoi = np.stack([first[:-1], first[1:]])

        chords = positions[:, second] - positions[:, first]
        lengths = batch_norm(chords)
        if np.any(lengths <= 0):
            bad = int(np.argmin(lengths))
            raise SingularGeometryError("zero-length element in centerline", rod=name, element=bad)

        normal = np.asarray(normal, dtype=float)
        if normal.ndim == 1:
            normal = np.repeat(normal.reshape(3, 1), n_elements, axis=1)
        directors = frames_from_tangent_normal(chords, normal)

        radii = np.broadcast_to(np.asarray(radii, dtype=float), (n_elements,)).copy()
        rods = [RodSlice(name, group, slice(0, n_nodes), slice(0, n_elements),
                         slice(0, voronoi.shape[1]), closed)]
        return cls(
            node_positions=positions,
            directors=directors,
            node_velocities=np.zeros((3, n_nodes)),
            angular_velocities=np.zeros((3, n_elements)),
            reference_lengths=lengths.copy(),
            current_radii=radii.copy(),
            rest_radii=radii.copy(),
            element_nodes=element_nodes,
            voronoi_elements=voronoi,
            rods=rods,
        )

    @classmethod
    def straight(cls, n_elements: int, length: float, radius: ArrayLike,
                 start: ArrayLike = (0.0, 0.0, 0.0), direction: ArrayLike = (0.0, 0.0, 1.0),
                 normal: ArrayLike = (1.0, 0.0, 0.0), name: str = "rod", group: str = "rod") -> "RodState":
        start = np.asarray(start, dtype=float)
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        s = np.linspace(0.0, length, n_elements + 1)
        positions = start.reshape(3, 1) + direction.reshape(3, 1) * s
        return cls.from_centerline(positions, radius, normal, name=name, group=group)

    @classmethod
    def concatenate(cls, states: Sequence["RodState"]) -> "RodState":
        """Pack several rods into one block; connectivity indices are offset"""
        node_offset = element_offset = voronoi_offset = 0
        rods: List[RodSlice] = []
        element_nodes, voronoi = [], []
        for state in states:
            element_nodes.append(state.element_nodes + node_offset)
            voronoi.append(state.voronoi_elements + element_offset)
            for rod in state.rods:
                rods.append(RodSlice(
                    rod.name, rod.group,
                    slice(rod.nodes.start + node_offset, rod.nodes.stop + node_offset),
                    slice(rod.elements.start + element_offset, rod.elements.stop + element_offset),
                    slice(rod.voronoi.start + voronoi_offset, rod.voronoi.stop + voronoi_offset),
                    rod.closed,
                ))
            node_offset += state.n_nodes
            element_offset += state.n_elements
            voronoi_offset += state.n_voronoi

        def cat(attr: str, axis: int = -1) -> np.ndarray:
            return np.concatenate([getattr(s, attr) for s in states], axis=axis)

        return cls(
            node_positions=cat("node_positions"),
            directors=cat("directors"),
            node_velocities=cat("node_velocities"),
            angular_velocities=cat("angular_velocities"),
            reference_lengths=cat("reference_lengths"),
            current_radii=cat("current_radii"),
            rest_radii=cat("rest_radii"),
            element_nodes=np.concatenate(element_nodes, axis=1),
            voronoi_elements=np.concatenate(voronoi, axis=1),
            rods=rods,
        )

    def copy(self) -> "RodState":
        return RodState(
            node_positions=self.node_positions.copy(),
            directors=self.directors.copy(),
            node_velocities=self.node_velocities.copy(),
            angular_velocities=self.angular_velocities.copy(),
            reference_lengths=self.reference_lengths.copy(),
            current_radii=self.current_radii.copy(),
            rest_radii=self.rest_radii.copy(),
            element_nodes=self.element_nodes.copy(),
            voronoi_elements=self.voronoi_elements.copy(),
            rods=list(self.rods),
        )

    # -- geometry -----------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return self.node_positions.shape[1]

    @property
    def n_elements(self) -> int:
        return self.reference_lengths.shape[0]

    @property
    def n_voronoi(self) -> int:
        return self.voronoi_elements.shape[1]

    def is_closed_topology(self) -> bool:
        return self.n_nodes == self.n_elements

    def element_vectors(self) -> np.ndarray:
        a, b = self.element_nodes
        return self.node_positions[:, b] - self.node_positions[:, a]

    def element_lengths(self) -> np.ndarray:
        return batch_norm(self.element_vectors())

    def element_centers(self) -> np.ndarray:
        a, b = self.element_nodes
        return 0.5 * (self.node_positions[:, a] + self.node_positions[:, b])

    def element_velocities(self) -> np.ndarray:
        a, b = self.element_nodes
        return 0.5 * (self.node_velocities[:, a] + self.node_velocities[:, b])

    def voronoi_lengths(self) -> np.ndarray:
        left, right = self.voronoi_elements
        return 0.5 * (self.reference_lengths[left] + self.reference_lengths[right])

    def update_radii(self) -> None:
        """Incompressible cross-sections: r = r0 / sqrt(l / l0)"""
        stretch = self.element_lengths() / self.reference_lengths
        self.current_radii = self.rest_radii / np.sqrt(np.maximum(stretch, 1e-12))

    def rod(self, name: str) -> RodSlice:
        for rod in self.rods:
            if rod.name == name:
                return rod
        raise KeyError(name)

    def rods_in_group(self, group: str) -> List[RodSlice]:
        return [rod for rod in self.rods if rod.group == group]

    def locate_element(self, element: int) -> Tuple[str, int]:
        for rod in self.rods:
            if rod.elements.start <= element < rod.elements.stop:
                return rod.name, element - rod.elements.start
        return "?", element

    def locate_node(self, node: int) -> Tuple[str, int]:
        for rod in self.rods:
            if rod.nodes.start <= node < rod.nodes.stop:
                return rod.name, node - rod.nodes.start
        return "?", node


def _per_element(value: ArrayLike, n: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), (n,)).copy()


@dataclass
class RodElasticity:
    """Constitutive data of a rod block.

    Rest strains are taken from the construction state, so a freshly built rod
    carries no residual stress. Stiffness and inertia use rest geometry.
    """
    density: np.ndarray
    youngs_modulus: np.ndarray
    shear_modulus: np.ndarray
    shear_correction: np.ndarray
    intrinsic_shear: np.ndarray
    intrinsic_curvature: np.ndarray
    area: np.ndarray
    second_moments: np.ndarray
    shear_matrix: np.ndarray
    bend_matrix: np.ndarray
    mass_second_moment: np.ndarray
    node_mass: np.ndarray
    compression_modulus: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(self.shear_matrix <= 0) or np.any(self.bend_matrix <= 0):
            raise ConfigurationError("rod.elasticity", "stiffness matrices S and B must be positive definite")
        if np.any(self.node_mass <= 0) or np.any(self.mass_second_moment <= 0):
            raise ConfigurationError("rod.density", "masses and mass moments must be positive")

    @classmethod
    def for_state(cls, state: RodState, density: ArrayLike, youngs_modulus: ArrayLike,
                  shear_modulus: Optional[ArrayLike] = None, poisson_ratio: float = 0.5,
                  shear_correction: ArrayLike = 4.0 / 3.0) -> "RodElasticity":
        n = state.n_elements
        E = _per_element(youngs_modulus, n)
        G = E / (2.0 * (1.0 + poisson_ratio)) if shear_modulus is None else _per_element(shear_modulus, n)
        rho = _per_element(density, n)
        alpha = _per_element(shear_correction, n)

        r = state.rest_radii
        area = np.pi * r ** 2
        i1 = np.pi * r ** 4 / 4.0
        second_moments = np.stack([i1, i1, 2.0 * i1])

        shear_matrix = np.stack([alpha * G * area, alpha * G * area, E * area])
        bend_elements = np.stack([E * i1, E * i1, G * 2.0 * i1])
        left, right = state.voronoi_elements
        bend_matrix = 0.5 * (bend_elements[:, left] + bend_elements[:, right])

        element_mass = rho * area * state.reference_lengths
        node_mass = np.zeros(state.n_nodes)
        a, b = state.element_nodes
        scatter_add(node_mass, a, 0.5 * element_mass)
        scatter_add(node_mass, b, 0.5 * element_mass)

        return cls(
            density=rho,
            youngs_modulus=E,
            shear_modulus=G,
            shear_correction=alpha,
            intrinsic_shear=compute_shear_strain(state),
            intrinsic_curvature=compute_curvature(state),
            area=area,
            second_moments=second_moments,
            shear_matrix=shear_matrix,
            bend_matrix=bend_matrix,
            mass_second_moment=rho * second_moments * state.reference_lengths,
            node_mass=node_mass,
        )

    @classmethod
    def concatenate(cls, parts: Sequence["RodElasticity"]) -> "RodElasticity":
        """Pack in the same order as :meth:`RodState.concatenate`"""
        def cat(attr: str) -> np.ndarray:
            return np.concatenate([getattr(p, attr) for p in parts], axis=-1)

        compression = None
        if any(p.compression_modulus is not None for p in parts):
            compression = np.concatenate([
                p.compression_modulus if p.compression_modulus is not None else np.zeros_like(p.area)
                for p in parts
            ])
        return cls(
            density=cat("density"),
            youngs_modulus=cat("youngs_modulus"),
            shear_modulus=cat("shear_modulus"),
            shear_correction=cat("shear_correction"),
            intrinsic_shear=cat("intrinsic_shear"),
            intrinsic_curvature=cat("intrinsic_curvature"),
            area=cat("area"),
            second_moments=cat("second_moments"),
            shear_matrix=cat("shear_matrix"),
            bend_matrix=cat("bend_matrix"),
            mass_second_moment=cat("mass_second_moment"),
            node_mass=cat("node_mass"),
            compression_modulus=compression,
        )


@dataclass
class DampingConfig:
    rayleigh_coefficient: float = 0.0
    laplacian_filter_strength: float = 0.0
    laplacian_filter_interval: int = 1

    def __post_init__(self):
        if self.rayleigh_coefficient < 0:
            raise ConfigurationError("damping.rayleigh_coefficient", "must be >= 0")
        if not 0.0 <= self.laplacian_filter_strength <= 1.0:
            raise ConfigurationError("damping.laplacian_filter_strength", "must lie in [0, 1]")
        if (not isinstance(self.laplacian_filter_interval, (int, np.integer))
                or isinstance(self.laplacian_filter_interval, bool)
                or self.laplacian_filter_interval < 1):
            raise ConfigurationError("damping.laplacian_filter_interval", "must be an integer >= 1")

    @classmethod
    def from_config(cls, section: Dict) -> "DampingConfig":
        section = section or {}
        known = {"rayleigh_coefficient", "laplacian_filter_strength", "laplacian_filter_interval"}
        for key in section:
            if key not in known:
                raise ConfigurationError(f"damping.{key}", "unknown field")
        try:
            return cls(
                rayleigh_coefficient=float(section.get("rayleigh_coefficient", 0.0)),
                laplacian_filter_strength=float(section.get("laplacian_filter_strength", 0.0)),
                laplacian_filter_interval=section.get("laplacian_filter_interval", 1),
            )
        except (TypeError, ValueError) as e:
            raise ConfigurationError("damping", f"not a number: {e}") from e


@dataclass
class InternalLoads:
    """Stress resultants and the nodal/element loads they produce.

    ``node_forces`` are lab-frame, ``element_couples`` local-frame.
    """
    strain: np.ndarray
    curvature: np.ndarray
    internal_force: np.ndarray
    internal_couple: np.ndarray
    node_forces: np.ndarray
    element_couples: np.ndarray


# -- strains -----------------------------------------------------------------

def compute_shear_strain(state: RodState) -> np.ndarray:
    """eps = Q (dx / l0) - e3 per element, local frame"""
    dx = state.element_vectors()
    lengths = batch_norm(dx)
    if np.any(lengths <= 0.0):
        rod, element = state.locate_element(int(np.argmin(lengths)))
        raise SingularGeometryError("zero-length element", rod=rod, element=element)
    strain = batch_matvec(state.directors, dx / state.reference_lengths)
    strain[2] -= 1.0
    return strain


def compute_curvature(state: RodState) -> np.ndarray:
    """kappa = log(Q_l Q_r^T) / D per Voronoi node, local frame"""
    left, right = state.voronoi_elements
    relative = batch_matmul(state.directors[:, :, left],
                            np.transpose(state.directors[:, :, right], (1, 0, 2)))
    return log_map(relative) / state.voronoi_lengths()


# -- loads -------------------------------------------------------------------

def _log_jacobian_coefficient(angle: np.ndarray) -> np.ndarray:
    """1/a^2 - (1 + cos a) / (2 a sin a), the [k]x^2 weight of the inverse log-map Jacobian"""
    small = angle < 1e-4
    safe = np.where(small, 1.0, angle)
    exact = 1.0 / safe ** 2 - (1.0 + np.cos(safe)) / (2.0 * safe * np.sin(safe))
    return np.where(small, 1.0 / 12.0 + angle ** 2 / 720.0, exact)


def internal_loads(state: RodState, elasticity: RodElasticity,
                   axial_override: Optional[ArrayLike] = None) -> InternalLoads:
    """Internal forces and couples of the linear laws.

    ``axial_override`` replaces n3 where it is finite; NaN entries keep the
    linear law, so a block can mix muscle and passive elements.
    """
    strain = compute_shear_strain(state)
    curvature = compute_curvature(state)

    n = elasticity.shear_matrix * (strain - elasticity.intrinsic_shear)
    if axial_override is not None:
        override = np.broadcast_to(np.asarray(axial_override, dtype=float), (state.n_elements,))
        n[2] = np.where(np.isfinite(override), override, n[2])
    tau = elasticity.bend_matrix * (curvature - elasticity.intrinsic_curvature)

    # Node a receives +Q^T n, node b receives -Q^T n
    lab_force = batch_matTvec(state.directors, n)
    forces = np.zeros((3, state.n_nodes))
    a, b = state.element_nodes
    scatter_add(forces, a, lab_force)
    scatter_add(forces, b, -lab_force)

    couples = np.zeros((3, state.n_elements))
    left, right = state.voronoi_elements
    scatter_add(couples, left, tau)
    scatter_add(couples, right, -tau)
    # Inverse Jacobians of the log map, so the couples are the exact gradient of the bending energy
    theta = curvature * state.voronoi_lengths()
    half_transport = 0.5 * batch_cross(theta, tau)
    scatter_add(couples, left, half_transport)
    scatter_add(couples, right, half_transport)
    second_order = _log_jacobian_coefficient(batch_norm(theta)) * batch_cross(theta, batch_cross(theta, tau))
    scatter_add(couples, left, second_order)
    scatter_add(couples, right, -second_order)
    couples += batch_cross(batch_matvec(state.directors, state.element_vectors()), n)

    return InternalLoads(strain, curvature, n, tau, forces, couples)


# -- integration -------------------------------------------------------------

def drift(state: RodState, dt: float, inertia: Optional[np.ndarray] = None) -> None:
    """Free flight for ``dt``: x += dt v, directors and radii follow.

    Without ``inertia`` the directors turn by Q <- exp(-dt [w]x) Q. With the
    (3, E) principal moments of round cross-sections (J1 = J2) the update is
    the exact torque-free flow: w precesses about d3 at c = (J3 - J1) w3 / J1
    and Q <- exp(c dt [e3]x) exp(-dt [w + c e3]x) Q. Kinetic energy is
    unchanged by either form.
    """
    state.node_positions += dt * state.node_velocities
    omega = state.angular_velocities
    if inertia is None:
        state.directors = rotate_directors(state.directors, dt * omega)
    else:
        J1 = 0.5 * (inertia[0] + inertia[1])
        phi = dt * (inertia[2] - J1) / J1 * omega[2]
        spin = dt * omega
        spin[2] += phi
        frame_turn = np.zeros_like(omega)
        frame_turn[2] = -phi
        state.directors = rotate_directors(rotate_directors(state.directors, spin), frame_turn)
        cos_phi, sin_phi = np.cos(phi), np.sin(phi)
        state.angular_velocities = np.stack([
            cos_phi * omega[0] - sin_phi * omega[1],
            sin_phi * omega[0] + cos_phi * omega[1],
            omega[2],
        ])
    state.update_radii()


def step_verlet(state: RodState, elasticity: RodElasticity, loads: InternalLoads,
                external_forces: Optional[np.ndarray] = None,
                external_couples: Optional[np.ndarray] = None,
                dt: float = 0.0) -> RodState:
    """Kick with midpoint loads, then the second half-drift.

    The caller performs the first half-drift,
    ``drift(state, dt / 2, elasticity.mass_second_moment)``, before evaluating
    ``loads``. The gyroscopic term lives in the drift, so the kick is the exact
    flow of the elastic and external loads. ``external_couples`` are
    lab-frame and are rotated into the local frame.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")

    forces = loads.node_forces
    if external_forces is not None:
        forces = forces + external_forces
    state.node_velocities += dt * forces / elasticity.node_mass

    J = elasticity.mass_second_moment
    torque = loads.element_couples
    if external_couples is not None:
        torque = torque + batch_matvec(state.directors, external_couples)
    state.angular_velocities = state.angular_velocities + dt * torque / J

    drift(state, 0.5 * dt, J)
    return state


def reorthonormalize(state: RodState) -> None:
    state.directors = orthonormalize(state.directors)


def check_finite(state: RodState, step: int) -> None:
    """Raise InstabilityError naming the first rod with a non-finite entry"""
    bad_nodes = ~np.all(np.isfinite(state.node_positions) & np.isfinite(state.node_velocities), axis=0)
    if np.any(bad_nodes):
        rod, _ = state.locate_node(int(np.argmax(bad_nodes)))
        raise InstabilityError(rod, step)
    bad_elements = ~(np.all(np.isfinite(state.angular_velocities), axis=0)
                     & np.all(np.isfinite(state.directors), axis=(0, 1)))
    if np.any(bad_elements):
        rod, _ = state.locate_element(int(np.argmax(bad_elements)))
        raise InstabilityError(rod, step)


# -- damping -----------------------------------------------------------------

def laplacian_filter(state: RodState, strength: float, node_mass: Optional[np.ndarray] = None) -> None:
    """Momentum exchange along element edges with weight min(m_a, m_b)/2.

    For uniform masses this is v_i += (s/4)(v_{i-1} - 2 v_i + v_{i+1}).
    Exchanges are pairwise and mass-weighted, so momentum is conserved and
    kinetic energy cannot grow for s in [0, 1].
    """
    if strength <= 0.0:
        return
    mass = np.ones(state.n_nodes) if node_mass is None else node_mass
    a, b = state.element_nodes
    weight = 0.5 * np.minimum(mass[a], mass[b])
    v = state.node_velocities
    exchange = 0.5 * strength * weight * (v[:, b] - v[:, a])
    delta = np.zeros_like(v)
    scatter_add(delta, a, exchange / mass[a])
    scatter_add(delta, b, -exchange / mass[b])
    state.node_velocities = v + delta


def apply_damping(state: RodState, config: DampingConfig, dt: float, step: int = 0,
                  node_mass: Optional[np.ndarray] = None) -> None:
    if config.rayleigh_coefficient > 0.0:
        decay = np.exp(-config.rayleigh_coefficient * dt)
        state.node_velocities *= decay
        state.angular_velocities *= decay
    if config.laplacian_filter_strength > 0.0 and step % config.laplacian_filter_interval == 0:
        laplacian_filter(state, config.laplacian_filter_strength, node_mass)


# -- diagnostics -------------------------------------------------------------

def stable_timestep(state: RodState, elasticity: RodElasticity, safety: float = 0.3,
                    modulus: Optional[ArrayLike] = None) -> float:
    """safety * min(min(l0, r0) sqrt(rho / E_eff)), E_eff the stiffer of E and ``modulus``.

    The length scale is min(l0, r0), not l0 alone: for elements thicker than
    they are long this is stricter than the axial-wave bound
    safety * l0 sqrt(rho / E), because their shear-rotation modes oscillate
    faster than axial waves. For slender elements the two bounds agree.
    """
    effective = elasticity.youngs_modulus
    if elasticity.compression_modulus is not None:
        effective = np.maximum(effective, elasticity.compression_modulus)
    if modulus is not None:
        effective = np.maximum(effective, np.asarray(modulus, dtype=float))
    scale = np.minimum(state.reference_lengths, state.rest_radii)
    return float(safety * np.min(scale * np.sqrt(elasticity.density / effective)))


def kinetic_energy(state: RodState, elasticity: RodElasticity) -> float:
    translational = 0.5 * np.sum(elasticity.node_mass * batch_dot(state.node_velocities, state.node_velocities))
    rotational = 0.5 * np.sum(elasticity.mass_second_moment * state.angular_velocities ** 2)
    return float(translational + rotational)


def elastic_energy(state: RodState, elasticity: RodElasticity) -> float:
    """Energy of the linear laws; muscle axial overrides are not included"""
    de = compute_shear_strain(state) - elasticity.intrinsic_shear
    dk = compute_curvature(state) - elasticity.intrinsic_curvature
    stretch = 0.5 * np.sum(state.reference_lengths * np.sum(elasticity.shear_matrix * de ** 2, axis=0))
    bend = 0.5 * np.sum(state.voronoi_lengths() * np.sum(elasticity.bend_matrix * dk ** 2, axis=0))
    return float(stretch + bend)


def linear_momentum(state: RodState, elasticity: RodElasticity) -> np.ndarray:
    return state.node_velocities @ elasticity.node_mass


def director_orthonormality_error(state: RodState) -> float:
    gram = batch_matmul(state.directors, np.transpose(state.directors, (1, 0, 2)))
    return float(np.max(np.abs(gram - np.eye(3)[:, :, None])))
