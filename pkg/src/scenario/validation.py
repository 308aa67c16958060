"""
Validation suites. Each suite returns rows of (test id, measured, bound, passed);
failures are rows, never exceptions.
"""

import math
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from colorama import Fore, Style
from numpy.polynomial.legendre import leggauss
from tabulate import tabulate

from core.boundary import Clamp
from core.config import PROJECT_ROOT, ScenarioConfig, load_scenario
from core.errors import ConfigurationError, HydrostatError
from core.logger import logger
from core.rod import DampingConfig, RodElasticity, RodState
from core.rotations import rotation_about_axis
from core.simulator import RodSystem, Simulator, system_timestep
from muscle import active_stress, force_velocity, load_coefficient_file, passive_stress, unit_material
from topology import RibbonFrame, cfw_check, link, twist, writhe
from topology.shapes import (
    figure_eight,
    helix_ribbon,
    hopf_link_circles,
    random_ribbon,
    random_smooth_curve,
    twisted_straight_ribbon,
)

from .analysis import (
    analyze,
    bend_is_monotone,
    bend_onset,
    find_crossing_events,
    single_global_maximum,
    tip_deflection,
)
from .runner import run, sweep_winding_angle
from .trajectory import TrajectoryRecord

_log = logger.get_logger('validation')

SCENARIO_DIR = PROJECT_ROOT / 'config' / 'scenarios'
SHIPPED_SCENARIOS = ('rest', 'shortening', 'bending', 'elongation', 'twisting', 'reaching',
                     'twist_injection', 'grasp', 'winding_sweep')

CFW_TOLERANCE = 1e-6
WRITHE_ORACLE_TOLERANCE = 1e-3
HELIX_LINK_TOLERANCE = 0.02
HELIX_PITCHES = (0.0, 10.0, 25.0, 40.0, 55.0, 70.0, 85.0)
PENETRATION_GATE = 0.15
WINDING_OPTIMUM = 70.0
WINDING_TOLERANCE = 5.0
PASSAGE_FRAMES = 40
PASSAGE_TOLERANCE = 0.15


@dataclass
class ValidationRow:
    test_id: str
    measured: float
    bound: float
    passed: bool


@dataclass
class ValidationReport:
    suite: str
    rows: List[ValidationRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(row.passed for row in self.rows)

    def render(self, color: bool = True) -> str:
        def flag(ok: bool) -> str:
            text = 'PASS' if ok else 'FAIL'
            if not color:
                return text
            return f"{Fore.GREEN if ok else Fore.RED}{text}{Style.RESET_ALL}"

        return tabulate([(r.test_id, r.measured, r.bound, flag(r.passed)) for r in self.rows],
                        headers=['test', 'measured', 'bound', 'result'], floatfmt='.6g')

    def as_dicts(self) -> List[Dict[str, object]]:
        return [vars(row) for row in self.rows]


def at_most(test_id: str, measured: float, bound: float) -> ValidationRow:
    measured = float(measured)
    return ValidationRow(test_id, measured, float(bound), bool(measured <= bound))


def at_least(test_id: str, measured: float, bound: float) -> ValidationRow:
    measured = float(measured)
    return ValidationRow(test_id, measured, float(bound), bool(measured >= bound))


# -- registry ----------------------------------------------------------------

SUITES: Dict[str, Callable[[], List[ValidationRow]]] = {}


def suite(name: str):
    """Register a validation suite under ``name``"""
    def register(func: Callable[[], List[ValidationRow]]):
        SUITES[name] = func
        return func
    return register


def available_suites() -> List[str]:
    return list(SUITES)


def validate(name: str) -> ValidationReport:
    if not name or name not in SUITES:
        raise ConfigurationError('suite', f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    _log.info(f"Running validation suite '{name}'")
    try:
        rows = SUITES[name]()
    except HydrostatError as e:
        _log.error(f"Suite '{name}' aborted: {e}")
        rows = [ValidationRow(f"{name}.aborted", math.nan, math.nan, False)]
    report = ValidationReport(name, rows)
    logger.log_event('validation', {'suite': name, 'passed': report.passed, 'rows': report.as_dicts()})
    return report


def shipped_scenario(name: str, overrides: Optional[Dict[str, object]] = None) -> ScenarioConfig:
    config = load_scenario(SCENARIO_DIR / f"{name}.yaml")
    return config.with_overrides(overrides) if overrides else config


# -- references --------------------------------------------------------------

def gauss_writhe_quadrature(curve: np.ndarray, closed: bool = True, order: int = 16) -> float:
    """Writhe by Gauss-Legendre quadrature of the Gauss double integral.

    Independent of the solid-angle kernel: every pair of non-neighbouring
    segments is integrated with ``order`` points per segment.
    """
    points = np.asarray(curve, dtype=float).T
    if closed:
        points = np.vstack([points, points[:1]])
    starts, chords = points[:-1], np.diff(points, axis=0)
    n = chords.shape[0]
    nodes, weights = leggauss(order)
    a = 0.5 * (nodes + 1.0)
    w = 0.5 * weights

    # (n, order, 3) sample points along every segment
    samples = starts[:, None, :] + a[None, :, None] * chords[:, None, :]
    total = 0.0
    for i in range(n):
        for j in range(i + 2, n):
            if closed and i == 0 and j == n - 1:
                continue
            diff = samples[i][:, None, :] - samples[j][None, :, :]
            triple = diff @ np.cross(chords[i], chords[j])
            total += float(w @ (triple / np.linalg.norm(diff, axis=2) ** 3) @ w)
    return 2.0 * total / (4.0 * math.pi)


def cantilever_benchmark(n_elements: int = 100, length: float = 1.0, radius: float = 0.1,
                         youngs_modulus: float = 1e6, density: float = 1000.0,
                         tip_force: float = 0.25, safety: float = 0.3) -> Dict[str, float]:
    """Clamped rod with a transverse tip load, settled by near-critical damping.

    The clamp holds node 0 and the frame of element 0, so the bending length
    is L - l/2 while all n elements shear.
    """
    state = RodState.straight(n_elements, length, radius, name='cantilever')
    elasticity = RodElasticity.for_state(state, density, youngs_modulus)
    forces = np.zeros((3, state.n_nodes))
    forces[0, -1] = tip_force
    system = RodSystem(state, elasticity, [Clamp(state, [0], [0])], node_forces=forces)

    element = length / n_elements
    bending = youngs_modulus * math.pi * radius ** 4 / 4.0
    shear = float(elasticity.shear_matrix[0, 0])
    analytic = tip_force * (length - 0.5 * element) ** 3 / (3.0 * bending) + tip_force * length / shear

    omega = 1.875 ** 2 * math.sqrt(bending / (density * math.pi * radius ** 2 * length ** 4))
    simulator = Simulator(system, system_timestep(system, safety),
                          DampingConfig(rayleigh_coefficient=2.2 * omega), name='cantilever')
    simulator.run(12.0 / omega)
    measured = float(state.node_positions[0, -1])
    return {'measured': measured, 'analytic': analytic, 'relative_error': abs(measured - analytic) / analytic}


# -- fast suites -------------------------------------------------------------

@suite('muscle')
def muscle_suite() -> List[ValidationRow]:
    rows = []
    materials = {'unit': unit_material('LM'),
                 'shipped': load_coefficient_file(PROJECT_ROOT / 'config' / 'materials' / 'octopus_muscles_v1.txt')['LM']}
    for label, m in materials.items():
        rate_min = m.min_strain_rate
        independent = 1.8 - 0.8 * 0.75 / (1.0 + 7.56 * 0.25 / 0.25)
        fv_quarter = float(force_velocity(-0.25 * rate_min, m))
        rows += [
            at_most(f"{label}.fv_isometric", abs(float(force_velocity(0.0, m)) - 1.0), 0.0),
            at_most(f"{label}.fv_max_shortening", abs(float(force_velocity(rate_min, m))), 0.0),
            at_most(f"{label}.fv_lengthening_quarter", abs(fv_quarter - independent), 1e-12),
            at_most(f"{label}.fv_lengthening_quarter_1730", abs(fv_quarter - 1.730), 1e-3),
            at_most(f"{label}.active_peak", abs(float(active_stress(1.0, 0.0, 0.0, m)) - 130e3), 1e-6),
            at_most(f"{label}.passive_compression", abs(float(passive_stress(-0.1, m)) + 2.5e3), 1e-9),
        ]
    return rows


@suite('cfw')
def cfw_suite(n_ribbons: int = 50, seed: int = 2024) -> List[ValidationRow]:
    rows = [at_most('cfw.twisted_straight', cfw_check(twisted_straight_ribbon(2.0)).cfw_residual, CFW_TOLERANCE)]
    rng = np.random.default_rng(seed)
    residuals = [cfw_check(random_ribbon(rng)).cfw_residual for _ in range(n_ribbons)]
    rows.append(at_most(f"cfw.random_ribbons[{n_ribbons}].max", max(residuals), CFW_TOLERANCE))
    return rows


@suite('writhe')
def writhe_suite(n_curves: int = 20, seed: int = 7) -> List[ValidationRow]:
    rng = np.random.default_rng(seed)
    errors = []
    for _ in range(n_curves):
        curve = random_smooth_curve(rng, n_nodes=50, closed=True)
        errors.append(abs(writhe(curve, closed=True) - gauss_writhe_quadrature(curve, closed=True)))
    theta = np.linspace(0.0, 1.5 * np.pi, 60)
    planar = np.stack([np.cos(theta) * (1 + 0.3 * theta), np.sin(theta), np.zeros_like(theta)])
    return [
        at_most(f"writhe.oracle[{n_curves}].max", max(errors), WRITHE_ORACLE_TOLERANCE),
        at_most('writhe.planar', abs(writhe(planar)), 1e-6),
    ]


def helix_family(pitches: Sequence[float] = HELIX_PITCHES, turns: int = 2) -> np.ndarray:
    """Rows of (pitch, Lk, Wr, Tw, residual) across the helix family"""
    return np.array([(p, *cfw_check(helix_ribbon(p, turns)).as_row()) for p in pitches])


@suite('helix')
def helix_suite() -> List[ValidationRow]:
    table = helix_family()
    lk, wr, tw = table[:, 1], table[:, 2], table[:, 3]
    return [
        at_most('helix.link_constant', float(np.max(np.abs(lk - 2.0))), HELIX_LINK_TOLERANCE),
        at_most('helix.twist_decreasing', float(np.max(np.diff(tw))), 0.0),
        at_least('helix.writhe_increasing', float(np.min(np.diff(wr))), 0.0),
        at_most('helix.straight_twist', abs(float(tw[0]) - 2.0), 1e-6),
        at_least('helix.near_planar_writhe', float(wr[-1]), 1.5),
    ]


@suite('topology-invariants')
def topology_invariants_suite(seed: int = 11) -> List[ValidationRow]:
    rng = np.random.default_rng(seed)
    ribbon = random_ribbon(rng)
    x, aux = ribbon.positions, ribbon.auxiliary_curve()
    rotation = rotation_about_axis(np.array([1.0, 2.0, 0.5]), 0.7)
    shift = np.array([[0.3], [-0.2], [0.5]])
    moved_x, moved_aux = rotation @ x + shift, rotation @ aux + shift

    a, b = hopf_link_circles(200)
    far = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    return [
        at_most('invariant.link_rigid_motion', abs(link(x, aux) - link(moved_x, moved_aux)), 1e-10),
        at_most('invariant.writhe_rigid_motion', abs(writhe(x) - writhe(moved_x)), 1e-10),
        at_most('invariant.link_reversal', abs(link(x[:, ::-1], aux) + link(x, aux)), 1e-10),
        at_most('invariant.writhe_reversal', abs(writhe(x[:, ::-1]) - writhe(x)), 1e-10),
        at_most('invariant.hopf_link', abs(abs(link(a, b, closed=True)) - 1.0), 1e-3),
        at_most('invariant.distant_segments', abs(link(far, far + np.array([[5.0], [3.0], [0.0]]))), 1e-6),
        at_most('invariant.straight_twist', abs(twist(twisted_straight_ribbon(2.0)) - 2.0), 1e-9),
    ]


@suite('crossing')
def crossing_suite() -> List[ValidationRow]:
    """Strand passage detection on a writhe series with one -4 jump and on a figure-eight
    whose strands pass through each other"""
    times = np.linspace(0.0, 1.0, 101)
    drift = 0.02 * np.sin(2.0 * np.pi * times)
    step = np.where(times >= 0.5, -4.0, 0.0)
    writhe_series = 2.0 + drift + step
    link_series = 2.0 + step
    events = find_crossing_events(times, link_series, writhe_series)
    rows = [at_most('crossing.event_count', abs(len(events) - 1), 0)]
    if events:
        rows += [
            at_most('crossing.writhe_jump', abs(events[0].delta_writhe + 4.0), 0.1),
            at_most('crossing.link_jump', abs(events[0].delta_link + 4.0), 0.1),
            at_most('crossing.frame', abs(events[0].frame - 50), 0),
        ]

    heights = np.linspace(0.2, -0.2, PASSAGE_FRAMES)
    link_series, writhe_series = strand_passage_series(heights)
    events = find_crossing_events(np.arange(heights.size, dtype=float), link_series, writhe_series)
    rows.append(at_most('crossing.passage.event_count', abs(len(events) - 1), 0))
    if events:
        rows += [
            at_most('crossing.passage.writhe_jump', abs(abs(events[0].delta_writhe) - 2.0), PASSAGE_TOLERANCE),
            at_most('crossing.passage.link_jump', abs(events[0].delta_link - events[0].delta_writhe),
                    PASSAGE_TOLERANCE),
            at_most('crossing.passage.frame', abs(events[0].frame - heights.size // 2), 0),
        ]
    return rows


def strand_passage_series(heights: Sequence[float], n_nodes: int = 400,
                          offset: float = 1e-3) -> Tuple[np.ndarray, np.ndarray]:
    """Lk with an offset auxiliary curve and Wr of a figure-eight for each strand gap"""
    link_series, writhe_series = [], []
    for height in heights:
        curve, normals = figure_eight(float(height), n_nodes)
        link_series.append(link(curve, curve + offset * normals, closed=True))
        writhe_series.append(writhe(curve, closed=True))
    return np.asarray(link_series), np.asarray(writhe_series)


@suite('rod')
def rod_suite() -> List[ValidationRow]:
    result = cantilever_benchmark()
    return [at_most('rod.cantilever_n100', result['relative_error'], 0.01)]


# -- simulation suites (desk scale) -----------------------------------------

def arm_length_change(record: TrajectoryRecord) -> float:
    anc = record.rod('ANC')
    height = record.positions[:, 2, anc.nodes.stop - 1] - record.positions[:, 2, anc.nodes.start]
    return float(height[-1] - height[0])


def final_twist(record: TrajectoryRecord) -> float:
    return twist(RibbonFrame.from_trajectory_frame(record, record.n_frames - 1))


def _completed(test_id: str, record: TrajectoryRecord) -> Optional[ValidationRow]:
    if record.status == 'complete':
        return None
    return ValidationRow(f"{test_id}.status", float(record.footer.get('failure_frame') or -1), 0.0, False)


@suite('primitives')
def primitives_suite() -> List[ValidationRow]:
    rows = []
    length = float(shipped_scenario('shortening').get('arm.total_length'))

    record = run(shipped_scenario('shortening'))
    rows.append(_completed('primitives.shortening', record)
                or ValidationRow('primitives.shortening.dL', arm_length_change(record), 0.0,
                                 arm_length_change(record) < 0.0))

    record = run(shipped_scenario('elongation'))
    rows.append(_completed('primitives.elongation', record)
                or ValidationRow('primitives.elongation.dL', arm_length_change(record), 0.0,
                                 arm_length_change(record) > 0.0))

    record = run(shipped_scenario('bending'))
    failed = _completed('primitives.bending', record)
    if failed:
        rows.append(failed)
    else:
        deflection = tip_deflection(record, direction=(0.0, 1.0))
        along = abs(deflection['along'])
        rows.append(at_least('primitives.bending.deflection', along, 0.1 * length))
        rows.append(at_most('primitives.bending.out_of_plane', abs(deflection['across']), 0.05 * along))

    # right-handed OM contraction unwinds the fibres: left-handed arm twist
    record = run(shipped_scenario('twisting'))
    failed = _completed('primitives.twisting', record)
    if failed:
        rows.append(failed)
    else:
        tw = final_twist(record)
        rows.append(ValidationRow('primitives.twisting.Tw', tw, -0.1, tw < -0.1))
    return rows


@suite('penetration')
def penetration_suite(duration: Optional[float] = None) -> List[ValidationRow]:
    rows = []
    for name in SHIPPED_SCENARIOS:
        overrides = {'simulation.duration': duration} if duration else None
        record = run(shipped_scenario(name, overrides))
        rows.append(at_most(f"penetration.{name}", record.footer['max_penetration_ratio'], PENETRATION_GATE))
    return rows


@suite('winding')
def winding_suite() -> List[ValidationRow]:
    base = shipped_scenario('winding_sweep')
    angles = base.get('sweep.angles')
    workers = int(base.get('sweep.workers', 1))
    rows = []
    for tapered in (False, True):
        config = base.with_overrides({'arm.tapered': tapered})
        result = sweep_winding_angle(config, angles, workers=workers)
        label = 'tapered' if tapered else 'untapered'
        argmax = result.argmax if result.argmax is not None else math.nan
        rows.append(ValidationRow(f"winding.{label}.argmax", argmax, WINDING_OPTIMUM,
                                  bool(abs(argmax - WINDING_OPTIMUM) <= WINDING_TOLERANCE)))
    return rows


@suite('bend')
def bend_suite() -> List[ValidationRow]:
    record = run(shipped_scenario('reaching'))
    failed = _completed('bend.reaching', record)
    if failed:
        return [failed]
    table = analyze(record, 'bend')
    # rows from the first frame with a formed bend; frame 0 is the straight rest state
    start = max(1, bend_onset(table.column('kappa_peak')))
    t, s = table.column('t')[start:], table.column('s_bend')[start:]
    v = np.gradient(s, t) if s.size > 1 else np.zeros_like(s)
    return [
        at_least('bend.tracked_frames', s.size, 3),
        at_most('bend.backward_step', float(-np.min(np.diff(s), initial=0.0)), 0.0),
        ValidationRow('bend.monotone', float(bend_is_monotone(s)), 1.0, bend_is_monotone(s)),
        at_least('bend.velocity_min', float(np.min(v)) if v.size else math.nan, 0.0),
        ValidationRow('bend.single_maximum', float(single_global_maximum(v)), 1.0, single_global_maximum(v)),
    ]


@suite('determinism')
def determinism_suite(duration: float = 0.002) -> List[ValidationRow]:
    config = shipped_scenario('shortening', {'simulation.duration': duration,
                                             'output.trajectory_stride': 10})
    first, second = run(config, threads=1), run(config, threads=1)
    arrays = ('times', 'positions', 'directors', 'velocities', 'omegas', 'radii', 'activations')
    mismatched = sum(not np.array_equal(getattr(first, a), getattr(second, a)) for a in arrays)

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / 'roundtrip.npz'
        first.write(path)
        loaded = TrajectoryRecord.read(path)
    roundtrip = sum(not np.array_equal(getattr(first, a), getattr(loaded, a)) for a in arrays)
    return [
        at_most('determinism.identical_runs', mismatched, 0),
        at_most('determinism.roundtrip_arrays', roundtrip, 0),
        at_most('determinism.roundtrip_header', int(loaded.header != first.header), 0),
        ValidationRow('determinism.config_hash', 1.0, 1.0, loaded.matches(config.config_hash())),
    ]
