"""
Scenario runner: build an arm from a config, step it and record the trajectory
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tabulate import tabulate

from arm import ArmAssembly, ArmSpec, attach_muscles, build_arm
from core import __version__
from core.config import ScenarioConfig, config_manager
from core.errors import ConfigurationError, HydrostatError, InstabilityError
from core.logger import logger
from core.plugin import plugin_manager
from core.rod import DampingConfig
from core.simulator import Simulator, system_timestep
from muscle import resolve_materials, schedules_from_config
from plugins.obstacles import ENGINE_DEFAULT, ContactParams, obstacles_from_config
from topology import RibbonFrame, knot_quantities, set_threads, twist

from .trajectory import TrajectoryRecord, TrajectoryRecorder

_log = logger.get_logger('runner')

# Fraction of the recorded frames averaged for the steady-state twist
STEADY_STATE_FRACTION = 0.2
DEFAULT_SWEEP_ANGLES = tuple(float(a) for a in range(40, 90, 5))


def provenance(config: ScenarioConfig) -> List[Dict[str, str]]:
    """Values the run uses that are engine defaults rather than scenario choices"""
    notes = []
    if config.get('arm.youngs_modulus') is None:
        notes.append({'parameter': 'arm.youngs_modulus', 'value': str(ArmSpec.youngs_modulus),
                      'provenance': ENGINE_DEFAULT})
    obstacles = config.section('interactions.obstacles')
    if obstacles.get('enabled') and ContactParams.from_config(obstacles).provenance == ENGINE_DEFAULT:
        notes.append({'parameter': 'interactions.obstacles', 'value': 'stiffness/damping/friction',
                      'provenance': ENGINE_DEFAULT})
    return notes


def prepare(config: ScenarioConfig) -> Tuple[ArmAssembly, Simulator]:
    """Assemble the arm, its muscles, obstacles and interaction pipeline"""
    assembly = build_arm(ArmSpec.from_config(config.section('arm')))
    materials = resolve_materials(config.get('materials.coefficient_file'), config.resolve_path)
    attach_muscles(assembly, materials, schedules_from_config(config.get('activations', []) or []))
    assembly.obstacles = obstacles_from_config(config.get('obstacles', []) or [])

    assembly.plugins = plugin_manager.create_pipeline(config.section('interactions'))
    for plugin in assembly.plugins:
        plugin.setup(assembly)

    bound = system_timestep(assembly, 1.0)
    dt = config.get('simulation.dt')
    if dt is None:
        dt = float(config.get('simulation.dt_safety')) * bound
    elif float(dt) > bound:
        raise ConfigurationError('simulation.dt', f"{dt} exceeds the stability bound {bound:.3e}")

    simulator = Simulator(assembly, float(dt), DampingConfig.from_config(config.section('damping')),
                          reorthonormalize_interval=int(config.get('simulation.reorthonormalize_interval', 100)),
                          name=config.name)
    return assembly, simulator


def anc_ribbon(assembly: ArmAssembly) -> RibbonFrame:
    return RibbonFrame.from_rod(assembly.state, assembly.anc)


def run(config: ScenarioConfig, threads: Optional[int] = None,
        progress: Optional[Callable[[Simulator], None]] = None) -> TrajectoryRecord:
    """Simulate a scenario and return its record.

    An instability ends the run early; the record then holds the frames up to
    the failure, ``status`` is ``unstable`` and ``failure_frame`` the index
    the next frame would have had.
    """
    threads = config_manager.default_threads() if threads is None else threads
    set_threads(threads)
    assembly, simulator = prepare(config)

    header = {
        'scenario': config.name,
        'label': str(config.get('label', '')),
        'config_hash': config.config_hash(),
        'engine_version': __version__,
        'dt': simulator.dt,
        'seed': config.seed,
        'threads': int(threads),
        'provenance': provenance(config),
        'plugins': [plugin.name for plugin in assembly.plugins],
    }
    for note in header['provenance']:
        logger.log_event('provenance', note)
    logger.log_event('run_start', {k: header[k] for k in ('scenario', 'config_hash', 'engine_version',
                                                          'dt', 'provenance')})
    _log.info(f"Running '{config.name}' with dt={simulator.dt:.3e} s on {threads} thread(s)")

    recorder = TrajectoryRecorder(header, assembly.state)
    trajectory_stride = int(config.get('output.trajectory_stride', 1))
    knot_stride = int(config.get('output.knot_stride', 1))
    online_knots = bool(config.get('output.online_knots', False))

    def capture(sim: Simulator) -> None:
        recorder.capture(sim.time, sim.state, assembly.activation(sim.time))

    def on_step(sim: Simulator) -> None:
        if sim.step_count % trajectory_stride == 0:
            capture(sim)
        if online_knots and sim.step_count % knot_stride == 0:
            recorder.capture_knots(sim.time, knot_quantities(anc_ribbon(assembly)))
        if progress is not None:
            progress(sim)

    capture(simulator)
    status, failure_frame = 'complete', None
    try:
        simulator.run(float(config.get('simulation.duration')), callback=on_step)
    except InstabilityError as e:
        status, failure_frame = 'unstable', recorder.n_frames
        e.frame = failure_frame
        logger.log_event('instability', {'rod': e.rod, 'step': e.step, 'frame': failure_frame})
        _log.error(f"{e}; keeping {recorder.n_frames} frames")

    footer = {
        'status': status,
        'failure_frame': failure_frame,
        'steps': simulator.step_count,
        'wall_time': simulator.wall_time,
        'max_penetration_ratio': simulator.max_penetration_ratio,
        'energy': simulator.energies() if status == 'complete' else {
            'kinetic': math.nan, 'elastic': math.nan, 'dissipated': simulator.dissipated},
        'plugins': plugin_manager.get_plugin_status(),
    }
    record = recorder.finish(footer)
    logger.log_event('run_end', record.footer)
    return record


# -- winding-angle sweep -----------------------------------------------------

def steady_state_twist(record: TrajectoryRecord, fraction: float = STEADY_STATE_FRACTION) -> float:
    """Mean |Tw| of the ANC ribbon over the last ``fraction`` of the frames"""
    if record.n_frames == 0:
        return math.nan
    first = min(record.n_frames - 1, int(math.floor((1.0 - fraction) * record.n_frames)))
    values = [abs(twist(RibbonFrame.from_trajectory_frame(record, f))) for f in range(first, record.n_frames)]
    return float(np.mean(values))


@dataclass
class SweepRow:
    angle: float
    steady_twist: float
    status: str
    error: str = ''


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)

    @property
    def argmax(self) -> Optional[float]:
        valid = [row for row in self.rows if row.status == 'complete' and math.isfinite(row.steady_twist)]
        if not valid:
            return None
        return max(valid, key=lambda row: row.steady_twist).angle

    def as_table(self) -> str:
        return tabulate([(r.angle, r.steady_twist, r.status, r.error) for r in self.rows],
                        headers=['angle_deg', 'steady_abs_twist', 'status', 'error'], floatfmt='.6g')

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['angle_deg', 'steady_abs_twist', 'status', 'error'])
            for r in self.rows:
                writer.writerow([r.angle, repr(r.steady_twist), r.status, r.error])
        return path


def _sweep_row(base: ScenarioConfig, angle: float, threads: Optional[int]) -> SweepRow:
    try:
        config = base.with_overrides({'arm.oblique_winding_angle': float(angle)})
        record = run(config, threads=threads)
    except HydrostatError as e:
        return SweepRow(float(angle), math.nan, 'failed', str(e))
    if record.status != 'complete':
        return SweepRow(float(angle), math.nan, record.status,
                        f"failed at frame {record.footer.get('failure_frame')}")
    return SweepRow(float(angle), steady_state_twist(record), 'complete')


def sweep_winding_angle(base: ScenarioConfig, angles: Sequence[float] = DEFAULT_SWEEP_ANGLES,
                        workers: int = 1, threads: Optional[int] = None) -> SweepResult:
    """Steady-state |Tw| of the ANC for each OM winding angle; failed rows keep going"""
    angles = [float(a) for a in angles]
    for angle in angles:
        if not 0.0 < angle < 90.0:
            raise ConfigurationError('sweep.angles', f"angle {angle} outside (0, 90)")

    if workers > 1 and len(angles) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, [base] * len(angles), angles, [threads] * len(angles)))
    else:
        rows = [_sweep_row(base, angle, threads) for angle in angles]

    result = SweepResult(rows)
    _log.info(f"Winding sweep over {len(angles)} angles: argmax {result.argmax}")
    return result
