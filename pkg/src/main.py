#!/usr/bin/env python3
"""
Hydrostat command line: run, sweep, validate and analyze
"""

import argparse
import os
import sys
from typing import List, Optional

# Add src directory to path for direct execution
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from colorama import Fore, Style, init as colorama_init

from core.config import load_scenario
from core.errors import ConfigurationError, HydrostatError, TrajectoryFormatError
from core.logger import logger
from scenario import TrajectoryRecord, analyze, available_suites, run, sweep_winding_angle, validate
from scenario.runner import DEFAULT_SWEEP_ANGLES

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class HydrostatApp:
    """Command handlers; each returns a process exit code"""

    def __init__(self):
        self.main_logger = logger.get_logger('main')

    def run_scenario(self, config_path: str, out: str, threads: Optional[int] = None,
                     stride: Optional[int] = None) -> int:
        config = load_scenario(config_path)
        if stride is not None:
            config = config.with_overrides({'output.trajectory_stride': stride})

        print(f"🔄 Running scenario '{config.name}'...")
        record = run(config, threads=threads)
        path = record.write(out)
        print(f"📝 Trajectory: {path} ({record.n_frames} frames)")
        if config.get('output.csv', False):
            print(f"📝 CSV: {record.to_csv(path.with_suffix('.csv'))}")

        footer = record.footer
        print(f"📊 Steps: {footer['steps']}, wall time {footer['wall_time']:.2f} s, "
              f"max penetration {footer['max_penetration_ratio']:.3f}")
        if record.status != 'complete':
            print(f"{Fore.RED}❌ Run became unstable; frames kept up to {footer['failure_frame']}{Style.RESET_ALL}")
            return EXIT_FAILURE
        print(f"{Fore.GREEN}✅ Run complete{Style.RESET_ALL}")
        return EXIT_OK

    def sweep(self, config_path: str, angles: Optional[List[float]] = None, out: Optional[str] = None,
              workers: Optional[int] = None, threads: Optional[int] = None) -> int:
        config = load_scenario(config_path)
        angles = angles or config.get('sweep.angles') or list(DEFAULT_SWEEP_ANGLES)
        workers = workers if workers is not None else int(config.get('sweep.workers', 1))

        print(f"🔄 Sweeping {len(angles)} winding angle(s) with {workers} worker(s)...")
        result = sweep_winding_angle(config, angles, workers=workers, threads=threads)
        print(result.as_table())
        if out:
            print(f"📝 Table: {result.to_csv(out)}")
        if result.argmax is None:
            print(f"{Fore.RED}❌ No sweep row completed{Style.RESET_ALL}")
            return EXIT_FAILURE
        print(f"📈 Maximum steady-state |Tw| at {result.argmax:g} deg")
        return EXIT_OK

    def validate(self, suite: str) -> int:
        report = validate(suite)
        print(report.render(color=sys.stdout.isatty()))
        if report.passed:
            print(f"{Fore.GREEN}✅ Suite '{suite}' passed{Style.RESET_ALL}")
            return EXIT_OK
        print(f"{Fore.RED}❌ Suite '{suite}' failed{Style.RESET_ALL}")
        return EXIT_FAILURE

    def analyze(self, trajectory: str, what: str, stride: int = 1, out: Optional[str] = None) -> int:
        record = TrajectoryRecord.read(trajectory)
        table = analyze(record, what, stride)
        print(table.render())
        if out:
            table.to_csv(out)
            print(f"📝 Table: {out}")
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Hydrostat: active Cosserat-rod octopus arm simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python src/main.py run --config config/scenarios/bending.yaml --out bending.npz
  python src/main.py sweep --config config/scenarios/winding_sweep.yaml --out sweep.csv
  python src/main.py validate --suite cfw
  python src/main.py analyze bending.npz --what bend
        """
    )
    commands = parser.add_subparsers(dest='command', required=True)

    run_parser = commands.add_parser('run', help='Simulate one scenario')
    run_parser.add_argument('--config', required=True, help='Scenario YAML file')
    run_parser.add_argument('--out', required=True, help='Trajectory .npz to write')
    run_parser.add_argument('--threads', type=int, default=None, help='Threads for the knot sums')
    run_parser.add_argument('--stride', type=int, default=None, help='Record every K steps')

    sweep_parser = commands.add_parser('sweep', help='Steady-state twist against OM winding angle')
    sweep_parser.add_argument('--config', required=True, help='Base scenario YAML file')
    sweep_parser.add_argument('--angles', type=float, nargs='+', default=None, help='Winding angles in degrees')
    sweep_parser.add_argument('--out', default=None, help='CSV table to write')
    sweep_parser.add_argument('--workers', type=int, default=None, help='Parallel worker processes')
    sweep_parser.add_argument('--threads', type=int, default=None, help='Threads per run')

    validate_parser = commands.add_parser('validate', help='Run a validation suite')
    validate_parser.add_argument('--suite', required=True, help=f"One of: {', '.join(available_suites())}")

    analyze_parser = commands.add_parser('analyze', help='Post-process a trajectory')
    analyze_parser.add_argument('trajectory', help='Trajectory .npz file')
    analyze_parser.add_argument('--what', required=True, choices=['knot', 'bend'])
    analyze_parser.add_argument('--stride', type=int, default=1, help='Use every K-th frame')
    analyze_parser.add_argument('--out', default=None, help='CSV table to write')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    colorama_init()
    args = build_parser().parse_args(argv)
    app = HydrostatApp()

    try:
        if args.command == 'run':
            return app.run_scenario(args.config, args.out, args.threads, args.stride)
        if args.command == 'sweep':
            return app.sweep(args.config, args.angles, args.out, args.workers, args.threads)
        if args.command == 'validate':
            return app.validate(args.suite)
        return app.analyze(args.trajectory, args.what, args.stride, args.out)
    except ConfigurationError as e:
        app.main_logger.error(f"Configuration error: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TrajectoryFormatError, FileNotFoundError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except HydrostatError as e:
        app.main_logger.error(f"{type(e).__name__}: {e}")
        print(f"💥 {e}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("\n🛑 Interrupted by user", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
