"""
Configuration management for Hydrostat

Engine defaults come from ``config/default_config.yaml``; scenario files are
merged on top of them and validated into a :class:`ScenarioConfig`.
"""

import copy
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .errors import ConfigurationError

SCHEMA_VERSION = 1
SUPPORTED_SCHEMA_VERSIONS = (1,)

PROJECT_ROOT = Path(__file__).resolve().parents[2]

# Used when no default_config.yaml can be found
_BUILTIN_DEFAULTS: Dict[str, Any] = {
    "global": {
        "log_level": "INFO",
        "threads": 1,
    },
    "logging": {
        "file": {"enabled": False, "path": "logs/hydrostat.log"},
        "json": {"enabled": False, "path": "logs/events.json"},
    },
    "simulation": {
        "dt_safety": 0.3,
        "reorthonormalize_interval": 100,
    },
    "interactions": {},
}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _dot_get(tree: Dict[str, Any], key: str, default: Any = None) -> Any:
    value: Any = tree
    for k in key.split('.'):
        if isinstance(value, dict) and k in value:
            value = value[k]
        else:
            return default
    return value


def read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a YAML file, turning syntax errors into field/line diagnostics"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError("config", f"file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        line = mark.line + 1 if mark is not None else None
        column = f" at column {mark.column + 1}" if mark is not None else ""
        raise ConfigurationError("config", f"YAML syntax error{column}: {e.problem}", line=line) from e
    except yaml.YAMLError as e:
        raise ConfigurationError("config", f"YAML error: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError("config", "top level must be a mapping")
    return data


class ConfigManager:
    """Loads engine defaults and answers dot-separated lookups"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or self._find_config_file()
        self.config: Dict[str, Any] = {}
        self.load_config()

    def _find_config_file(self) -> Optional[str]:
        """Find the engine configuration in standard locations"""
        search_paths = [
            Path("config/default_config.yaml"),
            Path("../config/default_config.yaml"),
            PROJECT_ROOT / "config" / "default_config.yaml",
        ]

        for path in search_paths:
            if path.exists():
                return str(path)

        return None

    def load_config(self) -> None:
        """Load configuration from YAML, or fall back to built-in defaults"""
        if self.config_path is None:
            self.config = copy.deepcopy(_BUILTIN_DEFAULTS)
            return
        self.config = deep_merge(_BUILTIN_DEFAULTS, read_yaml(self.config_path))

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-separated key"""
        return _dot_get(self.config, key, default)

    def set(self, key: str, value: Any) -> None:
        """Set configuration value by dot-separated key"""
        keys = key.split('.')
        config = self.config

        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value

    def get_enabled_plugins(self) -> Dict[str, Dict[str, Any]]:
        """Get all enabled interaction plugins from configuration"""
        return enabled_interactions(self.get('interactions', {}))

    def default_threads(self) -> int:
        """Thread count from HYDROSTAT_THREADS, else the engine default"""
        env = os.environ.get("HYDROSTAT_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError as e:
                raise ConfigurationError("HYDROSTAT_THREADS", f"not an integer: {env!r}") from e
            if threads < 1:
                raise ConfigurationError("HYDROSTAT_THREADS", "must be >= 1")
            return threads
        return int(self.get('global.threads', 1))


def enabled_interactions(section: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    enabled = {}
    for name, params in (section or {}).items():
        if isinstance(params, dict) and params.get('enabled', False):
            enabled[name] = params
    return enabled


def _resolve_path(value: str, base_dir: Path) -> Path:
    path = Path(value)
    if path.is_absolute():
        return path
    for candidate in (base_dir / path, Path.cwd() / path, PROJECT_ROOT / path):
        if candidate.exists():
            return candidate
    return base_dir / path


class ScenarioConfig:
    """A validated scenario: engine defaults with one scenario file merged on top"""

    def __init__(self, data: Dict[str, Any], source: Optional[Path] = None):
        self.data = data
        self.source = source
        self.base_dir = source.parent if source is not None else Path.cwd()

    @classmethod
    def from_dict(cls, scenario: Dict[str, Any], source: Optional[Path] = None,
                  defaults: Optional[Dict[str, Any]] = None) -> "ScenarioConfig":
        merged = deep_merge(defaults if defaults is not None else config_manager.config, scenario)
        config = cls(merged, source)
        config.validate()
        return config

    def get(self, key: str, default: Any = None) -> Any:
        return _dot_get(self.data, key, default)

    def section(self, key: str) -> Dict[str, Any]:
        value = self.get(key, {})
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise ConfigurationError(key, "expected a mapping")
        return value

    def with_overrides(self, overrides: Dict[str, Any]) -> "ScenarioConfig":
        """Copy of this config with dotted-key overrides applied and re-validated"""
        data = copy.deepcopy(self.data)
        for key, value in overrides.items():
            node = data
            parts = key.split('.')
            for k in parts[:-1]:
                node = node.setdefault(k, {})
            node[parts[-1]] = value
        config = ScenarioConfig(data, self.source)
        config.validate()
        return config

    def resolve_path(self, value: str) -> Path:
        return _resolve_path(value, self.base_dir)

    def config_hash(self) -> str:
        canonical = json.dumps(self.data, sort_keys=True, default=str, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    @property
    def name(self) -> str:
        return str(self.get('name', self.source.stem if self.source else 'scenario'))

    @property
    def seed(self) -> int:
        return int(self.get('seed', 0))

    # -- validation ---------------------------------------------------------

    def _positive(self, key: str, strict: bool = True) -> float:
        value = self.get(key)
        if value is None:
            raise ConfigurationError(key, "missing required value")
        try:
            value = float(value)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(key, f"not a number: {value!r}") from e
        if strict and not value > 0:
            raise ConfigurationError(key, f"must be > 0, got {value}")
        if not strict and value < 0:
            raise ConfigurationError(key, f"must be >= 0, got {value}")
        return value

    def _stride(self, key: str) -> None:
        value = self.get(key, 1)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigurationError(key, f"stride must be an integer >= 1, got {value!r}")

    def validate(self) -> None:
        """Check every scenario invariant, naming the offending field"""
        version = self.get('schema_version')
        if version is None:
            raise ConfigurationError("schema_version", "missing")
        if version not in SUPPORTED_SCHEMA_VERSIONS:
            raise ConfigurationError(
                "schema_version", f"unsupported version {version!r}; "
                f"supported: {list(SUPPORTED_SCHEMA_VERSIONS)}")

        self._positive('simulation.duration')
        if self.get('simulation.dt') is not None:
            self._positive('simulation.dt')
        safety = self._positive('simulation.dt_safety')
        if safety > 1.0:
            raise ConfigurationError('simulation.dt_safety', "must be <= 1")
        interval = self.get('simulation.reorthonormalize_interval', 100)
        if not isinstance(interval, int) or interval < 1:
            raise ConfigurationError('simulation.reorthonormalize_interval', "must be an integer >= 1")
        self._stride('output.trajectory_stride')
        self._stride('output.knot_stride')

        coefficient_file = self.get('materials.coefficient_file')
        if coefficient_file and coefficient_file != 'unit':
            if not self.resolve_path(str(coefficient_file)).exists():
                raise ConfigurationError('materials.coefficient_file',
                                         f"file not found: {coefficient_file}")

        # Typed sections validate themselves with dotted field names
        from arm.spec import ArmSpec
        from core.rod import DampingConfig
        from muscle.activation import schedules_from_config
        from plugins.drag import DragParams
        from plugins.obstacles import ContactParams, obstacles_from_config

        ArmSpec.from_config(self.section('arm'))
        DampingConfig.from_config(self.section('damping'))
        schedules_from_config(self.get('activations', []) or [])
        obstacles_from_config(self.get('obstacles', []) or [])
        ContactParams.from_config(self.section('interactions.obstacles'))
        DragParams.from_config(self.section('interactions.drag'))


def load_scenario(path: Union[str, Path], defaults: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """Read, merge and validate a scenario file"""
    path = Path(path)
    return ScenarioConfig.from_dict(read_yaml(path), source=path, defaults=defaults)


# Global configuration instance
config_manager = ConfigManager()
