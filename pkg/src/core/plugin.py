"""
Plugin system for interaction loads
"""

import importlib.util
import inspect
import os
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Type

from .config import enabled_interactions
from .logger import logger

# Fixed application order of the built-in interactions
BUILTIN_ORDER = ('connections', 'rod_contact', 'pressure', 'obstacles', 'drag')


class InteractionPlugin(ABC):
    """Base class for all interaction plugins"""

    def __init__(self, name: str, config: Dict[str, Any]):
        self.name = name
        self.config = config
        self.logger = logger.get_logger(f'plugin.{name}')
        self.calls = 0

    def setup(self, assembly) -> None:
        """Bind to an assembly before the first step"""

    @abstractmethod
    def apply(self, assembly, time: float, buffers) -> None:
        """Accumulate this interaction's loads into ``buffers``"""

    def stable_timestep(self, assembly, safety: float) -> float:
        """Largest step this interaction tolerates; unbounded by default"""
        return float('inf')

    def get_status(self) -> Dict[str, Any]:
        return {'name': self.name, 'calls': self.calls}


class PluginManager:
    """Registry and pipeline of interaction plugins"""

    def __init__(self):
        self.plugins: Dict[str, InteractionPlugin] = {}
        self.plugin_classes: Dict[str, Type[InteractionPlugin]] = {}
        self._builtins_loaded = False

    def _load_builtin_plugins(self) -> None:
        """Load built-in plugin classes"""
        if self._builtins_loaded:
            return
        from plugins.connections import ConnectionsPlugin
        from plugins.contact import RodContactPlugin
        from plugins.drag import DragPlugin
        from plugins.obstacles import ObstaclesPlugin
        from plugins.pressure import PressurePlugin

        self.plugin_classes.update({
            'connections': ConnectionsPlugin,
            'rod_contact': RodContactPlugin,
            'pressure': PressurePlugin,
            'obstacles': ObstaclesPlugin,
            'drag': DragPlugin,
        })
        self._builtins_loaded = True

    def load_external_plugins(self, plugin_dir: str) -> None:
        """Load external plugins from a directory of packages"""
        if not os.path.isdir(plugin_dir):
            return

        for item in sorted(os.listdir(plugin_dir)):
            plugin_path = os.path.join(plugin_dir, item)
            if os.path.isdir(plugin_path) and not item.startswith('_'):
                self._load_plugin_from_directory(plugin_path)

    def _load_plugin_from_directory(self, plugin_path: str) -> None:
        plugin_name = os.path.basename(plugin_path)
        init_file = os.path.join(plugin_path, '__init__.py')
        if not os.path.exists(init_file):
            return

        log = logger.get_logger('plugins')
        try:
            spec = importlib.util.spec_from_file_location(f"external_plugins.{plugin_name}", init_file)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
        except Exception as e:
            log.error(f"Error loading plugin {plugin_name}: {e}")
            return

        for _, obj in inspect.getmembers(module, inspect.isclass):
            if issubclass(obj, InteractionPlugin) and obj is not InteractionPlugin:
                self.plugin_classes[plugin_name] = obj
                log.info(f"Loaded external plugin {plugin_name} ({obj.__name__})")
                break

    def available(self) -> List[str]:
        self._load_builtin_plugins()
        return list(self.plugin_classes)

    def create_plugin(self, name: str, config: Dict[str, Any]) -> InteractionPlugin:
        self._load_builtin_plugins()
        if name not in self.plugin_classes:
            from .errors import ConfigurationError
            raise ConfigurationError(f"interactions.{name}",
                                     f"unknown interaction; available: {sorted(self.plugin_classes)}")
        plugin = self.plugin_classes[name](name, config)
        self.plugins[name] = plugin
        return plugin

    def create_pipeline(self, section: Dict[str, Any]) -> List[InteractionPlugin]:
        """Instances for every enabled interaction, built-ins first in fixed order"""
        enabled = enabled_interactions(section)
        ordered = [n for n in BUILTIN_ORDER if n in enabled]
        ordered += sorted(n for n in enabled if n not in BUILTIN_ORDER)
        return [self.create_plugin(name, enabled[name]) for name in ordered]

    def get_plugin(self, name: str) -> Optional[InteractionPlugin]:
        return self.plugins.get(name)

    def get_plugin_status(self) -> Dict[str, Dict[str, Any]]:
        """Get status of all plugins"""
        return {name: plugin.get_status() for name, plugin in self.plugins.items()}


# Global plugin manager instance
plugin_manager = PluginManager()
