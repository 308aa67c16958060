"""
Unified logging for simulation runs
"""

import json
import logging
import logging.handlers
import os
from datetime import datetime, timezone
from typing import Any, Dict

from .config import config_manager


class SimulationLogger:
    """Console, rotating-file and JSON event logging for the engine"""

    def __init__(self):
        self.loggers: Dict[str, logging.Logger] = {}
        self._setup_loggers()

    def _setup_loggers(self) -> None:
        """Setup loggers from the engine configuration"""
        main_logger = logging.getLogger('hydrostat')
        main_logger.setLevel(getattr(logging, str(config_manager.get('global.log_level', 'INFO')).upper()))
        main_logger.propagate = False

        fmt = config_manager.get('logging.file.format',
                                 '%(asctime)s - %(name)s - %(levelname)s - %(message)s')

        if not main_logger.handlers:
            if config_manager.get('logging.file.enabled', False):
                log_path = config_manager.get('logging.file.path', 'logs/hydrostat.log')
                os.makedirs(os.path.dirname(log_path) or '.', exist_ok=True)
                file_handler = logging.handlers.RotatingFileHandler(
                    log_path,
                    maxBytes=self._parse_size(config_manager.get('logging.file.max_size', '10MB')),
                    backupCount=config_manager.get('logging.file.backup_count', 3)
                )
                file_handler.setFormatter(logging.Formatter(fmt))
                main_logger.addHandler(file_handler)

            console_handler = logging.StreamHandler()
            console_handler.setFormatter(logging.Formatter(fmt))
            main_logger.addHandler(console_handler)

        self.loggers['main'] = main_logger

        # JSON logger for run events
        if config_manager.get('logging.json.enabled', False):
            json_logger = logging.getLogger('hydrostat_json')
            json_logger.setLevel(logging.INFO)
            json_logger.propagate = False

            if not json_logger.handlers:
                json_path = config_manager.get('logging.json.path', 'logs/events.json')
                os.makedirs(os.path.dirname(json_path) or '.', exist_ok=True)
                json_handler = logging.handlers.RotatingFileHandler(
                    json_path,
                    maxBytes=self._parse_size(config_manager.get('logging.json.max_size', '10MB')),
                    backupCount=3
                )
                json_handler.setFormatter(JSONFormatter())
                json_logger.addHandler(json_handler)

            self.loggers['json'] = json_logger

    def _parse_size(self, size_str: str) -> int:
        """Parse size string like '10MB' to bytes"""
        size_str = str(size_str).upper()
        if size_str.endswith('MB'):
            return int(size_str[:-2]) * 1024 * 1024
        elif size_str.endswith('KB'):
            return int(size_str[:-2]) * 1024
        elif size_str.endswith('GB'):
            return int(size_str[:-2]) * 1024 * 1024 * 1024
        else:
            return int(size_str)

    def get_logger(self, name: str = 'main') -> logging.Logger:
        """Get a logger; unknown names become children of the main logger"""
        if name in self.loggers:
            return self.loggers[name]
        child = self.loggers['main'].getChild(name)
        self.loggers[name] = child
        return child

    def log_event(self, kind: str, data: Dict[str, Any]) -> None:
        """Log a structured run event"""
        event = dict(data)
        event['event'] = kind
        event['timestamp'] = datetime.now(timezone.utc).isoformat()

        self.get_logger('main').debug(f"event {kind}: {data}")

        if 'json' in self.loggers:
            self.loggers['json'].info(kind, extra={'event_data': event})


class JSONFormatter(logging.Formatter):
    """JSON formatter for structured logging"""

    def format(self, record):
        log_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage()
        }

        if hasattr(record, 'event_data'):
            log_data.update(record.event_data)

        return json.dumps(log_data, default=str)


# Global logger instance
logger = SimulationLogger()
