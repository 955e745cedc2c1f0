"""
Configuration loader for chromacomm
Loads YAML configuration and provides typed access to settings
"""
import os
from typing import Any, Dict, List, Optional

import yaml

try:
    from importlib.resources import files
except ImportError:
    # Python < 3.9 fallback
    from importlib_resources import files


class ConfigValidationError(Exception):
    """Raised when configuration validation fails"""
    pass


class Config:
    """Configuration manager for chromacomm"""

    EXPECTED_SCHEMA = {
        'protocol': {
            'c_sample': (int, float),
            'rejection_trial_cap': int
        },
        'channel': {
            'host': str,
            'connect_timeout': (int, float),
            'connect_retries': int
        },
        'counting': {
            'exact_max_vertices': int,
            'cover_max_vertices': int,
            'cover_max_delta': int,
            'mc_batch_size': int
        },
        'harness': {
            'base_seed': int,
            'seeds': int,
            'csv_path': str,
            'record_wall_time': bool,
            'allow_overlap': bool,
            'workers': int
        },
        'experiments': {
            'clique_scaling': {
                'deltas': list,
                'n': int,
                'seeds': int,
                'flatness_c_sample': (int, float)
            },
            'slack_concentration': {
                'ms': list,
                'draws': int,
                'seed': int
            },
            'tail': {
                'family': str,
                'n': int,
                'delta': int,
                'seeds': int,
                'histogram_bins': int
            }
        }
    }

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = self._find_config_file(config_file)
        self._config = self._load_config()
        self._validate_config()

    @classmethod
    def default(cls) -> "Config":
        """Configuration from the bundled file only"""
        return cls(cls._get_bundled_config_path())

    def _find_config_file(self, config_file: Optional[str] = None) -> str:
        """Find configuration file using hierarchical search strategy"""
        if config_file and not os.path.exists(config_file):
            raise FileNotFoundError(f"Configuration file {config_file} not found")
        # Search order: CLI argument -> current dir -> user home -> bundled default
        search_paths = [
            config_file,
            "./chromacomm.yaml",
            os.path.expanduser("~/.chromacomm/config.yaml"),
            self._get_bundled_config_path()
        ]

        for path in search_paths:
            if path and os.path.exists(path):
                return path

        raise FileNotFoundError("No configuration file found in any search location")

    @staticmethod
    def _get_bundled_config_path() -> str:
        """Get path to bundled default configuration file"""
        try:
            return str(files("chromacomm.data").joinpath("config.yaml"))
        except (ImportError, FileNotFoundError, ModuleNotFoundError):
            fallback_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "config.yaml")
            if os.path.exists(fallback_path):
                return fallback_path
            raise FileNotFoundError("No bundled configuration file found")

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file"""
        with open(self.config_file, 'r') as file:
            return yaml.safe_load(file)

    def _validate_config(self) -> None:
        """Validate configuration against expected schema"""
        try:
            self._validate_section(self._config, self.EXPECTED_SCHEMA, "")
            self._validate_values()
        except ValueError as e:
            raise ConfigValidationError(f"Configuration validation failed: {e}")

    def _validate_section(self, config_section: Any, schema_section: Any, path: str) -> None:
        """Recursively validate a configuration section against its schema"""
        if isinstance(schema_section, dict):
            if not isinstance(config_section, dict):
                raise ValueError(f"Expected dict at {path or 'top level'}, got {type(config_section).__name__}")

            for key, expected_type in schema_section.items():
                if key not in config_section:
                    raise ValueError(f"Missing required key '{key}' at {path or 'top level'}")
                current_path = f"{path}.{key}" if path else key
                self._validate_section(config_section[key], expected_type, current_path)

        elif isinstance(schema_section, tuple):
            # bool is an int subclass; never accept it for numeric settings
            if isinstance(config_section, bool) or not isinstance(config_section, schema_section):
                type_names = [t.__name__ for t in schema_section]
                raise ValueError(f"Expected {' or '.join(type_names)} at {path}, got {type(config_section).__name__}")

        elif isinstance(schema_section, type):
            wrong_bool = schema_section is int and isinstance(config_section, bool)
            if wrong_bool or not isinstance(config_section, schema_section):
                raise ValueError(f"Expected {schema_section.__name__} at {path}, got {type(config_section).__name__}")

        else:
            raise ValueError(f"Invalid schema definition at {path}")

    def _validate_values(self) -> None:
        """Range checks that the type schema cannot express"""
        if self.c_sample < 1:
            raise ValueError(f"protocol.c_sample must be >= 1, got {self.c_sample}")
        if self.seeds < 1:
            raise ValueError(f"harness.seeds must be >= 1, got {self.seeds}")
        if self.workers < 1:
            raise ValueError(f"harness.workers must be >= 1, got {self.workers}")
        for path, items in (
            ("experiments.clique_scaling.deltas", self.clique_scaling['deltas']),
            ("experiments.slack_concentration.ms", self.slack_concentration['ms']),
        ):
            if not items or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in items):
                raise ValueError(f"{path} must be a non-empty list of non-negative integers")

    @property
    def c_sample(self) -> float:
        return self._config['protocol']['c_sample']

    @property
    def rejection_trial_cap(self) -> int:
        return self._config['protocol']['rejection_trial_cap']

    @property
    def host(self) -> str:
        return self._config['channel']['host']

    @property
    def connect_timeout(self) -> float:
        return float(self._config['channel']['connect_timeout'])

    @property
    def connect_retries(self) -> int:
        return self._config['channel']['connect_retries']

    @property
    def counting(self) -> Dict[str, int]:
        """Limits and batch size for the counting commands"""
        return self._config['counting']

    @property
    def harness(self) -> Dict[str, Any]:
        return self._config['harness']

    @property
    def base_seed(self) -> int:
        return self.harness['base_seed']

    @property
    def seeds(self) -> int:
        return self.harness['seeds']

    @property
    def csv_path(self) -> Optional[str]:
        return self.harness['csv_path'] or None

    @property
    def record_wall_time(self) -> bool:
        return self.harness['record_wall_time']

    @property
    def allow_overlap(self) -> bool:
        return self.harness['allow_overlap']

    @property
    def workers(self) -> int:
        return self.harness['workers']

    @property
    def clique_scaling(self) -> Dict[str, Any]:
        return self._config['experiments']['clique_scaling']

    @property
    def slack_concentration(self) -> Dict[str, Any]:
        return self._config['experiments']['slack_concentration']

    @property
    def tail(self) -> Dict[str, Any]:
        return self._config['experiments']['tail']

    @property
    def clique_scaling_deltas(self) -> List[int]:
        return list(self.clique_scaling['deltas'])
