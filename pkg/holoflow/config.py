"""
Configuration management: analysis tolerances, budgets and portrait style
"""

import os
import json
from dataclasses import dataclass, fields, asdict, replace
from pathlib import Path
from typing import Optional, Dict, Any, Tuple

from .exceptions import ConfigError


DEFAULT_STYLE: Dict[str, Any] = {
    "width": 800,
    "height": 600,
    "background": "#ffffff",
    "streamline_color": "#4a6fa5",
    "streamline_width": 0.8,
    "separatrix_color": "#c0392b",
    "separatrix_width": 1.8,
    "zero_color": "#1e8449",
    "pole_color": "#c0392b",
    "essential_color": "#c0392b",
    "hyperbolic_fill": "#2ecc71",
    "elliptic_fill": "#3498db",
    "tract_opacity": 0.25,
    "glyph_size": 5.0,
    "font_size": 11,
    "precision": 3,
}


@dataclass(frozen=True)
class AnalysisSettings:
    """Every numerical tolerance and budget used by the analysis modules"""

    # localclass
    probe_radius: float = 0.5
    probe_samples: int = 4096
    probe_shrinks: int = 8
    winding_tol: float = 0.1
    residue_tol: float = 1e-8
    essential_decades: float = 12.0
    census_seeds: int = 32

    # flow
    rtol: float = 1e-10
    atol: float = 1e-12
    drift_tol: float = 1e-8
    streamline_tol: float = 1e-6
    max_tau: float = 50.0
    max_steps: int = 20000
    step_floor: float = 1e-14
    pole_capture: float = 1e-2
    escape_radius: float = 1e6
    quad_rtol: float = 1e-10

    # asymptotic
    cauchy_tol: float = 1e-7
    rho_min: float = 1e-6
    max_doublings: int = 40
    rho_schedule: Tuple[float, ...] = (0.5, 0.25, 0.1, 0.05)
    cell_size: float = 0.25
    cell_budget: int = 4000
    attain_count: int = 3
    incomplete_seeds: int = 50

    # families and scanning
    resultant_tol: float = 1e-12
    scan_spacing: float = 0.1
    rays: int = 8

    def to_dict(self) -> Dict[str, Any]:
        """Convert settings to a JSON-compatible dictionary"""
        data = asdict(self)
        data["rho_schedule"] = list(self.rho_schedule)
        return data

    def merged(self, overrides: Dict[str, Any]) -> "AnalysisSettings":
        """Return a copy with the given keys replaced, type-checked"""
        known = {f.name: f for f in fields(self)}
        changes: Dict[str, Any] = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"Unknown analysis setting '{key}'", key=key)
            changes[key] = _coerce(key, value, getattr(self, key))
        return replace(self, **changes)


def _coerce(key: str, value: Any, current: Any) -> Any:
    """Coerce a config value to the type of the current setting"""
    try:
        if isinstance(current, bool):
            return bool(value)
        if isinstance(current, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(current, float):
            return float(value)
        if isinstance(current, tuple):
            return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"Invalid value for '{key}': {value!r}", key=key)
    return value


class Config:
    """Configuration file manager"""

    def __init__(self, config_dir: Optional[Path] = None):
        if config_dir is None:
            config_dir = self._get_config_dir()
        self.config_dir = config_dir
        self.config_file = config_dir / "config.json"
        self._config: Optional[Dict[str, Any]] = None

    @staticmethod
    def _get_config_dir() -> Path:
        """Get holoflow configuration directory"""
        home = os.environ.get("HOLOFLOW_HOME")
        if home:
            return Path(home)

        if "XDG_CONFIG_HOME" in os.environ:
            config_home = Path(os.environ["XDG_CONFIG_HOME"])
        else:
            config_home = Path.home() / ".config"
        return config_home / "holoflow"

    def _load(self) -> Dict[str, Any]:
        """Load configuration from file"""
        if self._config is not None:
            return self._config

        if not self.config_file.exists():
            self._config = {}
            return self._config

        try:
            with open(self.config_file, 'r') as f:
                self._config = json.load(f)
        except (OSError, ValueError):
            self._config = {}

        return self._config

    def _save(self) -> None:
        """Save configuration to file"""
        self.config_dir.mkdir(parents=True, exist_ok=True, mode=0o700)

        with open(self.config_file, 'w') as f:
            json.dump(self._config or {}, f, indent=2, sort_keys=True)

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return self._load().get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set configuration value"""
        config = self._load()
        config[key] = value
        self._save()

    def delete(self, key: str) -> None:
        """Delete configuration value"""
        config = self._load()
        if key in config:
            del config[key]
            self._save()

    def analysis_overrides(self) -> Dict[str, Any]:
        """Settings stored as 'analysis.<name>' keys"""
        prefix = "analysis."
        return {k[len(prefix):]: v for k, v in self._load().items() if k.startswith(prefix)}

    def style_overrides(self) -> Dict[str, Any]:
        """Style values stored as 'style.<name>' keys"""
        prefix = "style."
        return {k[len(prefix):]: v for k, v in self._load().items() if k.startswith(prefix)}

    def load_settings(self, override_file: Optional[Path] = None,
                      flags: Optional[Dict[str, Any]] = None) -> AnalysisSettings:
        """
        Resolve analysis settings

        Precedence, lowest first: defaults, user config, --config file, flags.

        Args:
            override_file: JSON file given with --config
            flags: explicit command line values (None entries are ignored)

        Returns:
            Resolved AnalysisSettings
        """
        settings = AnalysisSettings().merged(self.analysis_overrides())
        if override_file is not None:
            data = read_override_file(override_file)
            settings = settings.merged(data.get("analysis", {}))
        if flags:
            settings = settings.merged(flags)
        return settings

    def load_style(self, override_file: Optional[Path] = None,
                   pairs: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
        """Resolve portrait style with the same precedence as settings"""
        style = dict(DEFAULT_STYLE)
        layers = [self.style_overrides()]
        if override_file is not None:
            layers.append(read_override_file(override_file).get("style", {}))
        if pairs:
            layers.append(pairs)
        for layer in layers:
            for key, value in layer.items():
                if key not in DEFAULT_STYLE:
                    raise ConfigError(f"Unknown style key '{key}'", key=key)
                style[key] = _coerce(key, value, DEFAULT_STYLE[key]) \
                    if not isinstance(DEFAULT_STYLE[key], str) else str(value)
        return style

    @staticmethod
    def get_log_level() -> Optional[str]:
        """Get log level override from the environment"""
        return os.environ.get("HOLOFLOW_LOG_LEVEL")

    @staticmethod
    def get_workers() -> int:
        """Get thread count for per-seed work (1 = sequential)"""
        workers = os.environ.get("HOLOFLOW_WORKERS", "1")
        try:
            return max(1, int(workers))
        except ValueError:
            return 1


def read_override_file(path: Path) -> Dict[str, Any]:
    """
    Read a --config JSON override

    The file holds an object with optional "analysis" and "style" objects.
    """
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")
    except ValueError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}")

    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    for key in data:
        if key not in ("analysis", "style"):
            raise ConfigError(f"Unknown config section '{key}'", key=key)
        if not isinstance(data[key], dict):
            raise ConfigError(f"Config section '{key}' must be an object", key=key)
    return data


DEFAULT_SETTINGS = AnalysisSettings()
