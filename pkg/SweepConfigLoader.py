"""
Sweep Config Loader
Loads named sweep presets from the external YAML file (sweep_presets.yaml) and
merges them with a user config file and command-line overrides into a
validated SweepConfig.

Precedence, lowest first: SweepConfig defaults < YAML defaults section <
environment < preset < config file < CLI flags. Config files are JSON mirroring SweepConfig
field-for-field; YAML is accepted as well.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from QuantumCoins import CoinKind, coin_from_name
from WalkStatistics import SIGMA_MODES
from WalkErrors import ConfigError

logger = logging.getLogger("sweep_config")

PRESETS_FILE = Path(__file__).parent / "sweep_presets.yaml"
MAX_SEED = 2 ** 64


def _integral(name: str, value: Any) -> int:
    """Whole-number config value; 100.0 and "100" pass, 100.7 and True do not"""
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, float):
        if not value.is_integer():
            raise ConfigError(f"{name} must be a whole number, got {value!r}")
        return int(value)
    if isinstance(value, str):
        value = value.strip()
    return int(value)


@dataclass
class SweepConfig:
    """Everything that determines a sweep's outputs"""
    coins: List[CoinKind] = field(default_factory=lambda: list(CoinKind))
    densities: List[float] = field(default_factory=lambda: [0.0, 0.01, 0.1, 0.25, 0.5])
    steps: int = 100
    ensemble: int = 250
    seed: int = 0
    sigma_mode: str = "conditional"
    output_dir: str = "results"
    snapshot_times: List[int] = field(default_factory=list)
    threads: int = 1
    emit_svg: bool = False
    save_masks: bool = False
    decoherence_window: int = 15
    decoherence_threshold: float = 0.75

    @property
    def half_width(self) -> int:
        return self.steps + 1

    def validate(self) -> "SweepConfig":
        """Normalize field types and check invariants; returns self"""
        try:
            self.coins = [coin_from_name(c) for c in self.coins]
            self.densities = [float(p) for p in self.densities]
            self.snapshot_times = sorted({_integral("snapshot_times", t) for t in self.snapshot_times})
            self.steps = _integral("steps", self.steps)
            self.ensemble = _integral("ensemble", self.ensemble)
            self.seed = _integral("seed", self.seed)
            self.threads = _integral("threads", self.threads)
            self.decoherence_window = _integral("decoherence_window", self.decoherence_window)
            self.decoherence_threshold = float(self.decoherence_threshold)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Malformed sweep config value: {e}") from e

        if not self.coins:
            raise ConfigError("At least one coin is required")
        if not self.densities:
            raise ConfigError("At least one trap density is required")
        if len(set(self.coins)) != len(self.coins) or len(set(self.densities)) != len(self.densities):
            raise ConfigError("Coins and densities must not repeat")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.ensemble < 1:
            raise ConfigError(f"ensemble must be >= 1, got {self.ensemble}")
        bad = [p for p in self.densities if not 0.0 <= p <= 1.0]
        if bad:
            raise ConfigError(f"Densities outside [0, 1]: {bad}")
        late = [t for t in self.snapshot_times if t < 0 or t > self.steps]
        if late:
            raise ConfigError(f"Snapshot times outside [0, {self.steps}]: {late}")
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.sigma_mode not in SIGMA_MODES:
            raise ConfigError(f"sigma_mode must be one of {SIGMA_MODES}, got '{self.sigma_mode}'")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.decoherence_window < 5:
            raise ConfigError(f"decoherence_window must be >= 5, got {self.decoherence_window}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["coins"] = [c.value for c in self.coins]
        return data


CONFIG_FIELDS = {f.name for f in fields(SweepConfig)}


# ==================== FILE LOADER ====================
def load_sweep_presets(presets_file: Path = PRESETS_FILE) -> Dict[str, Any]:
    """Load sweep presets from the YAML configuration file"""
    if not presets_file.exists():
        logger.error(f"Sweep presets file not found: {presets_file}")
        raise FileNotFoundError(f"Sweep presets file not found: {presets_file}")

    try:
        with open(presets_file, "r", encoding="utf-8") as f:
            presets = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logger.error(f"Error parsing sweep presets YAML: {e}")
        raise ValueError(f"Error parsing sweep presets YAML: {e}") from e

    if not presets:
        raise ValueError("Sweep presets file is empty")

    logger.info(f"Successfully loaded sweep presets from {presets_file}")
    return presets


# Load presets once at module initialization
try:
    SWEEP_PRESETS = load_sweep_presets()
    PRESETS_LOADED = True
except Exception as e:
    logger.warning(f"Failed to load sweep presets: {e}, using empty fallback")
    SWEEP_PRESETS = {}
    PRESETS_LOADED = False


def check_presets_loaded() -> bool:
    return PRESETS_LOADED


def reload_presets() -> bool:
    """Reload sweep presets from file"""
    global SWEEP_PRESETS, PRESETS_LOADED
    try:
        SWEEP_PRESETS = load_sweep_presets()
        PRESETS_LOADED = True
        logger.info("Sweep presets reloaded successfully")
        return True
    except Exception as e:
        logger.error(f"Failed to reload sweep presets: {e}")
        PRESETS_LOADED = False
        return False


def list_presets() -> List[str]:
    return sorted(SWEEP_PRESETS.get("presets", {}).keys())


def get_preset(name: str) -> Dict[str, Any]:
    """Preset values as config fields (descriptions stripped)"""
    presets = SWEEP_PRESETS.get("presets", {})
    if name not in presets:
        raise ConfigError(f"Unknown preset '{name}' (available: {', '.join(list_presets()) or 'none'})")
    values = {k: v for k, v in presets[name].items() if k != "description"}
    return values


def get_default_values() -> Dict[str, Any]:
    return dict(SWEEP_PRESETS.get("defaults", {}))


def load_config_file(path) -> Dict[str, Any]:
    """Read a JSON (or YAML) config file mirroring SweepConfig"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            values = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Error parsing config file {path}: {e}") from e
    if not isinstance(values, dict):
        raise ConfigError(f"Config file {path} must hold a mapping, got {type(values).__name__}")
    logger.info(f"Loaded sweep config from {path}")
    return values


def _check_keys(values: Dict[str, Any], source: str) -> None:
    unknown = sorted(set(values) - CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"Unknown keys in {source}: {', '.join(unknown)}")


def build_config(preset: Optional[str] = None,
                 file_values: Optional[Dict[str, Any]] = None,
                 overrides: Optional[Dict[str, Any]] = None,
                 environment: Optional[Dict[str, Any]] = None) -> SweepConfig:
    """
    Merge defaults, preset, file values and CLI overrides into a validated config.

    ``environment`` values (QUANTUM_WALK_THREADS) replace the YAML defaults
    and are themselves overridden by the preset, the file and the CLI.
    """
    merged: Dict[str, Any] = {}
    defaults = get_default_values()
    defaults.update({k: v for k, v in (environment or {}).items() if v is not None})
    layers = [("defaults", defaults)]
    if preset:
        layers.append((f"preset '{preset}'", get_preset(preset)))
    if file_values:
        layers.append(("config file", file_values))
    if overrides:
        layers.append(("command line", {k: v for k, v in overrides.items() if v is not None}))

    for source, values in layers:
        _check_keys(values, source)
        merged.update(values)

    config = SweepConfig(**merged).validate()
    logger.debug(f"Resolved sweep config: {json.dumps(config.to_dict())}")
    return config
