"""Load the run configuration from YAML (or JSON) files and presets."""
import copy
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from src.errors import ConfigError
from src.kinetics.tumbling import KineticParams
from src.measures.velocity_measure import VelocityMeasure, measure_from_config

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parents[2] / 'config'
DEFAULT_CONFIG = CONFIG_DIR / 'config.yaml'
PRESETS_FILE = CONFIG_DIR / 'presets.yaml'
THREADS_ENV = 'KINWAVE_THREADS'

# Sections replaced as a whole instead of merged key by key.
REPLACED_SECTIONS = ('measure', 'experiment')


@dataclass(frozen=True)
class FieldParams:
    """Signal and nutrient coefficients."""

    alpha: float
    d_s: float
    d_n: float = 1.0
    gamma: float = 1.0
    beta: float = 1.0
    n_plus: float = 1.0
    d_rho: float = 1.0

    def __post_init__(self):
        for name in ('alpha', 'd_s', 'd_n', 'n_plus', 'd_rho'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"fields.{name} must be positive, got {getattr(self, name)}")
        if self.gamma < 0:
            raise ConfigError(f"fields.gamma must be nonnegative, got {self.gamma}")
        if self.beta != 1.0:
            raise ConfigError(f"fields.beta is fixed to 1 (signal source rate), got {self.beta}")


@dataclass(frozen=True)
class GridConfig:
    """Nutrient tabulation grid; L None selects the automatic half-width."""

    L: Optional[float] = None
    n_grid: int = 4097


@dataclass(frozen=True)
class ScanConfig:
    dc: Optional[float] = None
    threads: int = 1
    max_failed_share: float = 0.5


@dataclass(frozen=True)
class RelaxConfig:
    L: float = 30.0
    nz: int = 3000
    t_end: float = 400.0
    tol: float = 1e-8
    order: int = 2
    seed: int = 0


RELAX_TYPES = {'L': float, 'nz': int, 't_end': float, 'tol': float, 'order': int, 'seed': int}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one CLI run."""

    measure: VelocityMeasure
    measure_section: Dict[str, Any]
    kinetics: KineticParams
    fields: FieldParams
    grid: GridConfig
    scan: ScanConfig
    relax: RelaxConfig
    out_dir: Path
    c: Optional[float] = None
    preset: Optional[str] = None
    experiment: Dict[str, Any] = field(default_factory=dict)


def read_config_file(path) -> Dict[str, Any]:
    """
    Parse a YAML or JSON file into a mapping.

    Raises:
        ConfigError: Missing file, parse error or non-mapping document
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping at top level")
    return data


def load_presets(path=PRESETS_FILE) -> Dict[str, Dict[str, Any]]:
    return read_config_file(path)


def merge_config(base: Mapping[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursive merge; `update` wins, REPLACED_SECTIONS are taken whole."""
    merged = copy.deepcopy(dict(base))
    for key, value in update.items():
        if key not in REPLACED_SECTIONS and isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def resolve_threads(cli_value: Optional[int], configured: int = 1) -> int:
    """--threads, then KINWAVE_THREADS, then the configured value."""
    if cli_value is not None:
        threads = cli_value
    elif os.getenv(THREADS_ENV):
        try:
            threads = int(os.getenv(THREADS_ENV))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {os.getenv(THREADS_ENV)!r}")
    else:
        threads = configured
    if threads < 1:
        raise ConfigError(f"threads must be at least 1, got {threads}")
    return threads


def _section(raw: Mapping[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name) or {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"Section '{name}' must be a mapping")
    return dict(value)


def _optional_float(value, name: str) -> Optional[float]:
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}")


def build_run_config(raw: Mapping[str, Any], preset: Optional[str] = None,
                     n: Optional[int] = None, rule: Optional[str] = None) -> RunConfig:
    """
    Validate a merged mapping into a RunConfig.

    Raises:
        ConfigError: Missing sections or malformed values
        MeasureError: Invalid velocity measure
        ParameterError: Kinetic parameters out of range
    """
    measure_section = _section(raw, 'measure')
    kinetics = _section(raw, 'kinetics')
    fields = _section(raw, 'fields')
    grid = _section(raw, 'grid')
    scan = _section(raw, 'scan')
    relax = _section(raw, 'relax')
    output = _section(raw, 'output')

    if not measure_section:
        raise ConfigError("Config needs a 'measure' section")
    if 'chi_s' not in kinetics:
        raise ConfigError("Config needs kinetics.chi_s")
    for key in ('alpha', 'd_s'):
        if key not in fields:
            raise ConfigError(f"Config needs fields.{key}")

    try:
        field_params = FieldParams(**{k: float(v) for k, v in fields.items()})
        grid_config = GridConfig(L=_optional_float(grid.get('L'), 'grid.L'),
                                 n_grid=int(grid.get('n_grid', 4097)))
        scan_config = ScanConfig(dc=_optional_float(scan.get('dc'), 'scan.dc'),
                                 threads=int(scan.get('threads', 1)),
                                 max_failed_share=float(scan.get('max_failed_share', 0.5)))
        unknown = set(relax) - set(RELAX_TYPES)
        if unknown:
            raise ConfigError(f"Unknown relax keys: {sorted(unknown)}")
        relax_config = RelaxConfig(**{k: RELAX_TYPES[k](v) for k, v in relax.items()})
    except TypeError as e:
        raise ConfigError(f"Unknown or malformed config key: {e}")
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Malformed config value: {e}")

    if grid_config.L is not None and not grid_config.L > 0:
        raise ConfigError(f"grid.L must be positive, got {grid_config.L}")
    if grid_config.n_grid < 3:
        raise ConfigError(f"grid.n_grid must be at least 3, got {grid_config.n_grid}")
    if scan_config.dc is not None and not scan_config.dc > 0:
        raise ConfigError(f"scan.dc must be positive, got {scan_config.dc}")
    if not 0.0 <= scan_config.max_failed_share < 1.0:
        raise ConfigError(
            f"scan.max_failed_share must lie in [0, 1), got {scan_config.max_failed_share}")

    measure = measure_from_config(measure_section, n=n, rule=rule)
    params = KineticParams(chi_s=float(kinetics['chi_s']), chi_n=float(kinetics.get('chi_n', 0.0)))

    return RunConfig(
        measure=measure,
        measure_section=measure_section,
        kinetics=params,
        fields=field_params,
        grid=grid_config,
        scan=scan_config,
        relax=relax_config,
        out_dir=Path(output.get('dir', 'output')),
        c=_optional_float(raw.get('c'), 'c'),
        preset=preset,
        experiment=_section(raw, 'experiment'),
    )


def load_config(config_path=None, preset: Optional[str] = None,
                overrides: Optional[Mapping[str, Any]] = None,
                n: Optional[int] = None, rule: Optional[str] = None,
                defaults_path=DEFAULT_CONFIG, presets_path=PRESETS_FILE) -> RunConfig:
    """
    Load defaults, then a preset, then a user file, then overrides.

    Args:
        config_path: Optional YAML/JSON file supplied by the user
        preset: Optional preset name from presets.yaml
        overrides: Nested mapping applied last (CLI flags)
        n: Quadrature node count override for density measures
        rule: Quadrature rule override

    Returns:
        RunConfig

    Raises:
        ConfigError: Unknown preset or invalid configuration
    """
    raw = read_config_file(defaults_path)
    if preset is not None:
        presets = load_presets(presets_path)
        if preset not in presets:
            raise ConfigError(f"Unknown preset '{preset}'; expected one of {sorted(presets)}")
        raw = merge_config(raw, presets[preset])
        logger.info("Applied preset %s", preset)
    if config_path is not None:
        raw = merge_config(raw, read_config_file(config_path))
    if overrides:
        raw = merge_config(raw, overrides)
    return build_run_config(raw, preset, n=n, rule=rule)
