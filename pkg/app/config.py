"""
Run configuration.

Precedence: DEFAULT_SETTINGS < TRS_* environment (app.config) < key=value
config file < command-line flags.
"""
import os
from dataclasses import dataclass, fields
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values
from flask import current_app

from app.services.clustering import ALGORITHMS, ClusteringConfig
from app.services.graph_core import DEFAULT_DELTA
from app.services.selection import NORMALIZATIONS
from app.services.topo_descriptors import parse_attribute_mask
from app.utils.errors import ConfigError, DescriptorError

DEFAULT_SETTINGS = {
    "K": 10,
    "ALGORITHM": "clarans",
    "NUMLOCAL": 2,
    "MAXNEIGHBOR": None,
    "SEED": 0,
    "ATTRIBUTES": "all",
    "NORMALIZATION": "none",
    "DELTA": DEFAULT_DELTA,
    "OUTPUT_DIR": "output",
    "THREADS": 1,
    "MEMORY_BUDGET_MB": 256,
    "LOG_LEVEL": "INFO",
}


@dataclass(frozen=True)
class RunConfig:
    graph_db: Optional[str] = None
    subgraphs: Optional[str] = None
    labels: Optional[str] = None
    pdb_dir: Optional[str] = None
    k: int = 10
    algorithm: str = "clarans"
    numlocal: int = 2
    maxneighbor: Optional[int] = None
    seed: int = 0
    attributes: str = "all"
    normalization: str = "none"
    delta: float = DEFAULT_DELTA
    output_dir: str = "output"
    threads: int = 1
    memory_budget_mb: int = 256

    def validate(self) -> "RunConfig":
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {', '.join(ALGORITHMS)}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {', '.join(NORMALIZATIONS)}")
        if self.numlocal < 1:
            raise ConfigError("numlocal must be >= 1")
        if self.maxneighbor is not None and self.maxneighbor < 1:
            raise ConfigError("maxneighbor must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("graph_db", "subgraphs", "labels", "pdb_dir"):
            path = getattr(self, name)
            if path is not None and not os.path.exists(path):
                raise ConfigError(f"{name} path does not exist: {path}")
        self.attribute_mask()
        return self

    def attribute_mask(self) -> Tuple[str, ...]:
        try:
            return parse_attribute_mask(self.attributes)
        except DescriptorError as e:
            raise ConfigError(str(e))

    def clustering(self) -> ClusteringConfig:
        return ClusteringConfig(
            algorithm=self.algorithm,
            numlocal=self.numlocal,
            maxneighbor=self.maxneighbor,
            seed=self.seed,
            memory_budget_bytes=self.memory_budget_mb * 1024 * 1024,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    if value is None or value == "":
        return None
    kind = _FIELD_TYPES[name]
    try:
        if kind in (int, Optional[int]):
            return int(value)
        if kind is float:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r}")
    return str(value)


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def load_config_file(path: str) -> Dict[str, Any]:
    """Read a key=value file (dotenv syntax); unknown keys are rejected"""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        name = _normalize_key(key)
        if name not in _FIELD_TYPES:
            raise ConfigError(f"{path}: unknown setting {key!r}")
        values[name] = _coerce(name, value)
    return values


def _get_config(key: str, default=None):
    """Get config from Flask app.config or TRS_* environment variables"""
    try:
        return current_app.config.get(key, default)
    except RuntimeError:
        return os.getenv(f"TRS_{key}", default)


def build_run_config(config_file: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    values: Dict[str, Any] = {}
    for name in _FIELD_TYPES:
        setting = _get_config(name.upper(), DEFAULT_SETTINGS.get(name.upper()))
        if setting is not None:
            values[name] = _coerce(name, setting)
    if config_file:
        values.update({k: v for k, v in load_config_file(config_file).items() if v is not None})
    for name, value in (overrides or {}).items():
        if value is not None:
            values[_normalize_key(name)] = value
    return RunConfig(**values).validate()
