"""Run configuration: dataclass defaults, TOML file, CLI flag precedence."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .errors import ConfigError
from .pooling import PoolingStrategy
from .probes import ProbeConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class RunConfig:
    """Pipeline defaults.

    variance_ratio 0.95, percentile 0.70 and num_candidates 5 are the shipped
    defaults and downstream code treats them as such; change them per run via
    flags or a config file, not here.
    """

    subspace_path: Optional[str] = None
    manifest_dir: Optional[str] = None
    output_dir: Optional[str] = None
    pooling: PoolingStrategy = PoolingStrategy.MAX
    variance_ratio: float = 0.95
    percentile: float = 0.70
    num_candidates: int = 5
    seed: int = 0
    jobs: int = 1
    probe: ProbeConfig = field(default_factory=ProbeConfig)

    def __post_init__(self):
        if not (0.0 < self.variance_ratio <= 1.0):
            raise ConfigError(f"variance_ratio must be in (0, 1], got {self.variance_ratio}")
        if not (0.0 < self.percentile < 1.0):
            raise ConfigError(f"percentile must be in (0, 1), got {self.percentile}")
        if self.num_candidates < 1:
            raise ConfigError(f"num_candidates must be >= 1, got {self.num_candidates}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")


_SCALAR_KEYS = {
    "subspace_path": str,
    "manifest_dir": str,
    "output_dir": str,
    "variance_ratio": float,
    "percentile": float,
    "num_candidates": int,
    "seed": int,
    "jobs": int,
}

_PROBE_KEYS = {"n_probes", "retain", "probe_dim", "sigma", "top_p_gaps", "seed"}


def load_config(path) -> RunConfig:
    """Read a TOML file mirroring RunConfig; unknown keys are rejected."""
    with open(path, "rb") as f:
        try:
            doc = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: invalid TOML: {e}") from e
    return config_from_dict(doc, source=os.fspath(path))


def config_from_dict(doc: dict[str, Any], source: str = "<dict>") -> RunConfig:
    kwargs: dict[str, Any] = {}
    for key, value in doc.items():
        if key == "pooling":
            kwargs["pooling"] = PoolingStrategy.parse(value)
        elif key == "probe":
            unknown = set(value) - _PROBE_KEYS
            if unknown:
                raise ConfigError(f"{source}: unknown probe keys {sorted(unknown)}")
            kwargs["probe"] = ProbeConfig(**value)
        elif key in _SCALAR_KEYS:
            kwargs[key] = _SCALAR_KEYS[key](value)
        else:
            raise ConfigError(f"{source}: unknown config key {key!r}")
    return RunConfig(**kwargs)


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Non-None overrides win over the config (CLI flags > file > defaults)."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    if "pooling" in updates and isinstance(updates["pooling"], str):
        updates["pooling"] = PoolingStrategy.parse(updates["pooling"])
    probe_updates = {k[len("probe_"):]: v for k, v in list(updates.items()) if k.startswith("probe_")}
    for k in list(updates):
        if k.startswith("probe_"):
            del updates[k]
    if probe_updates:
        updates["probe"] = replace(cfg.probe, **probe_updates)
    return replace(cfg, **updates)
