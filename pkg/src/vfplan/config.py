"""Planner configuration and scenario profiles."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .overlap import DEFAULT_METRIC, normalize_metric

PROFILES = {
    "indoor": {"r_min": 0.6, "r_max": 30.0, "resolution": 0.02, "partition_length": 0.1, "tau": 0.4},
    "outdoor": {"r_min": 1.2, "r_max": 75.0, "resolution": 0.25, "partition_length": 1.0, "tau": 0.3},
}
# "custom" starts from the indoor numbers; every value is expected to be overridden
PROFILES["custom"] = dict(PROFILES["indoor"])


@dataclass(frozen=True)
class PlanConfig:
    profile: str = "indoor"
    r_min: float = 0.6
    r_max: float = 30.0
    resolution: float = 0.02
    partition_length: float = 0.1
    tau: float = 0.4
    overlap_metric: str = DEFAULT_METRIC
    include_openings: bool = False
    windows_opaque: bool = False
    reinforce_cycles: bool = False
    coverage_fraction: float = 1.0

    def __post_init__(self):
        check_config(self)

    @classmethod
    def from_profile(cls, profile: str = "indoor", **overrides) -> "PlanConfig":
        """Profile defaults with explicit (non-None) overrides applied on top."""
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        values = {"profile": profile, **PROFILES[profile]}
        known = {f.name for f in fields(cls)}
        for key, val in overrides.items():
            if key not in known:
                raise TypeError(f"unknown config field {key!r}")
            if val is not None:
                values[key] = val
        return cls(**values)

    def replace(self, **changes) -> "PlanConfig":
        return PlanConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


def _positive(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


def check_config(cfg: PlanConfig) -> PlanConfig:
    for name in ("r_min", "r_max", "resolution", "partition_length"):
        _positive(name, getattr(cfg, name))
    if cfg.r_min >= cfg.r_max:
        raise ValueError(f"r_min ({cfg.r_min}) must be smaller than r_max ({cfg.r_max})")
    if not 0.0 <= cfg.tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {cfg.tau}")
    if not 0.0 < cfg.coverage_fraction <= 1.0:
        raise ValueError("coverage_fraction must lie in (0, 1]")
    object.__setattr__(cfg, "overlap_metric", normalize_metric(cfg.overlap_metric))
    for name in ("r_min", "r_max", "resolution", "partition_length", "tau", "coverage_fraction"):
        object.__setattr__(cfg, name, float(getattr(cfg, name)))
    return cfg
