"""Run configuration: one JSON document reproduces a whole run.

A run is fully determined by (RunConfig, run_seed): the environment is
either generated from a seed + parameters or loaded from a geometry file,
and every nested config section has complete defaults so partial documents
work.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .dynamics import DynamicsParams
from .episode import EpisodeConfig
from .lidar import LidarNoiseModel
from .mppi import MPPIConfig
from .randomization import DRConfig
from .reward import RewardConfig
from .world import (
    ChannelSpec,
    Environment,
    LakeSpec,
    SpawnPose,
    circular_lake,
    generate_channel,
    generate_lake,
    load_environment,
)

ENV_KINDS = ("lake", "circle", "channel", "file")


@dataclass(frozen=True)
class EnvironmentSpec:
    kind: str = "lake"
    seed: int = 0
    path: str | None = None      # for kind == "file"
    radius: float = 80.0         # for kind == "circle"
    params: dict = field(default_factory=dict)  # LakeSpec/ChannelSpec overrides

    def build(self) -> Environment:
        if self.kind == "lake":
            return generate_lake(self.seed, LakeSpec(**self.params))
        if self.kind == "circle":
            return circular_lake(radius=self.radius)
        if self.kind == "channel":
            return generate_channel(self.seed, ChannelSpec(**self.params))
        if self.kind == "file":
            if not self.path:
                raise ValueError("environment kind 'file' requires a path")
            return load_environment(self.path)
        raise ValueError(f"unknown environment kind {self.kind!r}; expected one of {ENV_KINDS}")


@dataclass
class RunConfig:
    environment: EnvironmentSpec = field(default_factory=EnvironmentSpec)
    dynamics: DynamicsParams = field(default_factory=DynamicsParams)
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    dr: DRConfig = field(default_factory=DRConfig)
    mppi: MPPIConfig = field(default_factory=MPPIConfig)
    lidar_noise: LidarNoiseModel = field(default_factory=LidarNoiseModel)

    def build_environment(self) -> Environment:
        return self.environment.build()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data or {})

        def section(key, factory):
            raw = dict(data.get(key) or {})
            return factory(**raw)

        dr_raw = dict(data.get("dr") or {})
        if dr_raw.get("fixed_spawn") is not None:
            dr_raw["fixed_spawn"] = SpawnPose.from_dict(dr_raw["fixed_spawn"])
        for tup_key in ("current_speed_range", "density_range"):
            if tup_key in dr_raw:
                dr_raw[tup_key] = tuple(dr_raw[tup_key])

        dyn_raw = dict(data.get("dynamics") or {})
        for tup_key in ("linear_drag", "quadratic_drag", "current"):
            if tup_key in dyn_raw:
                dyn_raw[tup_key] = tuple(dyn_raw[tup_key])

        env_raw = dict(data.get("environment") or {})

        return cls(
            environment=EnvironmentSpec(**env_raw),
            dynamics=DynamicsParams(**dyn_raw),
            episode=section("episode", EpisodeConfig),
            reward=section("reward", RewardConfig),
            dr=DRConfig(**dr_raw),
            mppi=section("mppi", MPPIConfig),
            lidar_noise=section("lidar_noise", LidarNoiseModel),
        )


def load_run_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh))


def save_run_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
