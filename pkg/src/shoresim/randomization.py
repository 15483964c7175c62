"""Per-episode randomization of physics and initial conditions.

At the start of every episode a water current (uniform speed, uniform
direction), a water density, and a spawn pose are drawn. Streams come from
the counter-based Philox generator keyed by (run_seed, episode_index), so
any client that can seed Philox the same way reproduces the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .world import Environment, SpawnPolicy, SpawnPose, sample_spawn

SETUP_STREAM = 0   # substream ids under (run_seed, episode_index)
SENSOR_STREAM = 1
AGENT_STREAM = 2
PLANNER_STREAM = 3


def episode_rng(run_seed: int, episode_index: int, stream: int = SETUP_STREAM) -> np.random.Generator:
    """Philox stream for one episode; documented so clients can mirror it."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((run_seed, episode_index, stream)))
    )


@dataclass(frozen=True)
class DRConfig:
    randomize_current: bool = True
    randomize_density: bool = True
    current_speed_range: tuple[float, float] = (0.0, 0.4)       # m/s
    density_range: tuple[float, float] = (1000.0, 2500.0)       # kg/m^3
    spawn_policy: str = "moderate"   # off | moderate | aggressive ("off" spawns at the nominal moderate preset)
    fixed_spawn: SpawnPose | None = None  # overrides sampling entirely when set

    def __post_init__(self):
        for lo, hi in (self.current_speed_range, self.density_range):
            if not lo < hi:
                raise ValueError("randomization ranges must be increasing")
        SpawnPolicy.preset(self.spawn_policy)  # validate the name

    @classmethod
    def disabled(cls) -> "DRConfig":
        return cls(randomize_current=False, randomize_density=False, spawn_policy="off")


@dataclass(frozen=True)
class EpisodeSetup:
    current: tuple[float, float]   # m/s, world frame
    density: float                 # kg/m^3
    spawn: SpawnPose
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "current": [self.current[0], self.current[1]],
            "density": self.density,
            "spawn": self.spawn.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeSetup":
        return cls(
            current=(float(d["current"][0]), float(d["current"][1])),
            density=float(d["density"]),
            spawn=SpawnPose.from_dict(d["spawn"]),
            seed=int(d.get("seed", 0)),
        )


def sample_episode_setup(
    rng: np.random.Generator,
    cfg: DRConfig,
    env: Environment,
    seed: int = 0,
) -> EpisodeSetup:
    """Draw one episode's physics overrides and spawn pose.

    Disabled dimensions take their nominal values (no current, fresh-water
    density, moderate spawn preset). Draw order is fixed: current speed,
    current direction, density, spawn.
    """
    if cfg.randomize_current:
        speed = rng.uniform(*cfg.current_speed_range)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        current = (speed * math.cos(angle), speed * math.sin(angle))
    else:
        current = (0.0, 0.0)
    density = rng.uniform(*cfg.density_range) if cfg.randomize_density else 1000.0
    if cfg.fixed_spawn is not None:
        spawn = cfg.fixed_spawn
    else:
        spawn = sample_spawn(env, rng, SpawnPolicy.preset(cfg.spawn_policy))
    return EpisodeSetup(current=current, density=float(density), spawn=spawn, seed=seed)
