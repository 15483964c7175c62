"""Episodic environment loop: 12 Hz control over 60 Hz physics substeps.

One engine instance drives one episode stream. reset() draws the episode's
randomization, places the vessel, and returns the first observation; step()
holds the action across the physics substeps, scans, encodes observations,
scores the reward from ground truth, and terminates on collision (shore
closer than the hull radius), sustained task loss (farther than the
intervention distance for longer than the grace window), or the step cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import DynamicsParams, ThrustCommand, VesselState, set_episode_physics, step_dynamics
from .lidar import LidarNoiseModel, apply_noise, raycast_scan
from .observations import continuous_transform, render_projection
from .randomization import (
    DRConfig,
    EpisodeSetup,
    SENSOR_STREAM,
    episode_rng,
    sample_episode_setup,
)
from .reward import RewardConfig, RewardTerms, compute_reward
from .world import Environment, contains_water, distance_to_shore

OBSERVATION_MODES = ("continuous", "projection", "both")


@dataclass(frozen=True)
class EpisodeConfig:
    max_steps: int = 500
    control_hz: float = 12.0
    physics_substeps: int = 5
    hull_radius: float = 0.7             # m, collision distance
    intervention_distance: float = 25.0  # m
    intervention_grace: float = 10.0     # s beyond the distance before flagging
    observation_mode: str = "continuous"

    def __post_init__(self):
        if self.max_steps <= 0 or self.control_hz <= 0 or self.physics_substeps <= 0:
            raise ValueError("max_steps, control_hz and physics_substeps must be positive")
        if self.observation_mode not in OBSERVATION_MODES:
            raise ValueError(f"observation_mode must be one of {OBSERVATION_MODES}")

    @property
    def substep_dt(self) -> float:
        return 1.0 / (self.control_hz * self.physics_substeps)


@dataclass(frozen=True)
class StepResult:
    observation: dict
    reward: RewardTerms
    done: bool
    info: dict


class EpisodeEngine:
    """Single episode stream over one environment; strictly sequential."""

    def __init__(
        self,
        env: Environment,
        params: DynamicsParams | None = None,
        episode_cfg: EpisodeConfig | None = None,
        dr_cfg: DRConfig | None = None,
        reward_cfg: RewardConfig | None = None,
        noise_model: LidarNoiseModel | None = None,
    ):
        self.env = env
        self.base_params = params or DynamicsParams()
        self.episode_cfg = episode_cfg or EpisodeConfig()
        self.dr_cfg = dr_cfg or DRConfig()
        self.reward_cfg = reward_cfg or RewardConfig()
        self.noise_model = noise_model or LidarNoiseModel()
        self.params: DynamicsParams = self.base_params
        self.state: Optional[VesselState] = None
        self.setup: Optional[EpisodeSetup] = None
        self.last_info: dict = {}
        self.last_scan = None
        self._sensor_rng: Optional[np.random.Generator] = None
        self._step_index = 0
        self._outside_steps = 0
        self._done = True

    def reset(self, run_seed: int, episode_index: int) -> dict:
        """Start an episode determined entirely by (run_seed, episode_index)."""
        rng = episode_rng(run_seed, episode_index)
        self.setup = sample_episode_setup(rng, self.dr_cfg, self.env, seed=episode_index)
        self.params = set_episode_physics(self.base_params, self.setup)
        spawn = self.setup.spawn
        self.state = VesselState(x=spawn.x, y=spawn.y, heading=spawn.heading)
        self._sensor_rng = episode_rng(run_seed, episode_index, SENSOR_STREAM)
        self._step_index = 0
        self._outside_steps = 0
        self._done = False
        distance, _ = distance_to_shore(self.env, (self.state.x, self.state.y))
        self.last_info = self._info(distance, collision=False, intervention=False)
        return self._observe()

    def step(self, action) -> StepResult:
        """Advance one control tick; raises once the episode is done."""
        if self._done or self.state is None:
            raise RuntimeError("step() called on a finished episode; reset() first")
        cmd = action if isinstance(action, ThrustCommand) else ThrustCommand(*action)
        dt = self.episode_cfg.substep_dt
        state = self.state
        for _ in range(self.episode_cfg.physics_substeps):
            state = step_dynamics(state, cmd, self.params, dt)
        self.state = state
        self._step_index += 1

        in_water = contains_water(self.env, (state.x, state.y))
        if in_water:
            distance, _ = distance_to_shore(self.env, (state.x, state.y))
        else:
            distance = 0.0  # hull through the shoreline; treat as contact
        collision = distance < self.episode_cfg.hull_radius

        intervention = False
        if not collision:
            if distance > self.episode_cfg.intervention_distance:
                self._outside_steps += 1
            else:
                self._outside_steps = 0
            grace_steps = int(
                math.ceil(self.episode_cfg.intervention_grace * self.episode_cfg.control_hz)
            )
            intervention = self._outside_steps >= grace_steps

        done = collision or intervention or self._step_index >= self.episode_cfg.max_steps
        self._done = done

        terms = compute_reward(distance, state.u, self.reward_cfg)
        info = self._info(distance, collision, intervention)
        self.last_info = info
        return StepResult(observation=self._observe(), reward=terms, done=done, info=info)

    def _observe(self) -> dict:
        scan = raycast_scan(self.env, self.state)
        if not self.noise_model.is_identity:
            scan = apply_noise(scan, self.noise_model, self._sensor_rng)
        self.last_scan = scan
        obs: dict = {}
        mode = self.episode_cfg.observation_mode
        if mode in ("continuous", "both"):
            obs["continuous"] = continuous_transform(scan)
        if mode in ("projection", "both"):
            obs["projection"] = render_projection(
                scan, target_distance=self.reward_cfg.target_distance
            )
        return obs

    def _info(self, distance: float, collision: bool, intervention: bool) -> dict:
        s = self.state
        return {
            "t": self._step_index,
            "x": s.x,
            "y": s.y,
            "heading": s.heading,
            "u": s.u,
            "v": s.v,
            "r": s.r,
            "distance": float(distance),
            "collision": collision,
            "intervention": intervention,
        }
