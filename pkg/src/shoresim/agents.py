"""Built-in agents for the batch runner.

Agents expose begin_episode(run_seed, episode_index, engine) and
act(observation, info) -> (left, right). The random and shore-follower
agents consume observations only; the planner agent reads the engine's
ground-truth state, matching how a state-aware baseline is wired up.
"""

from __future__ import annotations

import math

import numpy as np

from .dynamics import DynamicsParams, VesselState
from .mppi import MPPIConfig, MPPIController
from .observations import continuous_bearings
from .randomization import AGENT_STREAM, PLANNER_STREAM, episode_rng
from .reward import RewardConfig

MISS_VALUE = 1.0 / 100.0   # continuous-scan value of a miss
HIT_THRESHOLD = 1.0 / 20.0  # anything at max range or closer exceeds this


class RandomAgent:
    """Uniform commands in [-1, 1]^2; seeded per episode."""

    def __init__(self):
        self._rng = np.random.default_rng(0)

    def begin_episode(self, run_seed: int, episode_index: int, engine=None) -> None:
        self._rng = episode_rng(run_seed, episode_index, AGENT_STREAM)

    def act(self, observation, info=None):
        left, right = self._rng.uniform(-1.0, 1.0, 2)
        return float(left), float(right)


class PDShoreFollower:
    """Reactive steering from the continuous observation alone.

    Each side's nearest return defines a signed offset error against the
    target shore distance; the difference of the two per-side turn demands
    (with derivative damping on the closing rate) steers the vessel, so a
    symmetric scan yields equal commands. A close return dead ahead adds an
    avoidance turn away from the nearer side. Positive steer is applied as
    more port thrust, which yaws the bow to starboard.
    """

    def __init__(
        self,
        target_distance: float = 10.0,
        base_thrust: float = 0.62,
        offset_gain: float = 0.09,
        damping_gain: float = 0.55,
        control_hz: float = 12.0,
    ):
        self.target_distance = target_distance
        self.base_thrust = base_thrust
        self.offset_gain = offset_gain
        self.damping_gain = damping_gain
        self.control_hz = control_hz
        bearings = continuous_bearings()
        self._port = bearings > 0
        self._star = bearings < 0
        self._ahead = np.abs(bearings) < math.radians(25.0)
        self._prev: tuple[float, float] | None = None
        self._last_seen = 0.0  # +1 port, -1 starboard

    def begin_episode(self, run_seed: int, episode_index: int, engine=None) -> None:
        self._prev = None
        self._last_seen = 0.0

    def _turn_demand(self, dist, rate, has_shore):
        if not has_shore:
            return 0.0
        error = max(-8.0, min(8.0, dist - self.target_distance))
        return self.offset_gain * error + self.damping_gain * rate

    def act(self, observation, info=None):
        values = np.asarray(observation["continuous"], dtype=float)
        port_val = float(values[self._port].max())
        star_val = float(values[self._star].max())
        d_port = 1.0 / port_val
        d_star = 1.0 / star_val
        has_port = port_val > HIT_THRESHOLD
        has_star = star_val > HIT_THRESHOLD

        if self._prev is None:
            rate_port = rate_star = 0.0
        else:
            rate_port = (d_port - self._prev[0]) * self.control_hz / 12.0
            rate_star = (d_star - self._prev[1]) * self.control_hz / 12.0
        self._prev = (d_port, d_star)

        toward_port = self._turn_demand(d_port, rate_port, has_port)
        toward_star = self._turn_demand(d_star, rate_star, has_star)
        steer = toward_star - toward_port

        d_ahead = 1.0 / float(values[self._ahead].max())
        if d_ahead < 12.0:
            away = 1.0 if d_port <= d_star else -1.0  # dead tie breaks to starboard
            steer += away * (0.25 + 0.4 * (12.0 - d_ahead) / 12.0)

        if has_port or has_star:
            self._last_seen = 1.0 if d_port <= d_star else -1.0
        elif self._last_seen:
            steer -= self._last_seen * 0.15  # shore lost: arc back toward it

        steer = max(-0.5, min(0.5, steer))
        return (
            max(-1.0, min(1.0, self.base_thrust + steer)),
            max(-1.0, min(1.0, self.base_thrust - steer)),
        )


class MPPIAgent:
    """Planner agent: reads ground-truth state from the engine each episode."""

    def __init__(
        self,
        env,
        params: DynamicsParams | None = None,
        cfg: MPPIConfig | None = None,
        reward_cfg: RewardConfig | None = None,
        track_episode_physics: bool = True,
    ):
        self.controller = MPPIController(env, params=params, cfg=cfg, reward_cfg=reward_cfg)
        self.track_episode_physics = track_episode_physics
        self._engine = None

    def begin_episode(self, run_seed: int, episode_index: int, engine=None) -> None:
        self._engine = engine
        self.controller.reset(episode_rng(run_seed, episode_index, PLANNER_STREAM))
        if self.track_episode_physics and engine is not None:
            self.controller.set_episode_params(engine.params)

    def act(self, observation, info=None):
        if self._engine is not None:
            state = self._engine.state
        else:
            state = VesselState(
                x=info["x"], y=info["y"], heading=info["heading"],
                u=info["u"], v=info["v"], r=info["r"],
            )
        cmd = self.controller.act(state)
        return cmd.left, cmd.right


def build_agent(name: str, env, run_config=None):
    """CLI agent factory. 'external' names a module:attr callable to load."""
    if name == "random":
        return RandomAgent()
    if name == "scripted-pd":
        target = run_config.reward.target_distance if run_config else 10.0
        return PDShoreFollower(target_distance=target)
    if name == "mppi":
        if run_config is not None:
            return MPPIAgent(
                env,
                params=run_config.dynamics,
                cfg=run_config.mppi,
                reward_cfg=run_config.reward,
            )
        return MPPIAgent(env)
    if name.startswith("external:"):
        import importlib

        spec = name.split(":", 1)[1]
        module_name, _, attr = spec.partition("#")
        factory = getattr(importlib.import_module(module_name), attr or "make_agent")
        return factory(env, run_config)
    raise ValueError(
        f"unknown agent {name!r}; expected mppi, scripted-pd, random or external:module#factory"
    )
