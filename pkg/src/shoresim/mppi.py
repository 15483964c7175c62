"""Sampling-based model-predictive control over the analytic vessel model.

Each control tick perturbs the nominal plan with gaussian noise, rolls every
candidate through the dynamics (with the true 60 Hz substepping), scores the
negative shore-following reward plus a large collision penalty, and blends
the perturbations with softmax weights exp(-(cost - min cost)/temperature).
The controller reads simulator ground truth (it is deliberately state-aware,
unlike observation-driven agents); a model-mismatch mode falls out of giving
it dynamics params that differ from the episode's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsParams, ThrustCommand, VesselState, step_dynamics, step_dynamics_array
from .reward import RewardConfig, compute_reward, compute_reward_arrays
from .world import Environment, shore_distances


@dataclass(frozen=True)
class MPPIConfig:
    samples: int = 512          # K rollouts per tick
    horizon: int = 24           # steps at control rate (2 s at 12 Hz)
    temperature: float = 0.5
    noise_sigma: float = 0.3    # std of command perturbations, per channel
    collision_cost: float = 500.0
    warm_start: bool = True     # shift the plan one step between ticks
    hull_radius: float = 0.7    # m, matches the episode collision radius
    control_hz: float = 12.0
    physics_substeps: int = 5

    def __post_init__(self):
        if self.samples < 2 or self.horizon < 1:
            raise ValueError("need samples >= 2 and horizon >= 1")
        if self.temperature <= 0 or self.noise_sigma <= 0:
            raise ValueError("temperature and noise_sigma must be positive")

    @property
    def substep_dt(self) -> float:
        return 1.0 / (self.control_hz * self.physics_substeps)


def empty_plan(cfg: MPPIConfig) -> np.ndarray:
    return np.zeros((cfg.horizon, 2))


def rollout_cost(
    state: VesselState,
    commands: np.ndarray,
    env: Environment,
    params: DynamicsParams,
    cfg: MPPIConfig,
    reward_cfg: RewardConfig | None = None,
) -> float:
    """Reference cost of one command sequence: sum of -reward per step,
    plus the collision penalty (accumulation stops at the collision step)."""
    reward_cfg = reward_cfg or RewardConfig()
    commands = np.asarray(commands, dtype=float)
    dt = cfg.substep_dt
    cost = 0.0
    for t in range(len(commands)):
        cmd = ThrustCommand(commands[t, 0], commands[t, 1])
        for _ in range(cfg.physics_substeps):
            state = step_dynamics(state, cmd, params, dt)
        distance = float(shore_distances(env, np.array([[state.x, state.y]]))[0])
        cost -= compute_reward(distance, state.u, reward_cfg).total
        if distance < cfg.hull_radius:
            cost += cfg.collision_cost
            break
    return cost


def rollout_costs(
    state: VesselState,
    plans: np.ndarray,
    env: Environment,
    params: DynamicsParams,
    cfg: MPPIConfig,
    reward_cfg: RewardConfig | None = None,
) -> np.ndarray:
    """Vectorized costs for (K, H, 2) candidate plans."""
    reward_cfg = reward_cfg or RewardConfig()
    plans = np.asarray(plans, dtype=float)
    k, horizon, _ = plans.shape
    dt = cfg.substep_dt
    states = np.tile(state.as_array(), (k, 1))
    positions = np.empty((horizon, k, 2))
    surges = np.empty((horizon, k))
    for t in range(horizon):
        cmds = plans[:, t, :]
        for _ in range(cfg.physics_substeps):
            states = step_dynamics_array(states, cmds, params, dt)
        positions[t] = states[:, :2]
        surges[t] = states[:, 3]

    distances = shore_distances(env, positions.reshape(-1, 2)).reshape(horizon, k)
    rewards = compute_reward_arrays(distances, surges, reward_cfg)
    collided = distances < cfg.hull_radius
    # steps strictly after the first collision stop contributing
    prior = np.cumsum(collided, axis=0) - collided
    active = prior == 0
    costs = -(rewards * active).sum(axis=0)
    costs += cfg.collision_cost * np.any(collided & active, axis=0)
    return costs


def softmax_weights(costs: np.ndarray, temperature: float) -> np.ndarray:
    """exp(-(cost - min cost)/temperature), normalized to sum to 1.

    Subtracting the minimum makes the weights invariant to shifting every
    cost by a constant. Non-finite costs get zero weight; all costs being
    non-finite is an error (the model blew up).
    """
    costs = np.asarray(costs, dtype=float)
    costs = np.where(np.isnan(costs), np.inf, costs)
    finite = np.isfinite(costs)
    if not np.any(finite):
        raise FloatingPointError("every rollout diverged; model blow-up")
    weights = np.exp(-(costs - costs[finite].min()) / temperature)
    return weights / weights.sum()


def path_integral_update(
    plan: np.ndarray, noise: np.ndarray, costs: np.ndarray, temperature: float
) -> np.ndarray:
    """Blend noise sequences into the plan with softmax cost weights."""
    weights = softmax_weights(costs, temperature)
    return np.clip(plan + np.einsum("k,khc->hc", weights, noise), -1.0, 1.0)


def mppi_step(
    state: VesselState,
    plan: np.ndarray,
    env: Environment,
    params: DynamicsParams,
    cfg: MPPIConfig,
    rng: np.random.Generator,
    reward_cfg: RewardConfig | None = None,
    diagnostics: dict | None = None,
) -> tuple[ThrustCommand, np.ndarray]:
    """One planning tick: returns the command to apply and the next plan.

    Pass a dict as diagnostics to receive per-tick planning stats (min/mean
    cost and the effective sample size of the weight distribution).
    """
    noise = rng.normal(0.0, cfg.noise_sigma, size=(cfg.samples, cfg.horizon, 2))
    costs = rollout_costs(state, plan[None, :, :] + noise, env, params, cfg, reward_cfg)
    weights = softmax_weights(costs, cfg.temperature)
    updated = np.clip(plan + np.einsum("k,khc->hc", weights, noise), -1.0, 1.0)
    if diagnostics is not None:
        finite = costs[np.isfinite(costs)]
        diagnostics.update(
            min_cost=float(finite.min()),
            mean_cost=float(finite.mean()),
            effective_samples=float(1.0 / np.sum(weights**2)),
        )
    command = ThrustCommand(updated[0, 0], updated[0, 1])
    if cfg.warm_start:
        next_plan = np.vstack([updated[1:], updated[-1:]])
    else:
        next_plan = updated
    return command, next_plan


class MPPIController:
    """Stateful wrapper holding the rolling plan and the planning rng."""

    def __init__(
        self,
        env: Environment,
        params: DynamicsParams | None = None,
        cfg: MPPIConfig | None = None,
        reward_cfg: RewardConfig | None = None,
    ):
        self.env = env
        self.params = params or DynamicsParams()
        self.cfg = cfg or MPPIConfig()
        self.reward_cfg = reward_cfg or RewardConfig()
        self.plan = empty_plan(self.cfg)
        self.rng = np.random.default_rng(0)
        self.last_diagnostics: dict = {}

    def reset(self, rng: np.random.Generator) -> None:
        self.plan = empty_plan(self.cfg)
        self.rng = rng
        self.last_diagnostics = {}

    def act(self, state: VesselState) -> ThrustCommand:
        command, self.plan = mppi_step(
            state,
            self.plan,
            self.env,
            self.params,
            self.cfg,
            self.rng,
            self.reward_cfg,
            diagnostics=self.last_diagnostics,
        )
        return command

    def set_episode_params(self, params: DynamicsParams) -> None:
        """Give the internal model the episode's physics (perfect-model mode)."""
        self.params = params
