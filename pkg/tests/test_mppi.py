import math

import numpy as np
import pytest

from shoresim.dynamics import DynamicsParams, ThrustCommand, VesselState, step_dynamics
from shoresim.mppi import (
    MPPIConfig,
    MPPIController,
    empty_plan,
    mppi_step,
    path_integral_update,
    rollout_cost,
    rollout_costs,
    softmax_weights,
)
from shoresim.reward import RewardConfig, compute_reward
from shoresim.world import Environment, Shoreline, circular_lake, densify, shore_distances

PARAMS = DynamicsParams()


def box_environment(length=500.0, height=160.0):
    """Rectangle with a straight shore along y = 0."""
    corners = np.array([[0, 0], [length, 0], [length, height], [0, height]], dtype=float)
    return Environment(boundary=Shoreline(densify(corners, 1.0)), name="box")


def oracle_rollout_cost(state, commands, env, params, cfg, reward_cfg):
    """Independent accumulator written directly against the primitives."""
    total = 0.0
    for t in range(commands.shape[0]):
        cmd = ThrustCommand(float(commands[t, 0]), float(commands[t, 1]))
        for _ in range(cfg.physics_substeps):
            state = step_dynamics(state, cmd, params, cfg.substep_dt)
        d = float(shore_distances(env, np.array([[state.x, state.y]]))[0])
        total = total - compute_reward(d, state.u, reward_cfg).total
        if d < cfg.hull_radius:
            total += cfg.collision_cost
            break
    return total


class TestWeights:
    def test_two_sample_softmax(self):
        w = softmax_weights(np.array([0.0, 1.0]), temperature=1.0)
        assert w[0] == pytest.approx(0.7310585786300049, abs=1e-12)
        assert w[1] == pytest.approx(0.2689414213699951, abs=1e-12)
        assert w.sum() == pytest.approx(1.0)

    def test_shift_invariance(self):
        rng = np.random.default_rng(0)
        costs = rng.normal(0, 5, 64)
        base = softmax_weights(costs, 0.5)
        shifted = softmax_weights(costs + 123.456, 0.5)
        assert np.max(np.abs(base - shifted)) < 1e-12

    def test_nonfinite_costs_get_zero_weight(self):
        w = softmax_weights(np.array([0.0, np.inf, np.nan, 1.0]), 1.0)
        assert w[1] == 0.0 and w[2] == 0.0
        assert w.sum() == pytest.approx(1.0)

    def test_all_nonfinite_raises(self):
        with pytest.raises(FloatingPointError):
            softmax_weights(np.array([np.inf, np.nan]), 1.0)


class TestUpdate:
    def test_zero_noise_leaves_plan_unchanged(self):
        cfg = MPPIConfig(samples=16, horizon=8)
        plan = np.full((8, 2), 0.4)
        noise = np.zeros((16, 8, 2))
        costs = np.arange(16.0)
        assert np.array_equal(path_integral_update(plan, noise, costs, cfg.temperature), plan)

    def test_update_clamps_commands(self):
        plan = np.full((4, 2), 0.9)
        noise = np.full((3, 4, 2), 0.8)
        updated = path_integral_update(plan, noise, np.zeros(3), 1.0)
        assert np.all(updated <= 1.0) and np.all(updated >= -1.0)


class TestRolloutCost:
    def test_batch_matches_scalar_and_oracle(self):
        env = circular_lake(80.0)
        cfg = MPPIConfig(samples=4, horizon=12)
        reward_cfg = RewardConfig()
        state = VesselState(x=0.0, y=68.0, heading=math.pi, u=0.8)
        rng = np.random.default_rng(1)
        plans = rng.normal(0.3, 0.4, (4, cfg.horizon, 2))
        batch = rollout_costs(state, plans, env, PARAMS, cfg, reward_cfg)
        for k in range(4):
            scalar = rollout_cost(state, plans[k], env, PARAMS, cfg, reward_cfg)
            oracle = oracle_rollout_cost(state, plans[k], env, PARAMS, cfg, reward_cfg)
            assert batch[k] == pytest.approx(scalar, abs=1e-9)
            assert scalar == pytest.approx(oracle, abs=1e-9)

    def test_reward_ceiling_on_a_straight_shore(self):
        env = box_environment()
        cfg = MPPIConfig(horizon=24)
        # command that balances drag at exactly the target speed
        c = 0.1 + 0.9 * math.sqrt(16.75 / 45.0)
        plan = np.full((cfg.horizon, 2), c)
        state = VesselState(x=100.0, y=10.0, heading=0.0, u=1.0)
        cost = rollout_cost(state, plan, env, PARAMS, cfg)
        assert cost == pytest.approx(-3.75 * cfg.horizon, abs=1e-6)
        # and nothing can beat the ceiling
        rng = np.random.default_rng(2)
        random_plans = rng.uniform(-1, 1, (16, cfg.horizon, 2))
        assert np.all(rollout_costs(state, random_plans, env, PARAMS, cfg) >= -3.75 * cfg.horizon)

    def test_collision_cost_dominates(self):
        env = box_environment()
        cfg = MPPIConfig(horizon=24)
        state = VesselState(x=100.0, y=0.9, heading=-math.pi / 2, u=1.5)  # charging the wall
        plan = np.full((cfg.horizon, 2), 1.0)
        cost = rollout_cost(state, plan, env, PARAMS, cfg)
        assert cost >= cfg.collision_cost - 3.75 * cfg.horizon

    def test_post_collision_steps_do_not_accumulate(self):
        env = box_environment()
        cfg = MPPIConfig(horizon=24)
        state = VesselState(x=100.0, y=0.9, heading=-math.pi / 2, u=1.5)
        short = rollout_cost(state, np.full((6, 2), 1.0), env, PARAMS, cfg)
        long = rollout_cost(state, np.full((24, 2), 1.0), env, PARAMS, cfg)
        assert long == pytest.approx(short, abs=1e-9)


class TestMPPIStep:
    def test_deterministic_under_seed(self):
        env = circular_lake(80.0)
        cfg = MPPIConfig(samples=32, horizon=8)
        state = VesselState(x=0.0, y=68.0, heading=math.pi, u=0.5)
        cmd1, plan1 = mppi_step(state, empty_plan(cfg), env, PARAMS, cfg, np.random.default_rng(3))
        cmd2, plan2 = mppi_step(state, empty_plan(cfg), env, PARAMS, cfg, np.random.default_rng(3))
        assert cmd1 == cmd2
        assert np.array_equal(plan1, plan2)

    def test_commands_always_clamped(self):
        env = circular_lake(80.0)
        cfg = MPPIConfig(samples=32, horizon=8, noise_sigma=2.0)
        state = VesselState(x=0.0, y=68.0, heading=math.pi)
        cmd, plan = mppi_step(state, empty_plan(cfg), env, PARAMS, cfg, np.random.default_rng(4))
        assert -1.0 <= cmd.left <= 1.0 and -1.0 <= cmd.right <= 1.0
        assert np.all(np.abs(plan) <= 1.0)

    def test_warm_start_shifts_plan(self):
        env = circular_lake(80.0)
        cfg = MPPIConfig(samples=8, horizon=4, noise_sigma=1e-9)
        plan = np.arange(8.0).reshape(4, 2) / 10.0
        state = VesselState(x=0.0, y=68.0, heading=math.pi, u=0.5)
        _, shifted = mppi_step(state, plan, env, PARAMS, cfg, np.random.default_rng(0))
        assert np.allclose(shifted[:3], plan[1:], atol=1e-6)
        assert np.allclose(shifted[3], plan[3], atol=1e-6)

    def test_update_improves_plan_cost(self):
        env = box_environment()
        cfg = MPPIConfig(samples=512, horizon=12, warm_start=False)
        state = VesselState(x=100.0, y=15.0, heading=0.0, u=0.8)
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            plan = empty_plan(cfg)
            _, updated = mppi_step(state, plan, env, PARAMS, cfg, rng)
            costs = rollout_costs(state, np.stack([plan, updated]), env, PARAMS, cfg)
            wins += costs[1] <= costs[0]
        assert wins >= 90  # >= 90 percent of trials

    def test_diagnostics_reported(self):
        env = box_environment()
        cfg = MPPIConfig(samples=64, horizon=8)
        state = VesselState(x=100.0, y=15.0, heading=0.0, u=0.8)
        diag = {}
        mppi_step(state, empty_plan(cfg), env, PARAMS, cfg, np.random.default_rng(0),
                  diagnostics=diag)
        assert diag["min_cost"] <= diag["mean_cost"]
        assert 1.0 <= diag["effective_samples"] <= cfg.samples

    def test_closed_loop_straight_shore_band(self):
        env = box_environment()
        cfg = MPPIConfig(samples=256, horizon=24)
        controller = MPPIController(env, cfg=cfg)
        controller.reset(np.random.default_rng(7))
        state = VesselState(x=60.0, y=15.0, heading=0.0, u=0.8)  # drifting parallel, 15 m out
        dt = cfg.substep_dt
        distances = []
        for step in range(360):  # 30 s at 12 Hz
            cmd = controller.act(state)
            for _ in range(cfg.physics_substeps):
                state = step_dynamics(state, cmd, PARAMS, dt)
            distances.append(float(shore_distances(env, np.array([[state.x, state.y]]))[0]))
        tail = np.array(distances[-120:])  # final 10 s
        assert 8.5 <= tail.mean() <= 11.5, tail.mean()


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            MPPIConfig(samples=1)
        with pytest.raises(ValueError):
            MPPIConfig(temperature=0.0)
        with pytest.raises(ValueError):
            MPPIConfig(noise_sigma=-0.1)
