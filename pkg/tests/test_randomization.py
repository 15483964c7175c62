import numpy as np
import pytest

from shoresim.randomization import DRConfig, episode_rng, sample_episode_setup
from shoresim.world import SpawnPose, circular_lake


@pytest.fixture(scope="module")
def env():
    return circular_lake(80.0)


class TestSampling:
    def test_disabled_dimensions_take_nominal_values(self, env):
        cfg = DRConfig.disabled()
        setup = sample_episode_setup(episode_rng(0, 0), cfg, env)
        assert setup.current == (0.0, 0.0)
        assert setup.density == 1000.0
        assert 6.0 <= setup.spawn.shore_distance <= 16.0  # nominal moderate spawn

    def test_same_seed_same_setup(self, env):
        cfg = DRConfig()
        a = sample_episode_setup(episode_rng(11, 4), cfg, env, seed=4)
        b = sample_episode_setup(episode_rng(11, 4), cfg, env, seed=4)
        assert a == b

    def test_distinct_seeds_distinct_setups(self, env):
        cfg = DRConfig()
        seen = set()
        for episode in range(300):
            setup = sample_episode_setup(episode_rng(0, episode), cfg, env, seed=episode)
            key = (setup.density, setup.current, setup.spawn.x, setup.spawn.y)
            assert key not in seen
            seen.add(key)

    def test_ranges_respected(self, env):
        cfg = DRConfig()
        for episode in range(500):
            setup = sample_episode_setup(episode_rng(1, episode), cfg, env)
            assert 1000.0 <= setup.density <= 2500.0
            assert np.hypot(*setup.current) <= 0.4 + 1e-12

    def test_law_of_large_numbers(self, env):
        cfg = DRConfig()
        rng = episode_rng(2, 0)
        densities = []
        speeds = []
        for _ in range(10_000):
            if cfg.randomize_current:
                speed = rng.uniform(*cfg.current_speed_range)
                rng.uniform(0.0, 2 * np.pi)
                speeds.append(speed)
            densities.append(rng.uniform(*cfg.density_range))
        assert np.mean(densities) == pytest.approx(1750.0, abs=15.0)
        assert np.mean(speeds) == pytest.approx(0.2, abs=0.005)

    def test_fixed_spawn_override(self, env):
        spawn = SpawnPose(x=1.0, y=2.0, heading=0.5, shore_distance=9.0)
        cfg = DRConfig(fixed_spawn=spawn)
        setup = sample_episode_setup(episode_rng(0, 0), cfg, env)
        assert setup.spawn == spawn

    def test_setup_serialization_roundtrip(self, env):
        from shoresim.randomization import EpisodeSetup

        setup = sample_episode_setup(episode_rng(5, 1), DRConfig(), env, seed=1)
        assert EpisodeSetup.from_dict(setup.to_dict()) == setup

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ValueError):
            DRConfig(density_range=(2000.0, 1000.0))
        with pytest.raises(ValueError):
            DRConfig(spawn_policy="bananas")


class TestStreams:
    def test_streams_are_independent(self):
        a = episode_rng(0, 0, stream=0).random(4)
        b = episode_rng(0, 0, stream=1).random(4)
        assert not np.array_equal(a, b)

    def test_episode_streams_differ(self):
        a = episode_rng(0, 0).random(4)
        b = episode_rng(0, 1).random(4)
        assert not np.array_equal(a, b)

    def test_philox_backs_the_stream(self):
        assert isinstance(episode_rng(0, 0).bit_generator, np.random.Philox)
