"""Deterministic 2D shore-following simulator for a differential-thrust USV."""

from .dynamics import (
    DynamicsParams,
    ThrustCommand,
    VesselState,
    set_episode_physics,
    step_dynamics,
    thrust_force,
)
from .episode import EpisodeConfig, EpisodeEngine, StepResult
from .lidar import LaserScan, LidarNoiseModel, apply_noise, raycast_scan
from .metrics import EpisodeMetrics, aggregate_metrics, episode_metrics
from .mppi import MPPIConfig, MPPIController, mppi_step, path_integral_update, rollout_cost
from .observations import ProjectionImage, continuous_transform, render_projection
from .randomization import DRConfig, EpisodeSetup, episode_rng, sample_episode_setup
from .reward import RewardConfig, RewardTerms, compute_reward
from .world import (
    ChannelSpec,
    Environment,
    LakeSpec,
    Shoreline,
    SpawnPolicy,
    SpawnPose,
    circular_lake,
    contains_water,
    distance_to_shore,
    generate_channel,
    generate_lake,
    sample_spawn,
    shore_distances,
)

__version__ = "0.1.0"
