"""Client SDK for the shore-following environment wire protocol."""

from .agents import PDShoreFollower, nearest_shore
from .client import ProtocolError, RemoteEnvironment, StateError, decode_observation
from .evaluate import RemoteEpisodeMetrics, metrics_from_steps, run_remote_episodes
from .loaders import load_metrics_csv, load_trajectory_jsonl

__version__ = "0.1.0"
