"""Evaluation statistics over step records.

A step record is the flat per-step dict produced by the episode runner (and
by the protocol server): pose, surge, action, reward terms, shore distance
and the collision/intervention flags. Metrics are the per-10-simulated-minute
event rates, mean +/- std of surge and shore distance over all steps, and
the distance traveled along the pose track.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

CSV_COLUMNS = [
    "episode",
    "steps",
    "collisions_per_10min",
    "interventions_per_10min",
    "vel_mean",
    "vel_std",
    "dist_mean",
    "dist_std",
    "distance_traveled",
]


@dataclass(frozen=True)
class EpisodeMetrics:
    episode: str
    steps: int
    collisions_per_10min: float
    interventions_per_10min: float
    vel_mean: float
    vel_std: float
    dist_mean: float
    dist_std: float
    distance_traveled: float

    def row(self) -> list:
        return [
            self.episode,
            self.steps,
            repr(self.collisions_per_10min),
            repr(self.interventions_per_10min),
            repr(self.vel_mean),
            repr(self.vel_std),
            repr(self.dist_mean),
            repr(self.dist_std),
            repr(self.distance_traveled),
        ]


def _track_length(records, initial_pose) -> float:
    xs = [r["x"] for r in records]
    ys = [r["y"] for r in records]
    if initial_pose is not None:
        xs = [initial_pose[0]] + xs
        ys = [initial_pose[1]] + ys
    return float(np.hypot(np.diff(xs), np.diff(ys)).sum())


def episode_metrics(
    records: list[dict],
    initial_pose: tuple[float, float] | None = None,
    control_hz: float = 12.0,
    episode: str = "0",
) -> EpisodeMetrics:
    """Statistics for one episode's step records."""
    if not records:
        raise ValueError("no step records")
    return _metrics([records], [initial_pose], control_hz, episode)


def aggregate_metrics(
    episodes: list[list[dict]],
    initial_poses: list[tuple[float, float] | None] | None = None,
    control_hz: float = 12.0,
    episode: str = "all",
) -> EpisodeMetrics:
    """Pooled statistics over several episodes: rates over total simulated
    time, means/stds over all steps, distances summed."""
    if not episodes or any(not ep for ep in episodes):
        raise ValueError("need at least one non-empty episode")
    poses = initial_poses if initial_poses is not None else [None] * len(episodes)
    return _metrics(episodes, poses, control_hz, episode)


def _metrics(episodes, initial_poses, control_hz, label) -> EpisodeMetrics:
    total_steps = sum(len(ep) for ep in episodes)
    sim_seconds = total_steps / control_hz
    collisions = sum(sum(1 for r in ep if r["collision"]) for ep in episodes)
    interventions = sum(sum(1 for r in ep if r["intervention"]) for ep in episodes)
    surges = np.array([r["u"] for ep in episodes for r in ep], dtype=float)
    dists = np.array([r["distance"] for ep in episodes for r in ep], dtype=float)
    traveled = sum(_track_length(ep, pose) for ep, pose in zip(episodes, initial_poses))
    per_10min = 600.0 / sim_seconds
    return EpisodeMetrics(
        episode=str(label),
        steps=total_steps,
        collisions_per_10min=collisions * per_10min,
        interventions_per_10min=interventions * per_10min,
        vel_mean=float(surges.mean()),
        vel_std=float(surges.std()),
        dist_mean=float(dists.mean()),
        dist_std=float(dists.std()),
        distance_traveled=traveled,
    )


def write_metrics_csv(path, rows: list[EpisodeMetrics]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for m in rows:
            writer.writerow(m.row())


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        out = []
        for row in csv.DictReader(fh):
            parsed = dict(row)
            parsed["steps"] = int(row["steps"])
            for key in CSV_COLUMNS[2:]:
                parsed[key] = float(row[key])
            out.append(parsed)
        return out
