"""Remote episode driving and client-side metric recomputation.

The metrics here are computed independently of the server so a run can be
cross-checked field by field against the CSV the server writes for the same
episodes: event rates per 10 simulated minutes, mean/std of surge and shore
distance over all steps, and distance traveled from the spawn pose onward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .client import RemoteEnvironment


@dataclass(frozen=True)
class RemoteEpisodeMetrics:
    episode: str
    steps: int
    collisions_per_10min: float
    interventions_per_10min: float
    vel_mean: float
    vel_std: float
    dist_mean: float
    dist_std: float
    distance_traveled: float
    partial: bool = False  # connection died mid-episode

    def as_comparable(self) -> dict:
        return {
            "episode": self.episode,
            "steps": self.steps,
            "collisions_per_10min": self.collisions_per_10min,
            "interventions_per_10min": self.interventions_per_10min,
            "vel_mean": self.vel_mean,
            "vel_std": self.vel_std,
            "dist_mean": self.dist_mean,
            "dist_std": self.dist_std,
            "distance_traveled": self.distance_traveled,
        }


def metrics_from_steps(
    infos: list[dict],
    spawn: dict,
    control_hz: float,
    episode: str = "0",
    partial: bool = False,
) -> RemoteEpisodeMetrics:
    if not infos:
        raise ValueError("no steps recorded")
    seconds = len(infos) / control_hz
    collisions = sum(1 for i in infos if i["collision"])
    interventions = sum(1 for i in infos if i["intervention"])
    surges = np.array([i["u"] for i in infos])
    dists = np.array([i["distance"] for i in infos])
    xs = [spawn["x"]] + [i["x"] for i in infos]
    ys = [spawn["y"]] + [i["y"] for i in infos]
    traveled = sum(
        math.hypot(xs[i + 1] - xs[i], ys[i + 1] - ys[i]) for i in range(len(infos))
    )
    return RemoteEpisodeMetrics(
        episode=episode,
        steps=len(infos),
        collisions_per_10min=collisions * 600.0 / seconds,
        interventions_per_10min=interventions * 600.0 / seconds,
        vel_mean=float(surges.mean()),
        vel_std=float(surges.std()),
        dist_mean=float(dists.mean()),
        dist_std=float(dists.std()),
        distance_traveled=traveled,
        partial=partial,
    )


def run_remote_episodes(
    env: RemoteEnvironment,
    agent,
    episodes: int,
    seed: int,
    max_steps: int | None = None,
) -> list[RemoteEpisodeMetrics]:
    """Drive episodes over the wire and recompute their metrics locally.

    A mid-episode disconnect flags that episode partial and stops; earlier
    complete episodes are still returned.
    """
    if episodes <= 0:
        raise ValueError("need at least one episode")
    results: list[RemoteEpisodeMetrics] = []
    for episode in range(episodes):
        obs = env.reset(seed, episode)
        if hasattr(agent, "reset"):
            agent.reset()
        spawn = env.last_setup["spawn"]
        infos: list[dict] = []
        partial = False
        done = False
        while not done:
            action = agent.act(obs)
            try:
                obs, _, done, info = env.step(action)
            except ConnectionError:
                partial = True
                break
            infos.append(info)
            if max_steps is not None and len(infos) >= max_steps:
                break
        if infos:
            results.append(
                metrics_from_steps(infos, spawn, env.control_hz, episode=str(episode), partial=partial)
            )
        if partial:
            break
    return results
