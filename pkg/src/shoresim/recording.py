"""Trajectory logs and the batch episode runner.

Logs are JSONL: a header record carrying everything needed to replay the
episode standalone (run config, environment geometry, randomization setup),
followed by one flat record per step. Float formatting relies on Python's
shortest-roundtrip repr, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .episode import EpisodeEngine, StepResult
from .metrics import EpisodeMetrics, episode_metrics


def make_record(t: int, action, result: StepResult) -> dict:
    info = result.info
    terms = result.reward
    return {
        "t": t,
        "x": float(info["x"]),
        "y": float(info["y"]),
        "heading": float(info["heading"]),
        "u": float(info["u"]),
        "v": float(info["v"]),
        "r": float(info["r"]),
        "action": [float(action[0]), float(action[1])],
        "reward": float(terms.total),
        "speed_reward": float(terms.speed_reward),
        "distance_reward": float(terms.distance_reward),
        "distance": float(info["distance"]),
        "collision": bool(info["collision"]),
        "intervention": bool(info["intervention"]),
        "done": bool(result.done),
    }


@dataclass
class EpisodeLog:
    header: dict
    records: list[dict]

    @property
    def initial_pose(self) -> tuple[float, float]:
        spawn = self.header["setup"]["spawn"]
        return (spawn["x"], spawn["y"])

    def metrics(self, episode: str | None = None) -> EpisodeMetrics:
        label = episode if episode is not None else str(self.header.get("episode_index", 0))
        hz = self.header.get("control_hz", 12.0)
        return episode_metrics(
            self.records, initial_pose=self.initial_pose, control_hz=hz, episode=label
        )


def run_episode(engine: EpisodeEngine, agent, run_seed: int, episode_index: int) -> EpisodeLog:
    """Drive one episode to termination and return its log."""
    obs = engine.reset(run_seed, episode_index)
    if hasattr(agent, "begin_episode"):
        agent.begin_episode(run_seed, episode_index, engine)
    info = engine.last_info
    records = []
    t = 0
    while True:
        action = agent.act(obs, info)
        result = engine.step(action)
        t += 1
        records.append(make_record(t, action, result))
        obs = result.observation
        info = result.info
        if result.done:
            break
    header = {
        "type": "header",
        "run_seed": run_seed,
        "episode_index": episode_index,
        "control_hz": engine.episode_cfg.control_hz,
        "observation_mode": engine.episode_cfg.observation_mode,
        "setup": engine.setup.to_dict(),
        "environment": engine.env.to_dict(),
    }
    return EpisodeLog(header=header, records=records)


def write_episode_jsonl(path, log: EpisodeLog) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(log.header, sort_keys=True) + "\n")
        for rec in log.records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_episode_jsonl(path) -> EpisodeLog:
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise ValueError(f"{path} is not an episode log (missing header record)")
    return EpisodeLog(header=lines[0], records=lines[1:])
