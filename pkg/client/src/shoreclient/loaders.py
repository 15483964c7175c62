"""Readers for the server's file artifacts (metrics CSV, trajectory JSONL)."""

from __future__ import annotations

import csv
import json

METRIC_FIELDS = (
    "collisions_per_10min",
    "interventions_per_10min",
    "vel_mean",
    "vel_std",
    "dist_mean",
    "dist_std",
    "distance_traveled",
)


def load_metrics_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for row in csv.DictReader(fh):
            parsed = {"episode": row["episode"], "steps": int(row["steps"])}
            for key in METRIC_FIELDS:
                parsed[key] = float(row[key])
            rows.append(parsed)
        return rows


def load_trajectory_jsonl(path) -> tuple[dict, list[dict]]:
    """Returns (header, step records)."""
    with open(path, encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise ValueError(f"{path} is not a trajectory log")
    return lines[0], lines[1:]
