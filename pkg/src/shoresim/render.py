"""Replay rendering: per-step map frames and a top-down track plot.

A trajectory log carries its environment and poses, so the laser scans can
be recomputed and the projection images rebuilt offline. Frames are written
as PNGs; the track plot goes out both as a matplotlib figure and as a flat
CSV so other tools can redraw it.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from .dynamics import VesselState
from .lidar import raycast_scan
from .observations import render_projection
from .recording import EpisodeLog
from .world import Environment


def render_frames(log: EpisodeLog, out_dir, every: int = 1, upscale: int = 4) -> int:
    """Write one projection-image PNG per logged step; returns the count.

    Scans are recomputed noiselessly from the logged poses against the
    logged environment geometry.
    """
    env = Environment.from_dict(log.header["environment"])
    os.makedirs(out_dir, exist_ok=True)
    count = 0
    for rec in log.records[::every]:
        pose = VesselState(x=rec["x"], y=rec["y"], heading=rec["heading"])
        image = render_projection(raycast_scan(env, pose))
        frame = Image.fromarray(image.pixels, mode="RGB")
        if upscale > 1:
            frame = frame.resize(
                (image.pixels.shape[1] * upscale, image.pixels.shape[0] * upscale),
                Image.NEAREST,
            )
        frame.save(os.path.join(out_dir, f"step_{rec['t']:05d}.png"))
        count += 1
    return count


def write_track_csv(log: EpisodeLog, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "y", "heading", "u", "distance", "reward"])
        for rec in log.records:
            writer.writerow(
                [
                    rec["t"],
                    repr(rec["x"]),
                    repr(rec["y"]),
                    repr(rec["heading"]),
                    repr(rec["u"]),
                    repr(rec["distance"]),
                    repr(rec["reward"]),
                ]
            )


def plot_track(log: EpisodeLog, path) -> None:
    """Top-down figure: shoreline, islands, and the speed-colored track."""
    env = Environment.from_dict(log.header["environment"])
    xs = np.array([rec["x"] for rec in log.records])
    ys = np.array([rec["y"] for rec in log.records])
    us = np.array([rec["u"] for rec in log.records])

    fig, ax = plt.subplots(figsize=(8, 8))
    boundary = np.vstack([env.boundary.vertices, env.boundary.vertices[:1]])
    ax.plot(boundary[:, 0], boundary[:, 1], color="#2d6a4f", lw=1.2, label="shore")
    for isl in env.islands:
        ring = np.vstack([isl.vertices, isl.vertices[:1]])
        ax.fill(ring[:, 0], ring[:, 1], color="#b7e4c7", edgecolor="#2d6a4f", lw=1.0)
    points = ax.scatter(xs, ys, c=us, s=4, cmap="viridis")
    fig.colorbar(points, ax=ax, label="surge (m/s)")
    spawn = log.header["setup"]["spawn"]
    ax.plot(spawn["x"], spawn["y"], "r^", ms=8, label="spawn")
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"{env.name}: episode {log.header.get('episode_index', 0)}")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
