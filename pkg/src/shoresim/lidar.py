"""Raycast 2D laser scanner: 270 degree field of view, 20 m range, 540 beams.

Beam i points at heading - 135deg + 0.5deg * i. Misses are reported as 0.
The scanner is mounted at the vessel origin. An optional noise model emulates
vegetation-style artifacts: beam dropout, pass-through of the first hit, and
range jitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .world import Environment

NUM_BEAMS = 540
ANGLE_MIN = math.radians(-135.0)
ANGLE_INCREMENT = math.radians(0.5)
RANGE_MAX = 20.0   # m
RANGE_MIN = 0.01   # m, smallest reportable hit
MISS = 0.0

BEAM_OFFSETS = ANGLE_MIN + ANGLE_INCREMENT * np.arange(NUM_BEAMS)


@dataclass(frozen=True)
class LaserScan:
    """One revolution of ranges in meters; 0 marks a miss."""

    ranges: np.ndarray  # (540,)

    def __post_init__(self):
        r = np.asarray(self.ranges, dtype=float)
        if r.shape != (NUM_BEAMS,):
            raise ValueError(f"expected {NUM_BEAMS} beams, got shape {r.shape}")
        hit = r != MISS
        if np.any(r[hit] <= 0) or np.any(r[hit] > RANGE_MAX + 1e-9) or not np.all(np.isfinite(r)):
            raise ValueError("ranges must be 0 (miss) or in (0, 20]")
        object.__setattr__(self, "ranges", r)

    def hit_mask(self) -> np.ndarray:
        return self.ranges != MISS


@dataclass(frozen=True)
class LidarNoiseModel:
    dropout_prob: float = 0.0       # per-beam chance a hit is lost
    passthrough_prob: float = 0.0   # per-beam chance the first hit is ignored
    range_jitter_sigma: float = 0.0  # m

    def __post_init__(self):
        for name in ("dropout_prob", "passthrough_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.range_jitter_sigma < 0:
            raise ValueError("range_jitter_sigma must be non-negative")

    @property
    def is_identity(self) -> bool:
        return self.dropout_prob == 0 and self.passthrough_prob == 0 and self.range_jitter_sigma == 0


def beam_angles(heading: float) -> np.ndarray:
    """World-frame beam directions for a vessel heading."""
    return heading + BEAM_OFFSETS


def raycast_scan(env: Environment, pose) -> LaserScan:
    """Cast all beams against every shoreline segment; deterministic.

    pose needs x, y, heading attributes (a VesselState works). Vectorized
    over beams x segments; at shoreline sizes this beats any Python-level
    spatial-grid walk, so no acceleration structure is used.
    """
    origin = np.array([pose.x, pose.y])
    angles = beam_angles(pose.heading)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])

    a = env._seg_a
    e = env._seg_vec
    rel = a - origin  # (S, 2)

    denom = dirs[:, 0, None] * e[None, :, 1] - dirs[:, 1, None] * e[None, :, 0]  # (B, S)
    t_num = rel[:, 0] * e[:, 1] - rel[:, 1] * e[:, 0]  # (S,)
    s_num = rel[None, :, 0] * dirs[:, 1, None] - rel[None, :, 1] * dirs[:, 0, None]  # (B, S)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num[None, :] / denom
        s = s_num / denom
    valid = (denom != 0) & (s >= 0.0) & (s <= 1.0) & (t >= 0.0) & (t <= RANGE_MAX)
    t = np.where(valid, t, np.inf)
    ranges = t.min(axis=1)
    ranges[~np.isfinite(ranges)] = MISS
    return LaserScan(ranges=ranges)


def apply_noise(scan: LaserScan, model: LidarNoiseModel, rng: np.random.Generator) -> LaserScan:
    """Corrupt a scan per the noise model; deterministic under a seeded rng.

    Only reflected beams are touched: dropout and pass-through zero them,
    surviving hits get gaussian range jitter clamped into (0, 20].
    """
    if model.is_identity:
        return scan
    ranges = scan.ranges.copy()
    hits = scan.hit_mask()
    n = int(hits.sum())
    if n == 0:
        return LaserScan(ranges=ranges)
    rolls = rng.random((n, 2))
    jitter = rng.normal(0.0, model.range_jitter_sigma, n) if model.range_jitter_sigma > 0 else np.zeros(n)
    lost = (rolls[:, 0] < model.dropout_prob) | (rolls[:, 1] < model.passthrough_prob)
    new_vals = np.clip(ranges[hits] + jitter, RANGE_MIN, RANGE_MAX)
    new_vals[lost] = MISS
    ranges[hits] = new_vals
    return LaserScan(ranges=ranges)
