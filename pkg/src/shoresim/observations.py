"""Observation encoders: the continuous scan vector and the local-map image.

Two encodings of a raw laser scan:

* continuous: misses replaced by a large range, everything inverted to
  1/range, min-pooled with stride 2, then trimmed by 7 on each side to a
  length-256 vector. Inverting before pooling means the farther return of
  each pair wins, suppressing spurious close hits.
* projection: a 20 m x 12 m top-down local map at 0.1 m/px (200x120), blue
  water background, a 4 m red disc stamped on every hit, and a 1 m wide
  black track band at the target offset from the shore mass, finally
  box-resized to 64x64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .lidar import ANGLE_INCREMENT, ANGLE_MIN, NUM_BEAMS, BEAM_OFFSETS, LaserScan

LARGE_RANGE = 100.0        # m, stands in for misses before inversion
CONTINUOUS_LENGTH = 256
POOL_STRIDE = 2
EDGE_TRIM = 7

FULL_WIDTH = 200           # px, 20 m
FULL_HEIGHT = 120          # px, 12 m
RESOLUTION = 0.1           # m/px
ROBOT_COL = 100            # px from the left
ROBOT_ROW = 20             # px from the top; heading points down-canvas
OUTPUT_SIZE = 64

WATER_COLOR = np.array([0, 0, 255], dtype=np.uint8)
SHORE_COLOR = np.array([255, 0, 0], dtype=np.uint8)
TRACK_COLOR = np.array([0, 0, 0], dtype=np.uint8)


def continuous_transform(scan: LaserScan) -> np.ndarray:
    """Encode a scan as the length-256 inverse-range vector."""
    ranges = np.asarray(scan.ranges, dtype=float)
    if ranges.shape != (NUM_BEAMS,):
        raise ValueError(f"expected {NUM_BEAMS} beams, got shape {ranges.shape}")
    filled = np.where(ranges == 0.0, LARGE_RANGE, ranges)
    inverted = 1.0 / filled
    pooled = inverted.reshape(-1, POOL_STRIDE).min(axis=1)
    return pooled[EDGE_TRIM:-EDGE_TRIM].copy()


def continuous_bearings() -> np.ndarray:
    """Body-frame bearing (rad) of each continuous-scan element."""
    pair_centers = ANGLE_MIN + ANGLE_INCREMENT * (POOL_STRIDE * np.arange(NUM_BEAMS // POOL_STRIDE) + 0.5)
    return pair_centers[EDGE_TRIM:-EDGE_TRIM]


@dataclass(frozen=True)
class ProjectionImage:
    pixels: np.ndarray    # (64, 64, 3) uint8
    full_res: np.ndarray  # (120, 200, 3) uint8, pre-resize canvas

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()


def hit_pixels(scan: LaserScan) -> np.ndarray:
    """Full-res (row, col) float coordinates of reflected beams, (H, 2).

    The robot sits at (ROBOT_ROW, ROBOT_COL) with forward pointing down the
    canvas and the port side to the left; hits may land outside the canvas.
    """
    hits = scan.hit_mask()
    ranges = scan.ranges[hits]
    bearings = BEAM_OFFSETS[hits]
    forward = ranges * np.cos(bearings)
    port = ranges * np.sin(bearings)
    rows = ROBOT_ROW + forward / RESOLUTION
    cols = ROBOT_COL - port / RESOLUTION
    return np.column_stack([rows, cols])


def _box_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) fractional-coverage averaging weights; rows sum to 1."""
    scale = n_in / n_out
    w = np.zeros((n_out, n_in))
    for i in range(n_out):
        lo = i * scale
        hi = lo + scale
        for j in range(int(math.floor(lo)), min(int(math.ceil(hi)), n_in)):
            w[i, j] = (min(j + 1.0, hi) - max(float(j), lo)) / scale
    return w

_ROW_WEIGHTS = _box_weights(FULL_HEIGHT, OUTPUT_SIZE)
_COL_WEIGHTS = _box_weights(FULL_WIDTH, OUTPUT_SIZE)


def resize_area(img: np.ndarray) -> np.ndarray:
    """Exact box-filter resize of the full canvas to 64x64 uint8."""
    rows = np.tensordot(_ROW_WEIGHTS, img.astype(float), axes=(1, 0))       # (64, W, 3)
    both = np.tensordot(rows, _COL_WEIGHTS, axes=(1, 1))                    # (64, 3, 64)
    return np.clip(np.rint(both.transpose(0, 2, 1)), 0, 255).astype(np.uint8)


def render_projection(
    scan: LaserScan,
    target_distance: float = 10.0,
    disc_radius: float = 4.0,
    band_width: float = 1.0,
) -> ProjectionImage:
    """Rasterize the local-map image for a scan.

    Fill blue, stamp a red disc of disc_radius on every hit, then paint the
    band of pixels whose distance to the nearest hit is within band_width/2
    of target_distance black (painted last, so it wins overlaps). With no
    hits the canvas stays blue. Hard edges, no anti-aliasing; deterministic.
    """
    canvas = np.empty((FULL_HEIGHT, FULL_WIDTH, 3), dtype=np.uint8)
    canvas[:, :] = WATER_COLOR
    hits = hit_pixels(scan)
    if len(hits) > 0:
        rr, cc = np.meshgrid(
            np.arange(FULL_HEIGHT, dtype=float), np.arange(FULL_WIDTH, dtype=float), indexing="ij"
        )
        grid = np.column_stack([rr.ravel(), cc.ravel()])
        nearest, _ = cKDTree(hits).query(grid)
        nearest = nearest.reshape(FULL_HEIGHT, FULL_WIDTH)
        canvas[nearest <= disc_radius / RESOLUTION] = SHORE_COLOR
        lo = (target_distance - band_width / 2.0) / RESOLUTION
        hi = (target_distance + band_width / 2.0) / RESOLUTION
        canvas[(nearest >= lo) & (nearest <= hi)] = TRACK_COLOR
    return ProjectionImage(pixels=resize_area(canvas), full_res=canvas)
