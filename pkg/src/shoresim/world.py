"""Shoreline geometry: procedural lakes and channels with exact spatial queries.

Environments are closed polylines (one water-enclosing boundary plus optional
islands), densified so consecutive vertices sit at most a couple of meters
apart. Distance queries are exact point-to-segment computations; batched
queries prune candidates through a per-cell segment grid without
approximating anything.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

MAX_VERTEX_SPACING = 2.0   # m, Shoreline invariant
MIN_LAKE_RADIUS = 6.0      # m, reject noisy profiles that pinch the lake shut
HULL_CLEARANCE = 0.7       # m, minimum spawn distance from any shore


class OutsideWaterError(ValueError):
    """Raised for queries whose point is not inside the water region."""


@dataclass(frozen=True)
class Shoreline:
    """Closed simple polyline; the closing edge (last -> first) is implicit."""

    vertices: np.ndarray          # (N, 2) float64
    is_island: bool = False

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise ValueError("vertices must be an (N, 2) array")
        if len(verts) < 8:
            raise ValueError("a shoreline needs at least 8 vertices")
        if not np.all(np.isfinite(verts)):
            raise ValueError("shoreline vertices must be finite")
        gaps = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        if gaps.max() > MAX_VERTEX_SPACING:
            raise ValueError(
                f"vertex spacing {gaps.max():.3f} m exceeds {MAX_VERTEX_SPACING} m; densify first"
            )
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def perimeter(self) -> float:
        closed = np.vstack([self.vertices, self.vertices[:1]])
        return float(np.linalg.norm(np.diff(closed, axis=0), axis=1).sum())

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """(starts, ends) arrays of the closed segment loop."""
        return self.vertices, np.roll(self.vertices, -1, axis=0)


def densify(vertices: np.ndarray, max_spacing: float = 1.25) -> np.ndarray:
    """Subdivide closed-polyline edges until no chord exceeds max_spacing."""
    verts = np.asarray(vertices, dtype=float)
    out = []
    n = len(verts)
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        length = float(np.linalg.norm(b - a))
        pieces = max(1, int(math.ceil(length / max_spacing)))
        for k in range(pieces):
            out.append(a + (b - a) * (k / pieces))
    return np.asarray(out)


def has_self_intersections(shoreline: Shoreline) -> bool:
    """Brute-force segment-pair sweep; desk-scale validation helper."""
    a, b = shoreline.segments()
    n = len(a)
    d = b - a
    for i in range(n):
        # skip the segment itself and its two neighbours (shared endpoints)
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if len(js) == 0:
            continue
        denom = d[i, 0] * d[js, 1] - d[i, 1] * d[js, 0]
        rel = a[js] - a[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rel[:, 0] * d[js, 1] - rel[:, 1] * d[js, 0]) / denom
            s = (rel[:, 0] * d[i, 1] - rel[:, 1] * d[i, 0]) / denom
        hit = (denom != 0) & (t > 0) & (t < 1) & (s > 0) & (s < 1)
        if np.any(hit):
            return True
    return False


@dataclass
class Environment:
    """Immutable-after-construction water region with cached query structures."""

    boundary: Shoreline
    islands: list[Shoreline] = field(default_factory=list)
    name: str = "environment"

    def __post_init__(self):
        rings = [self.boundary.vertices] + [isl.vertices for isl in self.islands]
        seg_a = []
        seg_b = []
        for ring in rings:
            seg_a.append(ring)
            seg_b.append(np.roll(ring, -1, axis=0))
        self._seg_a = np.vstack(seg_a)
        self._seg_b = np.vstack(seg_b)
        self._seg_vec = self._seg_b - self._seg_a
        self._seg_len2 = np.maximum(np.einsum("ij,ij->i", self._seg_vec, self._seg_vec), 1e-300)
        self._vertices = np.vstack(rings)
        self._grid: _CandidateGrid | None = None

    @property
    def perimeter(self) -> float:
        return self.boundary.perimeter

    @property
    def segment_count(self) -> int:
        return len(self._seg_a)

    def bounds(self) -> tuple[float, float, float, float]:
        lo = self.boundary.vertices.min(axis=0)
        hi = self.boundary.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "boundary": self.boundary.vertices.tolist(),
            "islands": [isl.vertices.tolist() for isl in self.islands],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Environment":
        return cls(
            boundary=Shoreline(np.asarray(data["boundary"])),
            islands=[Shoreline(np.asarray(v), is_island=True) for v in data.get("islands", [])],
            name=data.get("name", "environment"),
        )


def save_environment(env: Environment, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(env.to_dict(), fh)


def load_environment(path) -> Environment:
    with open(path, "r", encoding="utf-8") as fh:
        return Environment.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Containment and distance queries
# ---------------------------------------------------------------------------

def _inside_ring(vertices: np.ndarray, point) -> bool:
    """Even-odd crossing test against one closed ring."""
    px, py = float(point[0]), float(point[1])
    a = vertices
    b = np.roll(vertices, -1, axis=0)
    straddles = (a[:, 1] > py) != (b[:, 1] > py)
    if not np.any(straddles):
        return False
    aa = a[straddles]
    bb = b[straddles]
    x_cross = aa[:, 0] + (py - aa[:, 1]) * (bb[:, 0] - aa[:, 0]) / (bb[:, 1] - aa[:, 1])
    return bool(np.count_nonzero(x_cross > px) % 2 == 1)


def contains_water(env: Environment, point) -> bool:
    """True when the point lies in the boundary interior and outside islands."""
    if not _inside_ring(env.boundary.vertices, point):
        return False
    return not any(_inside_ring(isl.vertices, point) for isl in env.islands)


def _segment_distances(points: np.ndarray, seg_a, seg_vec, seg_len2) -> np.ndarray:
    """Pairwise point-to-segment distances; points (N, 2) vs M segments -> (N, M)."""
    rel = points[:, None, :] - seg_a[None, :, :]
    t = np.einsum("nmj,mj->nm", rel, seg_vec) / seg_len2[None, :]
    np.clip(t, 0.0, 1.0, out=t)
    diff = rel - t[:, :, None] * seg_vec[None, :, :]
    return np.sqrt(np.einsum("nmj,nmj->nm", diff, diff))


def distance_to_shore(env: Environment, point) -> tuple[float, tuple[float, float]]:
    """Exact distance from a water point to the nearest shore segment.

    Returns (distance, nearest_point). Raises OutsideWaterError when the
    query point is not in the water region.
    """
    if not contains_water(env, point):
        raise OutsideWaterError(f"point {tuple(point)} is not inside the water region")
    p = np.asarray(point, dtype=float)
    rel = p[None, :] - env._seg_a
    t = np.einsum("ij,ij->i", rel, env._seg_vec) / env._seg_len2
    np.clip(t, 0.0, 1.0, out=t)
    closest = env._seg_a + t[:, None] * env._seg_vec
    d2 = np.einsum("ij,ij->i", p[None, :] - closest, p[None, :] - closest)
    idx = int(np.argmin(d2))
    nearest = closest[idx]
    return float(math.sqrt(d2[idx])), (float(nearest[0]), float(nearest[1]))


class _CandidateGrid:
    """Per-cell candidate segment lists that make batch queries exact + fast.

    For a cell with center c, half-diagonal s and exact center distance d_c,
    the segment nearest to any point p in the cell has a point within
    d(p) + |p - c| <= d_c + 2s of c, so the list of segments within that ball
    of the center provably contains every point's nearest segment.
    """

    cell_size = 4.0  # m

    margin = 16.0    # m beyond the bbox, so slightly-outside queries stay on-grid

    def __init__(self, env: "Environment"):
        lo = env._vertices.min(axis=0) - self.margin
        hi = env._vertices.max(axis=0) + self.margin
        self.origin = lo
        self.shape = np.maximum(np.ceil((hi - lo) / self.cell_size).astype(int), 1)
        xs = lo[0] + self.cell_size * (np.arange(self.shape[0]) + 0.5)
        ys = lo[1] + self.cell_size * (np.arange(self.shape[1]) + 0.5)
        centers = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        half_diag = self.cell_size * math.sqrt(2.0) / 2.0

        candidates: list[np.ndarray] = []
        chunk = 256
        for start in range(0, len(centers), chunk):
            block = centers[start : start + chunk]
            dists = _segment_distances(block, env._seg_a, env._seg_vec, env._seg_len2)
            radii = dists.min(axis=1) + 2.0 * half_diag + 1e-9
            for row, radius in zip(dists, radii):
                candidates.append(np.where(row <= radius)[0])
        self.candidates = candidates

    def cell_of(self, points: np.ndarray) -> np.ndarray:
        """Flat cell index per point, -1 for points off the grid."""
        ij = np.floor((points - self.origin) / self.cell_size).astype(int)
        inside = (
            (ij[:, 0] >= 0)
            & (ij[:, 0] < self.shape[0])
            & (ij[:, 1] >= 0)
            & (ij[:, 1] < self.shape[1])
        )
        flat = ij[:, 0] * self.shape[1] + ij[:, 1]
        flat[~inside] = -1
        return flat


def shore_distances(env: Environment, points: np.ndarray) -> np.ndarray:
    """Exact unsigned shore distances for a batch of points, (N,) result.

    Candidate segments come from a per-cell pruning grid built once per
    environment; results match the full segment scan exactly. Containment is
    not checked, so callers may query points on either side of the shoreline
    (rollouts that clip the shore still get finite values).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if env._grid is None:
        env._grid = _CandidateGrid(env)
    grid = env._grid

    out = np.empty(len(points))
    cells = grid.cell_of(points)
    order = np.argsort(cells, kind="stable")
    sorted_cells = cells[order]
    group_starts = np.flatnonzero(np.r_[True, sorted_cells[1:] != sorted_cells[:-1]])
    for gi, start in enumerate(group_starts):
        stop = group_starts[gi + 1] if gi + 1 < len(group_starts) else len(sorted_cells)
        rows = order[start:stop]
        cell = sorted_cells[start]
        if cell < 0:
            ids = slice(None)  # off-grid: full scan
            a, vec, len2 = env._seg_a, env._seg_vec, env._seg_len2
        else:
            ids = grid.candidates[cell]
            a, vec, len2 = env._seg_a[ids], env._seg_vec[ids], env._seg_len2[ids]
        out[rows] = _segment_distances(points[rows], a, vec, len2).min(axis=1)
    return out


# ---------------------------------------------------------------------------
# Spawn sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpawnPolicy:
    distance_range: tuple[float, float]
    heading_jitter: float | None  # rad about the shore-parallel heading; None = uniform

    @classmethod
    def preset(cls, name: str) -> "SpawnPolicy":
        if name in ("off", "moderate"):
            return cls(distance_range=(6.0, 16.0), heading_jitter=math.radians(30.0))
        if name == "aggressive":
            return cls(distance_range=(2.0, 30.0), heading_jitter=None)
        raise ValueError(f"unknown spawn policy {name!r}")


@dataclass(frozen=True)
class SpawnPose:
    x: float
    y: float
    heading: float
    shore_distance: float

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "heading": self.heading,
            "shore_distance": self.shore_distance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpawnPose":
        return cls(
            x=float(d["x"]),
            y=float(d["y"]),
            heading=float(d["heading"]),
            shore_distance=float(d["shore_distance"]),
        )


def sample_spawn(
    env: Environment,
    rng: np.random.Generator,
    policy: SpawnPolicy,
    max_tries: int = 1000,
) -> SpawnPose:
    """Sample a pose at a policy-distributed offset from the boundary.

    Draws the target shore distance uniformly from the policy range, walks
    inward along the local shore normal and keeps the pose only when the
    exact distance lands inside the range, so accepted distances follow the
    declared distribution. Headings run shore-parallel with the shore to
    port (plus jitter) unless the policy asks for uniform headings.
    """
    lo, hi = policy.distance_range
    if not lo < hi:
        raise ValueError("spawn distance range must be increasing")
    verts = env.boundary.vertices
    seg_vec = np.roll(verts, -1, axis=0) - verts
    seg_len = np.linalg.norm(seg_vec, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]

    for _ in range(max_tries):
        target = rng.uniform(lo, hi)
        s = rng.uniform(0.0, total)
        i = min(int(np.searchsorted(cum, s, side="right")) - 1, len(verts) - 1)
        frac = (s - cum[i]) / max(seg_len[i], 1e-12)
        q = verts[i] + frac * seg_vec[i]
        tangent = seg_vec[i] / max(seg_len[i], 1e-12)
        inward = np.array([-tangent[1], tangent[0]])  # CCW boundary: interior on the left
        p = q + target * inward
        if not contains_water(env, p):
            continue
        dist, _ = distance_to_shore(env, p)
        if not (lo <= dist <= hi) or abs(dist - target) > 0.25 or dist <= HULL_CLEARANCE:
            continue
        if policy.heading_jitter is None:
            heading = rng.uniform(-math.pi, math.pi)
        else:
            # travel against the CCW tangent puts the shore on the port side
            heading = math.atan2(-tangent[1], -tangent[0]) + rng.uniform(
                -policy.heading_jitter, policy.heading_jitter
            )
        return SpawnPose(
            x=float(p[0]),
            y=float(p[1]),
            heading=float((heading + math.pi) % (2 * math.pi) - math.pi),
            shore_distance=float(dist),
        )
    raise RuntimeError(f"no valid spawn found after {max_tries} tries (degenerate environment)")


# ---------------------------------------------------------------------------
# Procedural generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LakeSpec:
    base_radius: float = 80.0        # m
    noise_amplitude: float = 1.0     # master scale on the radial noise octaves
    # (radius fraction, cycles around the lake); the low octave shapes the
    # lake, the high one supplies tree-line style shoreline intricacy
    octaves: tuple[tuple[float, float], ...] = ((0.06, 3.0), (0.05, 11.0), (0.27, 38.0))
    hairpin: bool = True
    hairpin_depth: float = 0.5       # fraction of base radius
    hairpin_width: float = 0.115     # rad; sized for a roughly 8-12 m lobe throat
    island: bool = True
    island_radius: float = 14.0      # m
    island_passage: tuple[float, float] = (15.0, 25.0)  # m, allowed narrow-passage width
    max_spacing: float = 1.1         # m, target chord length after resampling


def _radial_profile(rng: np.random.Generator, spec: LakeSpec, amplitude: float):
    """Radius as a function of angle plus the hairpin location, on a dense grid."""
    theta = np.linspace(0.0, 2.0 * math.pi, 8192, endpoint=False)
    noise = np.zeros_like(theta)
    for frac, cycles in spec.octaves:
        # a few harmonics around each octave's base frequency
        for k in range(int(cycles), int(cycles) + 3):
            amp = amplitude * frac * spec.base_radius * rng.uniform(0.3, 1.0) / 3.0
            phase = rng.uniform(0.0, 2.0 * math.pi)
            noise += amp * np.cos(k * theta + phase)
    hairpin_theta = rng.uniform(0.0, 2.0 * math.pi)
    radius = np.full_like(theta, spec.base_radius)
    if spec.hairpin:
        delta = np.angle(np.exp(1j * (theta - hairpin_theta)))
        lobe = np.exp(-0.5 * (delta / spec.hairpin_width) ** 2)
        # fade the texture noise out across the lobe so the throat width is
        # set by the lobe shape, not by whichever harmonic lands there
        noise *= 1.0 - 0.9 * np.exp(-0.5 * (delta / (2.5 * spec.hairpin_width)) ** 2)
        radius -= spec.hairpin_depth * spec.base_radius * lobe
    return theta, radius + noise, hairpin_theta


def _resample_uniform_arc(theta: np.ndarray, radius: np.ndarray, spacing: float) -> np.ndarray:
    """Resample a polar profile at uniform arc length with ~spacing chords."""
    pts = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    n = max(64, int(math.ceil(total / spacing)))
    targets = np.linspace(0.0, total, n, endpoint=False)
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(pts) - 1)
    frac = (targets - cum[idx]) / np.maximum(seg[idx], 1e-12)
    return closed[idx] + frac[:, None] * (closed[idx + 1] - closed[idx])


def _island_ring(rng: np.random.Generator, center: np.ndarray, radius: float) -> np.ndarray:
    theta = np.linspace(0.0, 2.0 * math.pi, 180, endpoint=False)
    r = np.full_like(theta, radius)
    for k in (2, 3, 5):
        r += radius * 0.1 * rng.uniform(0.3, 1.0) * np.cos(k * theta + rng.uniform(0, 2 * math.pi))
    pts = center + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return pts[::-1]  # islands wound clockwise


def generate_lake(seed: int, spec: LakeSpec | None = None) -> Environment:
    """Procedural closed lake: perturbed circle, optional hairpin lobe + island.

    Deterministic in (seed, spec). Retries with dampened noise when the
    profile pinches the lake closed, and fails after 8 attempts.
    """
    spec = spec or LakeSpec()
    amplitude = spec.noise_amplitude
    for _ in range(8):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        theta, radius, hairpin_theta = _radial_profile(rng, spec, amplitude)
        if radius.min() >= MIN_LAKE_RADIUS:
            boundary = Shoreline(_resample_uniform_arc(theta, radius, spec.max_spacing))
            islands: list[Shoreline] = []
            if spec.island:
                islands.append(
                    _fit_island(rng, spec, theta, radius, hairpin_theta, boundary)
                )
            return Environment(boundary=boundary, islands=islands, name=f"lake-{seed}")
        amplitude *= 0.7
    raise ValueError("radial noise amplitude leaves no open water; reduce it")


def _fit_island(rng, spec: LakeSpec, theta, radius, hairpin_theta, boundary: Shoreline):
    pass_lo, pass_hi = spec.island_passage
    env_probe = Environment(boundary=boundary, islands=[], name="probe")
    for _ in range(40):
        ang = hairpin_theta + math.pi + rng.uniform(-0.9, 0.9)
        target = rng.uniform(pass_lo + 1.0, pass_hi - 1.0)
        rb = float(np.interp(ang % (2 * math.pi), theta, radius, period=2 * math.pi))
        rc = rb - target - spec.island_radius
        if rc < spec.island_radius + 8.0:
            continue
        center = rc * np.array([math.cos(ang), math.sin(ang)])
        ring = _island_ring(rng, center, spec.island_radius)
        gap = float(shore_distances(env_probe, ring).min())
        if gap < pass_lo:
            # nudge the island toward the lake center and re-measure
            shift = (pass_lo + 1.5) - gap
            center = center * max(0.0, (rc - shift) / rc)
            ring = ring - (ring.mean(axis=0) - center)
            gap = float(shore_distances(env_probe, ring).min())
        if not (pass_lo <= gap <= pass_hi):
            continue
        if not all(contains_water(env_probe, p) for p in ring[:: len(ring) // 12]):
            continue
        return Shoreline(densify(ring, spec.max_spacing), is_island=True)
    raise ValueError("could not place an island with the requested passage width")


@dataclass(frozen=True)
class ChannelSpec:
    length: float = 420.0      # m
    width: float = 70.0        # m between mean bank lines
    amplitude: float = 7.0     # m of bank meander
    cycles: float = 5.0        # meanders along the channel
    max_spacing: float = 1.1   # m


def generate_channel(seed: int, spec: ChannelSpec | None = None) -> Environment:
    """Closed channel reach: two roughly parallel perturbed banks plus end caps."""
    spec = spec or ChannelSpec()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    n = max(32, int(spec.length / spec.max_spacing))
    x = np.linspace(0.0, spec.length, n)

    def bank(base: float) -> np.ndarray:
        y = np.full_like(x, base)
        for k in range(1, 4):
            amp = spec.amplitude * rng.uniform(0.2, 1.0) / k
            phase = rng.uniform(0.0, 2.0 * math.pi)
            y += amp * np.sin(2.0 * math.pi * spec.cycles * k * x / spec.length + phase)
        return y

    low = bank(0.0)
    high = bank(spec.width)
    bottom = np.column_stack([x, low])
    top = np.column_stack([x[::-1], high[::-1]])
    loop = np.vstack([bottom, top])  # end caps become the joining edges
    boundary = Shoreline(densify(loop, spec.max_spacing))
    return Environment(boundary=boundary, name=f"channel-{seed}")


def circular_lake(radius: float = 80.0, max_spacing: float = 1.1) -> Environment:
    """Unperturbed circular fixture used by calibration and control tests."""
    spec = LakeSpec(
        base_radius=radius,
        noise_amplitude=0.0,
        hairpin=False,
        island=False,
        max_spacing=max_spacing,
    )
    env = generate_lake(seed=0, spec=spec)
    env.name = f"circle-r{radius:g}"
    return env
