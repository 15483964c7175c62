"""3-DOF planar dynamics for a differential-thrust surface vessel.

State is pose (x, y, heading) in the world frame plus body-frame velocities
(surge u, sway v, yaw rate r). Forces are two propellers with a deadband +
quadratic saturation curve, linear-plus-quadratic drag on the velocity
relative to the water current, and a global drag scale that models water
density changes and deliberate extra-drag scenarios.

Everything here is pure and deterministic; the array variants mirror the
scalar update step for step, so vectorized rollouts match single-vessel
integration bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi

REFERENCE_DENSITY = 1000.0  # kg/m^3, fresh water; drag scales with density/reference


def wrap_angle(angle: float) -> float:
    """Normalize an angle to [-pi, pi)."""
    return (angle + math.pi) % TWO_PI - math.pi


def _clamp_unit(x: float) -> float:
    return -1.0 if x < -1.0 else (1.0 if x > 1.0 else x)


@dataclass(frozen=True)
class VesselState:
    x: float = 0.0        # m, world frame
    y: float = 0.0        # m, world frame
    heading: float = 0.0  # rad, CCW from +x, stored wrapped to [-pi, pi)
    u: float = 0.0        # m/s, body surge (forward positive)
    v: float = 0.0        # m/s, body sway (port positive)
    r: float = 0.0        # rad/s, yaw rate (CCW positive)

    def __post_init__(self):
        for name in ("x", "y", "heading", "u", "v", "r"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite vessel state field {name!r}")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading, self.u, self.v, self.r])

    @classmethod
    def from_array(cls, arr) -> "VesselState":
        x, y, heading, u, v, r = (float(c) for c in arr)
        return cls(x=x, y=y, heading=heading, u=u, v=v, r=r)


@dataclass(frozen=True)
class ThrustCommand:
    """Normalized left/right propeller commands, clamped to [-1, 1]."""

    left: float
    right: float

    def __post_init__(self):
        object.__setattr__(self, "left", _clamp_unit(float(self.left)))
        object.__setattr__(self, "right", _clamp_unit(float(self.right)))

    def mirrored(self) -> "ThrustCommand":
        return ThrustCommand(left=self.right, right=self.left)


@dataclass(frozen=True)
class DynamicsParams:
    mass: float = 35.0               # kg
    yaw_inertia: float = 8.0         # kg m^2
    hull_half_beam: float = 0.35     # m, thruster lateral offset from centerline
    max_thrust_fwd: float = 45.0     # N per propeller
    max_thrust_rev: float = 25.0     # N per propeller (weaker in reverse)
    thrust_deadband: float = 0.1     # |cmd| below this produces no thrust
    # (surge, sway, yaw) drag coefficients; force = -(lin + quad*|w|)*w on the
    # velocity w relative to the current. Surge terms are calibrated so full
    # symmetric forward thrust tops out near 1.7 m/s in nominal water.
    linear_drag: tuple[float, float, float] = (6.0, 12.0, 4.0)
    quadratic_drag: tuple[float, float, float] = (27.5, 20.0, 6.0)
    water_density: float = 1000.0    # kg/m^3
    current: tuple[float, float] = (0.0, 0.0)  # m/s, world frame
    extra_drag_factor: float = 1.0   # >= 1; robustness scenario multiplier

    def __post_init__(self):
        if self.mass <= 0 or self.yaw_inertia <= 0:
            raise ValueError("mass and yaw_inertia must be positive")
        if any(c < 0 for c in self.linear_drag + self.quadratic_drag):
            raise ValueError("drag coefficients must be non-negative")
        if self.max_thrust_rev >= self.max_thrust_fwd:
            raise ValueError("reverse thrust limit must be below forward limit")
        if not 0.0 <= self.thrust_deadband < 1.0:
            raise ValueError("thrust_deadband must be in [0, 1)")

    @property
    def drag_scale(self) -> float:
        return (self.water_density / REFERENCE_DENSITY) * self.extra_drag_factor


def thrust_force(cmd: float, params: DynamicsParams) -> float:
    """Map a normalized command to propeller force in newtons.

    Zero inside the deadband, then a quadratic ramp up to the forward or
    reverse limit; monotone non-decreasing in cmd.
    """
    c = _clamp_unit(float(cmd))
    mag = abs(c)
    if mag < params.thrust_deadband:
        return 0.0
    peak = params.max_thrust_fwd if c > 0 else params.max_thrust_rev
    frac = (mag - params.thrust_deadband) / (1.0 - params.thrust_deadband)
    return math.copysign(peak * frac * frac, c)


def step_dynamics(
    state: VesselState, cmd: ThrustCommand, params: DynamicsParams, dt: float
) -> VesselState:
    """Advance the vessel by one semi-implicit Euler step of length dt.

    Velocities are updated from thrust, differential-thrust yaw moment and
    drag on the current-relative velocity, then the pose is integrated with
    the updated velocities. Pure function: identical inputs give identical
    outputs.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")

    f_left = thrust_force(cmd.left, params)
    f_right = thrust_force(cmd.right, params)
    surge_thrust = f_left + f_right
    # Right propeller ahead of left pushes the bow to port (CCW positive).
    yaw_moment = (f_right - f_left) * params.hull_half_beam

    cos_h = math.cos(state.heading)
    sin_h = math.sin(state.heading)
    cx, cy = params.current
    cur_u = cx * cos_h + cy * sin_h
    cur_v = -cx * sin_h + cy * cos_h
    u_rel = state.u - cur_u
    v_rel = state.v - cur_v

    scale = params.drag_scale
    lu, lv, lr = params.linear_drag
    qu, qv, qr = params.quadratic_drag
    drag_u = scale * (lu + qu * abs(u_rel)) * u_rel
    drag_v = scale * (lv + qv * abs(v_rel)) * v_rel
    drag_r = scale * (lr + qr * abs(state.r)) * state.r

    u_new = state.u + (surge_thrust - drag_u) / params.mass * dt
    v_new = state.v + (-drag_v) / params.mass * dt
    r_new = state.r + (yaw_moment - drag_r) / params.yaw_inertia * dt

    heading_new = wrap_angle(state.heading + r_new * dt)
    cos_n = math.cos(heading_new)
    sin_n = math.sin(heading_new)
    x_new = state.x + (u_new * cos_n - v_new * sin_n) * dt
    y_new = state.y + (u_new * sin_n + v_new * cos_n) * dt

    return VesselState(x=x_new, y=y_new, heading=heading_new, u=u_new, v=v_new, r=r_new)


def thrust_force_array(cmd: np.ndarray, params: DynamicsParams) -> np.ndarray:
    """Vectorized thrust curve; elementwise identical to thrust_force."""
    c = np.clip(np.asarray(cmd, dtype=float), -1.0, 1.0)
    mag = np.abs(c)
    frac = np.clip(
        (mag - params.thrust_deadband) / (1.0 - params.thrust_deadband), 0.0, None
    )
    peak = np.where(c > 0, params.max_thrust_fwd, params.max_thrust_rev)
    return np.sign(c) * (peak * frac * frac)


def step_dynamics_array(
    states: np.ndarray, cmds: np.ndarray, params: DynamicsParams, dt: float
) -> np.ndarray:
    """Step N vessels at once; states (N, 6) as [x, y, heading, u, v, r].

    Mirrors step_dynamics elementwise so batched rollouts agree with the
    scalar integrator to floating-point identity.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError("dt must be in (0, 0.1]")
    states = np.asarray(states, dtype=float)
    cmds = np.asarray(cmds, dtype=float)

    forces = thrust_force_array(cmds, params)
    surge_thrust = forces[:, 0] + forces[:, 1]
    yaw_moment = (forces[:, 1] - forces[:, 0]) * params.hull_half_beam

    heading = states[:, 2]
    u = states[:, 3]
    v = states[:, 4]
    r = states[:, 5]
    cos_h = np.cos(heading)
    sin_h = np.sin(heading)
    cx, cy = params.current
    cur_u = cx * cos_h + cy * sin_h
    cur_v = -cx * sin_h + cy * cos_h
    u_rel = u - cur_u
    v_rel = v - cur_v

    scale = params.drag_scale
    lu, lv, lr = params.linear_drag
    qu, qv, qr = params.quadratic_drag
    drag_u = scale * (lu + qu * np.abs(u_rel)) * u_rel
    drag_v = scale * (lv + qv * np.abs(v_rel)) * v_rel
    drag_r = scale * (lr + qr * np.abs(r)) * r

    u_new = u + (surge_thrust - drag_u) / params.mass * dt
    v_new = v + (-drag_v) / params.mass * dt
    r_new = r + (yaw_moment - drag_r) / params.yaw_inertia * dt

    heading_new = (heading + r_new * dt + np.pi) % TWO_PI - np.pi
    cos_n = np.cos(heading_new)
    sin_n = np.sin(heading_new)
    x_new = states[:, 0] + (u_new * cos_n - v_new * sin_n) * dt
    y_new = states[:, 1] + (u_new * sin_n + v_new * cos_n) * dt

    return np.column_stack([x_new, y_new, heading_new, u_new, v_new, r_new])


def kinetic_energy(state: VesselState, params: DynamicsParams) -> float:
    """Planar kinetic energy, joules."""
    return 0.5 * params.mass * (state.u**2 + state.v**2) + 0.5 * params.yaw_inertia * state.r**2


def set_episode_physics(params: DynamicsParams, setup) -> DynamicsParams:
    """Return params with the per-episode density and current applied."""
    return replace(params, water_density=setup.density, current=tuple(setup.current))
