"""Reference agents that act on wire observations only.

The continuous observation is a 256-vector of inverse ranges (1/m) covering
bearings from roughly -128 to +127 degrees (element j sits at
-135 + 0.5 * (2 * (j + 7) + 0.5) degrees); misses read 0.01 (1/100 m) and
real returns are at least 0.05 (1/20 m).
"""

from __future__ import annotations

import math

import numpy as np

MISS_VALUE = 0.01
HIT_FLOOR = 0.05

_BEARINGS = np.radians(-135.0 + 0.5 * (2.0 * (np.arange(256) + 7) + 0.5))
_PORT = _BEARINGS > 0
_STARBOARD = _BEARINGS < 0
_AHEAD = np.abs(_BEARINGS) < math.radians(25.0)


def _values(observation) -> np.ndarray:
    raw = observation["continuous"] if isinstance(observation, dict) else observation
    return np.asarray(raw, dtype=float)


class PDShoreFollower:
    """Hold the nearest shore at a fixed offset using only the scan.

    Per side, the nearest return's offset error (distance minus target) plus
    a damping term on its closing rate gives a turn demand toward that side;
    steering is the starboard demand minus the port demand, so a symmetric
    scan gives equal commands and a shore closer on one side yaws the bow
    away from it (that side's propeller pushes harder). A close return dead
    ahead adds an avoidance turn; losing the shore entirely arcs back toward
    the side last seen. Forward thrust is a fixed setting.
    """

    def __init__(self, target_distance: float = 10.0, thrust: float = 0.62):
        self.target_distance = target_distance
        self.thrust = thrust
        self.offset_gain = 0.09
        self.damping_gain = 0.55
        self._previous: tuple[float, float] | None = None
        self._last_side = 0.0

    def reset(self) -> None:
        self._previous = None
        self._last_side = 0.0

    def _demand(self, dist: float, rate: float, present: bool) -> float:
        if not present:
            return 0.0
        error = max(-8.0, min(8.0, dist - self.target_distance))
        return self.offset_gain * error + self.damping_gain * rate

    def act(self, observation) -> tuple[float, float]:
        values = _values(observation)
        port_val = float(values[_PORT].max())
        star_val = float(values[_STARBOARD].max())
        d_port = 1.0 / port_val
        d_star = 1.0 / star_val

        if self._previous is None:
            rate_port = rate_star = 0.0
        else:
            rate_port = d_port - self._previous[0]
            rate_star = d_star - self._previous[1]
        self._previous = (d_port, d_star)

        steer = self._demand(d_star, rate_star, star_val > HIT_FLOOR) - self._demand(
            d_port, rate_port, port_val > HIT_FLOOR
        )

        d_ahead = 1.0 / float(values[_AHEAD].max())
        if d_ahead < 12.0:
            away = 1.0 if d_port <= d_star else -1.0
            steer += away * (0.25 + 0.4 * (12.0 - d_ahead) / 12.0)

        if port_val > HIT_FLOOR or star_val > HIT_FLOOR:
            self._last_side = 1.0 if d_port <= d_star else -1.0
        elif self._last_side:
            steer -= self._last_side * 0.15

        steer = max(-0.5, min(0.5, steer))
        left = max(-1.0, min(1.0, self.thrust + steer))
        right = max(-1.0, min(1.0, self.thrust - steer))
        return left, right


def nearest_shore(observation) -> tuple[float, float]:
    """(range m, bearing rad) of the strongest return; range 100 on a miss."""
    values = _values(observation)
    idx = int(values.argmax())
    return 1.0 / float(values[idx]), float(_BEARINGS[idx])
