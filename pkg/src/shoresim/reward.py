"""Shore-following reward: speed tracking plus shore-offset tracking.

total = 1.25 * speed_reward + 2.5 * distance_reward, where the speed term is
1 - |u - 1.0| while moving forward and a flat -0.625 while reversing, and
the distance term is max(-20, 1 - 2.5 * |d - 10|). The floor doubles as the
collision-adjacent penalty. A legacy quadratic speed term is selectable for
comparison runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ABSOLUTE = "absolute"
QUADRATIC = "quadratic"


@dataclass(frozen=True)
class RewardConfig:
    target_speed: float = 1.0        # m/s
    target_distance: float = 10.0    # m
    speed_weight: float = 1.25
    distance_weight: float = 2.5
    distance_slope: float = 2.5      # reward lost per meter of offset error
    distance_floor: float = -20.0
    reverse_penalty: float = 0.625   # flat speed term while u < 0
    speed_term: str = ABSOLUTE       # "absolute" (default) or "quadratic"

    def __post_init__(self):
        if self.target_speed <= 0 or self.target_distance <= 0:
            raise ValueError("targets must be positive")
        if self.speed_term not in (ABSOLUTE, QUADRATIC):
            raise ValueError(f"unknown speed_term {self.speed_term!r}")


@dataclass(frozen=True)
class RewardTerms:
    distance_error: float   # m, |shore_distance - target|
    speed_error: float      # m/s, |u - target|
    speed_reward: float
    distance_reward: float
    total: float

    def to_dict(self) -> dict:
        return {
            "distance_error": self.distance_error,
            "speed_error": self.speed_error,
            "speed_reward": self.speed_reward,
            "distance_reward": self.distance_reward,
            "total": self.total,
        }


def compute_reward(shore_distance: float, surge: float, cfg: RewardConfig | None = None) -> RewardTerms:
    """Evaluate the reward for an exact shore distance and surge velocity."""
    cfg = cfg or RewardConfig()
    if shore_distance < 0:
        raise ValueError("shore_distance must be non-negative")
    dp = abs(shore_distance - cfg.target_distance)
    dv = abs(surge - cfg.target_speed)
    if surge >= 0:
        if cfg.speed_term == ABSOLUTE:
            speed_reward = 1.0 - dv
        else:
            speed_reward = (cfg.target_speed**2 - dv**2) / cfg.target_speed**2
    else:
        speed_reward = -cfg.reverse_penalty
    distance_reward = max(cfg.distance_floor, 1.0 - cfg.distance_slope * dp)
    total = cfg.speed_weight * speed_reward + cfg.distance_weight * distance_reward
    return RewardTerms(
        distance_error=dp,
        speed_error=dv,
        speed_reward=speed_reward,
        distance_reward=distance_reward,
        total=total,
    )


def compute_reward_arrays(
    shore_distance: np.ndarray, surge: np.ndarray, cfg: RewardConfig | None = None
) -> np.ndarray:
    """Vectorized total reward; mirrors compute_reward elementwise."""
    cfg = cfg or RewardConfig()
    dp = np.abs(shore_distance - cfg.target_distance)
    dv = np.abs(surge - cfg.target_speed)
    if cfg.speed_term == ABSOLUTE:
        forward = 1.0 - dv
    else:
        forward = (cfg.target_speed**2 - dv**2) / cfg.target_speed**2
    speed_reward = np.where(surge >= 0, forward, -cfg.reverse_penalty)
    distance_reward = np.maximum(cfg.distance_floor, 1.0 - cfg.distance_slope * dp)
    return cfg.speed_weight * speed_reward + cfg.distance_weight * distance_reward
