"""Robot-navigation grid world: slip dynamics, Gaussian reward field, waypoint features."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .markov import Mdp
from .policy import FeatureMap

NORTH, EAST, WEST, SOUTH = 0, 1, 2, 3
ACTION_NAMES = ("North", "East", "West", "South")
MOVES = ((0, 1), (1, 0), (-1, 0), (0, -1))
# perpendicular neighbours reached by a slip, per action
LATERAL = {NORTH: (WEST, EAST), SOUTH: (WEST, EAST), EAST: (NORTH, SOUTH), WEST: (NORTH, SOUTH)}
GAUSS_NORM = 1.0 / math.sqrt(2.0 * math.pi)


def _default_reward_waypoints():
    return [((1, 1), 1.0), ((11, 1), 20.0), ((1, 11), 20.0), ((11, 11), 1.0)]


def _default_feature_waypoints():
    # waypoint i = 6*row + col + 1, row-major from the south-west corner
    return [(c, r) for r in range(1, 12, 2) for c in range(1, 12, 2)]


@dataclass(frozen=True)
class GridSpec:
    width: int = 13
    height: int = 13
    reward_waypoints: list = field(default_factory=_default_reward_waypoints)
    feature_waypoints: list = field(default_factory=_default_feature_waypoints)
    intended_prob: float = 0.8
    slip_prob: float = 0.1

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigurationError("grid dimensions must be positive")
        if abs(self.intended_prob + 2.0 * self.slip_prob - 1.0) > 1e-12:
            raise ConfigurationError("intended_prob + 2 * slip_prob must equal 1")
        if self.intended_prob < 0 or self.slip_prob < 0:
            raise ConfigurationError("move probabilities must be non-negative")
        for (x1, x2), _ in self.reward_waypoints:
            self._check_inside(x1, x2)
        for x1, x2 in self.feature_waypoints:
            self._check_inside(x1, x2)

    def _check_inside(self, x1, x2):
        if not (0 <= x1 < self.width and 0 <= x2 < self.height):
            raise ConfigurationError(f"waypoint ({x1}, {x2}) lies outside the grid")

    @property
    def num_states(self):
        return self.width * self.height

    def index(self, x1, x2):
        return x1 + self.width * x2

    def coords(self, s):
        return s % self.width, s // self.width

    def step(self, x1, x2, action):
        """Cell reached by moving in *action*'s direction; off-grid moves stay put."""
        dx, dy = MOVES[action]
        y1, y2 = x1 + dx, x2 + dy
        if 0 <= y1 < self.width and 0 <= y2 < self.height:
            return y1, y2
        return x1, x2

    def mirrored(self):
        """Left-right mirror image of this spec."""
        w = self.width - 1
        return GridSpec(
            self.width,
            self.height,
            [((w - x1, x2), r) for (x1, x2), r in self.reward_waypoints],
            [(w - x1, x2) for x1, x2 in self.feature_waypoints],
            self.intended_prob,
            self.slip_prob,
        )

    def to_dict(self):
        return {
            "width": self.width,
            "height": self.height,
            "intended_prob": self.intended_prob,
            "slip_prob": self.slip_prob,
            "reward_waypoints": [{"x": x1, "y": x2, "r": r} for (x1, x2), r in self.reward_waypoints],
            "feature_waypoints": [{"x": x1, "y": x2} for x1, x2 in self.feature_waypoints],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            kwargs = {}
            for key in ("width", "height"):
                if key in doc:
                    kwargs[key] = int(doc[key])
            for key in ("intended_prob", "slip_prob"):
                if key in doc:
                    kwargs[key] = float(doc[key])
            if "reward_waypoints" in doc:
                kwargs["reward_waypoints"] = [
                    ((int(w["x"]), int(w["y"])), float(w["r"])) for w in doc["reward_waypoints"]
                ]
            if "feature_waypoints" in doc:
                kwargs["feature_waypoints"] = [
                    (int(w["x"]), int(w["y"])) for w in doc["feature_waypoints"]
                ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed grid config: {exc}") from exc
        return cls(**kwargs)


def reward_field(spec, y):
    """``f(y) = sum_x r_x exp(-||x - y||^2 / 2) / sqrt(2 pi)`` over the reward waypoints."""
    y1, y2 = y
    total = 0.0
    for (x1, x2), r in spec.reward_waypoints:
        total += r * GAUSS_NORM * math.exp(-((x1 - y1) ** 2 + (x2 - y2) ** 2) / 2.0)
    return total


def reward_field_grid(spec):
    """``f`` evaluated at every cell, indexed by state."""
    return np.array([reward_field(spec, spec.coords(s)) for s in range(spec.num_states)])


def build_grid_mdp(spec):
    """Slip/bounce dynamics with reward ``R(x, a) = sum_y P(y|x,a) f(y)``."""
    X = spec.num_states
    P = np.zeros((X, 4, X))
    for s in range(X):
        x1, x2 = spec.coords(s)
        for a in range(4):
            P[s, a, spec.index(*spec.step(x1, x2, a))] += spec.intended_prob
            for lat in LATERAL[a]:
                P[s, a, spec.index(*spec.step(x1, x2, lat))] += spec.slip_prob
    f = reward_field_grid(spec)
    return Mdp(P, P @ f)


def intended_cells(spec):
    """State index of the post-bounce intended cell for every (state, action)."""
    out = np.empty((spec.num_states, 4), dtype=np.int64)
    for s in range(spec.num_states):
        x1, x2 = spec.coords(s)
        for a in range(4):
            out[s, a] = spec.index(*spec.step(x1, x2, a))
    return out


def build_feature_map(spec, mdp=None):
    """Unit-height Gaussian bump at each feature waypoint, evaluated at the intended next cell."""
    if mdp is not None and mdp.num_states != spec.num_states:
        raise ConfigurationError("MDP does not match the grid spec")
    target = intended_cells(spec)
    coords = np.array([spec.coords(s) for s in range(spec.num_states)], dtype=float)
    wp = np.array(spec.feature_waypoints, dtype=float).reshape(-1, 2)
    y = coords[target]  # (X, 4, 2)
    d2 = ((y[:, :, None, :] - wp[None, None, :, :]) ** 2).sum(axis=-1)
    return FeatureMap(GAUSS_NORM * np.exp(-d2 / 2.0))


def greedy_policy(mdp, spec=None, rtol=1e-12):
    """Action with the largest one-step expected reward; ties go to N < E < W < S."""
    R = mdp.reward
    best = R.max(axis=1, keepdims=True)
    near = R >= best - rtol * np.maximum(1.0, np.abs(best))
    return np.argmax(near, axis=1)
