"""Experiment configuration and the per-trial seed scheme."""

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError
from ..gridworld import GridSpec
from ..learner import TrainConfig
from .io import read_json

MASK64 = (1 << 64) - 1
POLICIES = ("target", "l1", "unregularized", "greedy")
MODES = ("fig3", "theorem")
DEFAULT_SAMPLE_SIZES = (50, 100, 200, 400, 800, 1600, 3200, 6400)


def splitmix64(x):
    """One output of the SplitMix64 generator seeded with state *x*."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed, m_index, run_index):
    """``master XOR splitmix64((m_index << 32) | run_index)``."""
    return (master_seed ^ splitmix64((m_index << 32) | run_index)) & MASK64


def split_seed(seed):
    """Seed of the train/hold-out shuffle for a trial."""
    return splitmix64(seed)


def target_seed(master_seed):
    """Seed of the synthetic sparse target in theorem mode."""
    return splitmix64(~master_seed & MASK64)


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    sample_sizes: tuple = DEFAULT_SAMPLE_SIZES
    runs: int = 100
    train: TrainConfig = field(default_factory=TrainConfig)
    policies: tuple = POLICIES
    master_seed: int = 0
    out: str = "results/sweep.csv"
    mode: str = "fig3"
    discount: float = 0.95
    sparsity_r: int = 4
    sparsity_k: float = 2.0

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sample_sizes)
        if not sizes or any(m < 2 for m in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigurationError("sample_sizes must be strictly increasing and all >= 2")
        object.__setattr__(self, "sample_sizes", sizes)
        if self.runs < 1:
            raise ConfigurationError("runs must be at least 1")
        unknown = set(self.policies) - set(POLICIES)
        if unknown or not self.policies:
            raise ConfigurationError(f"unknown policies {sorted(unknown)}; choose from {POLICIES}")
        object.__setattr__(self, "policies", tuple(p for p in POLICIES if p in self.policies))
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        if not 0.0 < self.discount < 1.0:
            raise ConfigurationError("discount must lie in (0, 1)")
        if self.mode == "theorem" and not (
            1 <= self.sparsity_r <= len(self.grid.feature_waypoints) and self.sparsity_k > 0
        ):
            raise ConfigurationError("theorem mode needs 1 <= r <= n and K > 0")

    @classmethod
    def from_dict(cls, doc, base_path="."):
        kwargs = {}
        try:
            grid = doc.get("grid")
            if isinstance(grid, str):
                p = Path(grid)
                if not p.is_absolute() and not p.exists():
                    p = Path(base_path).parent / p
                kwargs["grid"] = GridSpec.from_dict(read_json(p))
            elif isinstance(grid, dict):
                kwargs["grid"] = GridSpec.from_dict(grid)
            if "sample_sizes" in doc:
                kwargs["sample_sizes"] = tuple(doc["sample_sizes"])
            for key in ("runs", "master_seed", "sparsity_r"):
                if key in doc:
                    kwargs[key] = int(doc[key])
            for key in ("discount", "sparsity_k"):
                if key in doc:
                    kwargs[key] = float(doc[key])
            for key in ("out", "mode"):
                if key in doc:
                    kwargs[key] = str(doc[key])
            if "policies" in doc:
                kwargs["policies"] = tuple(doc["policies"])
            if "train" in doc:
                t = doc["train"]
                kwargs["train"] = TrainConfig(
                    gamma=float(t.get("gamma", 0.3)),
                    budget_cap=float(t.get("budget_cap", 16.0)),
                    tol=float(t.get("tol", 1e-6)),
                    max_iters=int(t.get("max_iters", 2000)),
                )
        except (TypeError, ValueError, AttributeError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"malformed experiment config: {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def load(cls, path):
        return cls.from_dict(read_json(path), path)
