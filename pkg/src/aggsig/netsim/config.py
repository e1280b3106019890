from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..protocol import THRESHOLD_RULES, finalization_threshold
from .topology import ConfigError

BEHAVIORS = ("silent", "fake", "mixed", "inflate")
BACKENDS = ("oracle", "pairing")
ENGINES = ("auto", "nodes", "matrix")
MAX_BYZ_FRACTION = 1 / 3


def default_iterations(n: int, avg_degree: float) -> int:
    """``max(5, ceil(2 * log_b(n)) + 1)`` with ``b`` the average degree."""
    b = max(float(avg_degree), 2.0)
    return max(5, math.ceil(2 * math.log(n) / math.log(b) - 1e-12) + 1)


@dataclass(frozen=True)
class Partition:
    """Rounds ``start..end`` (inclusive) during which ``side`` is cut off."""

    start: int
    end: int
    side: frozenset

    @classmethod
    def halves(cls, start: int, end: int, n: int, fraction: float = 0.5) -> "Partition":
        return cls(start, end, frozenset(range(int(round(n * fraction)))))

    def active(self, rnd: int) -> bool:
        return self.start <= rnd <= self.end

    def side_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        mask[list(self.side)] = True
        return mask


@dataclass(frozen=True)
class SimConfig:
    n: int
    degree: float
    byz_fraction: float = 0.0
    behavior: str = "silent"
    iterations: Optional[int] = None
    seed: int = 0
    backend: str = "oracle"
    partitions: tuple = ()
    threshold_rule: str = "strict"
    break_on_finalize: bool = True
    record_trajectory: bool = False
    engine: str = "auto"
    inflation_factor: int = 1 << 64
    # Deployment knob for the receive timeout; the round engine ignores it.
    timeout_ms: int = 2000
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not 0.0 <= self.byz_fraction <= MAX_BYZ_FRACTION + 1e-12:
            raise ConfigError(f"byzantine fraction {self.byz_fraction} outside [0, 1/3]")
        if self.behavior not in BEHAVIORS:
            raise ConfigError(f"unknown behavior {self.behavior!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.engine not in ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.threshold_rule not in THRESHOLD_RULES:
            raise ConfigError(f"unknown threshold rule {self.threshold_rule!r}")
        if self.iterations is not None and self.iterations < 0:
            raise ConfigError("iterations must be non-negative")
        if self.n > 1 and not 1 <= self.degree < self.n:
            raise ConfigError(f"average degree {self.degree} infeasible for n={self.n}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def rounds(self) -> int:
        if self.iterations is not None:
            return self.iterations
        return default_iterations(self.n, self.degree)

    @property
    def num_byzantine(self) -> int:
        return int(round(self.byz_fraction * self.n))

    @property
    def threshold(self) -> int:
        return finalization_threshold(self.n, self.threshold_rule)
