from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo (or exact) value with its standard error."""

    value: float
    stderr: float
    n_samples: int
    truncation_bound: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_samples(cls, samples, truncation_bound=None) -> "Estimate":
        x = np.asarray(samples, dtype=float).ravel()
        n = x.size
        if n == 0:
            raise ValueError("no samples")
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        return cls(float(x.mean()), se, n, truncation_bound)

    @classmethod
    def exact(cls, value, n_samples: int = 0, truncation_bound=None) -> "Estimate":
        return cls(float(value), 0.0, n_samples, truncation_bound)

    def to_json(self) -> dict:
        out = {
            "value": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "truncation_bound": self.truncation_bound,
        }
        out.update(self.extra)
        return out
