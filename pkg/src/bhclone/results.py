"""Small immutable result containers shared across modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


@dataclass(frozen=True)
class NumberDistribution:
    """Probabilities over occupation numbers, plus the mass lost to truncation.

    ``probabilities[m]`` is the probability of ``m`` quanta (or of the
    occupation tuple ``m`` for joint distributions). ``tail_mass`` bounds the
    probability that lies outside the stored range.
    """

    probabilities: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    def __len__(self):
        return len(self.probabilities)

    def __getitem__(self, m):
        return self.probabilities[m]

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def mean(self) -> float:
        p = self.probabilities
        return float(np.arange(len(p)) @ p)

    def tv_distance(self, other: "NumberDistribution") -> float:
        """Total-variation distance over the common support, plus the unmatched remainder."""
        a, b = self.probabilities, other.probabilities
        n = min(len(a), len(b))
        return 0.5 * float(np.abs(a[:n] - b[:n]).sum() + a[n:].sum() + b[n:].sum())


@dataclass(frozen=True)
class CloneReport:
    """Outcome of one N -> M cloning computation.

    ``fidelity`` is conditional on observing exactly ``M`` quanta outside the
    horizon; ``postselect_probability`` is the weight of that condition.
    ``method`` is ``"analytic"`` or ``"simulated"``.
    """

    N: int
    M: int
    fidelity: float
    anticlone_fidelity: Optional[float]
    postselect_probability: Optional[float]
    method: str
    diagnostics: dict[str, Any] = field(default_factory=dict)
