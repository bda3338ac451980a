"""A prepared probing policy: everything fixed except the per-trial randomness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .rng import uniforms_from
from .transcript import ProbeTranscript, TrialRecords


@dataclass
class Policy:
    """``run(U)`` maps a (trials, width) block of uniforms to trial records.

    ``info`` carries the offline decisions (LP value, branch taken, bounds)
    for reporting.
    """

    name: str
    width: int
    run: Callable[[np.ndarray], TrialRecords]
    info: dict = field(default_factory=dict)

    def single(self, rng) -> ProbeTranscript:
        """One trial driven by ``rng`` (Generator or int seed)."""
        u = uniforms_from(rng, max(self.width, 1))[None, :]
        return self.run(u).transcript(0, self.name)
