"""Per-trial probe records and the transcript view of a single run."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels as K
from .instance import Instance

OUTCOME_NAMES = {
    K.PROBE_FAIL: "absent",
    K.PROBE_SUCCESS: "matched",
    K.SKIPPED: "skipped-endpoint-matched",
    K.SIMULATED: "simulated",
    K.SIMULATED_STOP: "simulated-stop",
}


@dataclass(frozen=True)
class Probe:
    edge: int
    outcome: str

    @property
    def probed(self) -> bool:
        return self.outcome in ("absent", "matched")

    @property
    def existed(self) -> Optional[bool]:
        return {"absent": False, "matched": True}.get(self.outcome)


@dataclass(frozen=True)
class ProbeTranscript:
    probes: tuple[Probe, ...]
    matching: tuple[int, ...]
    weight: float
    algorithm: str = ""


@dataclass
class TrialRecords:
    """Outcome of a batch of trials.

    ``status[i, e]`` is one of the kernel status codes, ``rank[i, e]`` the
    position of ``e`` in trial ``i``'s scan (-1 if never considered).
    ``triggers[i, b]`` counts subroutine calls per buyer type (online only).
    """

    status: np.ndarray
    rank: np.ndarray
    profit: np.ndarray
    triggers: Optional[np.ndarray] = None

    @classmethod
    def empty(cls, trials: int, m: int, n_types: int = 0) -> "TrialRecords":
        return cls(
            np.zeros((trials, m), dtype=np.int8),
            np.full((trials, m), -1, dtype=np.int32),
            np.zeros(trials),
            np.zeros((trials, n_types), dtype=np.int8) if n_types else None,
        )

    @classmethod
    def concat(cls, parts: list["TrialRecords"]) -> "TrialRecords":
        trig = None if parts[0].triggers is None else np.concatenate([p.triggers for p in parts])
        return cls(
            np.concatenate([p.status for p in parts]),
            np.concatenate([p.rank for p in parts]),
            np.concatenate([p.profit for p in parts]),
            trig,
        )

    @property
    def trials(self) -> int:
        return len(self.profit)

    @property
    def probed(self) -> np.ndarray:
        return (self.status == K.PROBE_FAIL) | (self.status == K.PROBE_SUCCESS)

    @property
    def matched(self) -> np.ndarray:
        return self.status == K.PROBE_SUCCESS

    @property
    def considered(self) -> np.ndarray:
        return self.status != K.NOT_CONSIDERED

    @property
    def stopped(self) -> np.ndarray:
        return (self.status == K.PROBE_SUCCESS) | (self.status == K.SIMULATED_STOP)

    def transcript(self, i: int, algorithm: str = "") -> ProbeTranscript:
        order = [e for e in np.argsort(self.rank[i], kind="stable") if self.rank[i, e] >= 0]
        probes = tuple(Probe(int(e), OUTCOME_NAMES[int(self.status[i, e])]) for e in order)
        matching = tuple(int(e) for e in np.flatnonzero(self.matched[i]))
        return ProbeTranscript(probes, matching, float(self.profit[i]), algorithm)


def check_records(records: TrialRecords, instance: Instance) -> list[str]:
    """Hard invariants over every trial; returns human-readable violations.

    Checked: matched edges are vertex-disjoint, real probes per vertex stay
    within the timeout, no edge is considered after one of its endpoints was
    matched (earlier rank), profit equals the matched weight, and at most
    one subroutine call per buyer type.
    """
    arr = instance.arrays
    n, m = arr.n_vertices, instance.n_edges
    out: list[str] = []
    if m == 0:
        return out
    inc = np.zeros((m, n), dtype=np.int32)
    inc[np.arange(m), arr.eu] = 1
    inc[np.arange(m), arr.ev] = 1
    matched = records.matched.astype(np.int32)
    per_vertex = matched @ inc
    if np.any(per_vertex > 1):
        out.append(f"matching not vertex-disjoint in {int(np.any(per_vertex > 1, axis=1).sum())} trials")
    probes = records.probed.astype(np.int32) @ inc
    if np.any(probes > arr.t[None, :]):
        out.append(f"timeout exceeded in {int(np.any(probes > arr.t[None, :], axis=1).sum())} trials")
    big = np.iinfo(np.int32).max
    match_rank = np.full((records.trials, n), big, dtype=np.int64)
    rr = np.where(records.matched, records.rank, big).astype(np.int64)
    for e in range(m):
        for v in (arr.eu[e], arr.ev[e]):
            np.minimum(match_rank[:, v], rr[:, e], out=match_rank[:, v])
    real = records.probed
    r = records.rank.astype(np.int64)
    late = real & ((r > match_rank[:, arr.eu]) | (r > match_rank[:, arr.ev]))
    if np.any(late):
        out.append(f"probe after endpoint matched in {int(np.any(late, axis=1).sum())} trials")
    gain = np.where(records.matched, instance.w[None, :], 0.0).sum(axis=1)
    if not np.allclose(gain, records.profit, rtol=0, atol=1e-9):
        out.append("profit differs from matched weight")
    if records.triggers is not None and np.any(records.triggers > 1):
        out.append("a buyer type ran the subroutine more than once")
    return out
