"""Dependent rounding of fractional edge vectors.

``gkps_round`` rounds on a bipartite support by repeatedly shifting mass
around a cycle or maximal path of fractional edges; ``levelset_round`` is
the single-vertex special case.  Both keep each marginal exactly, never
push a vertex's rounded degree past the ceiling of its fractional degree,
and make same-vertex indicators negatively correlated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .instance import csr_adjacency
from .rng import trial_uniforms, uniforms_from


@dataclass(frozen=True)
class RoundedSet:
    xhat: np.ndarray

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(e) for e in np.flatnonzero(self.xhat))


def _edge_arrays(edges: Sequence[tuple[int, int]]):
    edges = list(edges)
    eu = np.array([int(a) for a, _ in edges], dtype=np.int64)
    ev = np.array([int(b) for _, b in edges], dtype=np.int64)
    n = int(max(eu.max(initial=-1), ev.max(initial=-1))) + 1
    ptr, adj = csr_adjacency(n, eu, ev)
    return n, eu, ev, ptr, adj


def _check_x(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < -1e-9) or np.any(x > 1 + 1e-9):
        raise ValueError("x must lie in [0, 1]")
    return np.clip(x, 0.0, 1.0)


def _is_bipartite(n: int, eu: np.ndarray, ev: np.ndarray) -> bool:
    color = -np.ones(n, dtype=np.int64)
    adj = [[] for _ in range(n)]
    for a, b in zip(eu, ev):
        adj[a].append(b)
        adj[b].append(a)
    for s in range(n):
        if color[s] >= 0:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if color[u] < 0:
                    color[u] = 1 - color[v]
                    stack.append(u)
                elif color[u] == color[v]:
                    return False
    return True


def gkps_round(edges: Sequence[tuple[int, int]], x, rng) -> RoundedSet:
    """Round ``x`` on the graph given by vertex-index pairs ``edges``.

    ``rng`` is a numpy Generator or an int seed.  Raises ``ValueError`` if
    the fractional support is not bipartite.
    """
    x = _check_x(x)
    n, eu, ev, ptr, adj = _edge_arrays(edges)
    frac = (x > kernels.SNAP) & (x < 1 - kernels.SNAP)
    if not _is_bipartite(n, eu[frac], ev[frac]):
        raise ValueError("gkps_round needs a bipartite fractional support")
    out = np.zeros((1, len(x)), dtype=np.int8)
    kernels.gkps_many(n, eu, ev, ptr, adj, x, uniforms_from(rng, len(x))[None, :], out)
    return RoundedSet(out[0])


def gkps_round_many(edges: Sequence[tuple[int, int]], x, trials: int, seed: int) -> np.ndarray:
    """``trials`` independent roundings as a (trials, m) 0/1 matrix."""
    x = _check_x(x)
    n, eu, ev, ptr, adj = _edge_arrays(edges)
    frac = (x > kernels.SNAP) & (x < 1 - kernels.SNAP)
    if not _is_bipartite(n, eu[frac], ev[frac]):
        raise ValueError("gkps_round needs a bipartite fractional support")
    out = np.zeros((trials, len(x)), dtype=np.int8)
    kernels.gkps_many(n, eu, ev, ptr, adj, x, trial_uniforms(seed, 0, trials, max(len(x), 1)), out)
    return out


def levelset_round(x, rng) -> RoundedSet:
    """Round the edge vector of a single vertex."""
    x = _check_x(x)
    out = np.zeros((1, len(x)), dtype=np.int8)
    kernels.levelset_many(x, uniforms_from(rng, max(len(x), 1))[None, :], out)
    return RoundedSet(out[0])


def levelset_round_many(x, trials: int, seed: int) -> np.ndarray:
    x = _check_x(x)
    out = np.zeros((trials, len(x)), dtype=np.int8)
    kernels.levelset_many(x, trial_uniforms(seed, 0, trials, max(len(x), 1)), out)
    return out
