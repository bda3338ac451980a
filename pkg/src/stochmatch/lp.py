"""Linear programs over edge variables and a small dense simplex to solve them.

All programs here have the form ``max c.x  s.t.  A x <= b, 0 <= x <= 1``
with ``A >= 0`` and ``b >= 0``, so ``x = 0`` is a feasible starting vertex
and a single-phase simplex suffices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from ._jit import USE_NUMBA
from .instance import Instance

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
MAX_BLOSSOM_VERTICES = 18


class LpError(RuntimeError):
    pass


class IterationLimitError(LpError):
    def __init__(self, message: str, basis: Sequence[int]):
        super().__init__(f"{message}; basis={list(basis)}")
        self.basis = list(basis)


@dataclass(frozen=True)
class LpProblem:
    """``max objective.x`` subject to sparse rows ``sum coef*x <= rhs`` and ``0 <= x <= upper``."""

    objective: np.ndarray
    rows: tuple[tuple[np.ndarray, np.ndarray], ...]
    rhs: np.ndarray
    labels: tuple[str, ...] = ()
    var_edges: Optional[np.ndarray] = None
    n_edges: Optional[int] = None
    upper: Optional[np.ndarray] = None

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def __post_init__(self):
        if not np.all(np.isfinite(self.objective)) or not np.all(np.isfinite(self.rhs)):
            raise ValueError("LP coefficients must be finite")
        for idx, coef in self.rows:
            if len(idx) and (idx.min() < 0 or idx.max() >= self.n_vars):
                raise ValueError("row references an unknown variable")
            if not np.all(np.isfinite(coef)):
                raise ValueError("LP coefficients must be finite")

    def dense(self) -> np.ndarray:
        a = np.zeros((len(self.rows), self.n_vars))
        for r, (idx, coef) in enumerate(self.rows):
            np.add.at(a[r], idx, coef)
        return a

    def bounds(self) -> np.ndarray:
        return np.ones(self.n_vars) if self.upper is None else self.upper

    def with_rows(self, rows, rhs, labels) -> "LpProblem":
        return LpProblem(
            self.objective,
            self.rows + tuple(rows),
            np.concatenate([self.rhs, np.asarray(rhs, dtype=float)]),
            self.labels + tuple(labels),
            self.var_edges,
            self.n_edges,
            self.upper,
        )

    def to_text(self) -> str:
        """One constraint per line, in construction order."""
        names = [f"x{k}" if self.var_edges is None else f"x[e{self.var_edges[k]}]" for k in range(self.n_vars)]
        obj = " + ".join(f"{c:.12g} {names[k]}" for k, c in enumerate(self.objective) if c != 0) or "0"
        lines = [f"max {obj}"]
        for r, (idx, coef) in enumerate(self.rows):
            label = self.labels[r] if r < len(self.labels) else f"row{r}"
            lhs = " + ".join(f"{c:.12g} {names[k]}" for k, c in zip(idx, coef)) or "0"
            lines.append(f"{label}: {lhs} <= {self.rhs[r]:.12g}")
        ub = self.bounds()
        for k in range(self.n_vars):
            lines.append(f"bound: 0 <= {names[k]} <= {ub[k]:.12g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FractionalSolution:
    x: np.ndarray  # per edge when the problem carries var_edges, else per variable
    objective: float
    residuals: np.ndarray
    iterations: int = 0
    cuts: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max(initial=0.0))


@dataclass(frozen=True)
class LpSummary:
    lp_value: float
    lp_large: float
    lp_small: float
    gamma: float
    delta: float


# ------------------------------------------------------------------- solving


def _simplex(a: np.ndarray, b: np.ndarray, c: np.ndarray, max_iter: int):
    """Tableau simplex with Bland's rule for max c.x, Ax <= b, x >= 0, b >= 0."""
    m, n = a.shape
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -c
    basis = list(range(n, n + m))
    for it in range(max_iter):
        reduced = tab[m, :-1]
        entering = np.flatnonzero(reduced < -PIVOT_TOL)
        if entering.size == 0:
            x = np.zeros(n + m)
            x[basis] = tab[:m, -1]
            return x[:n], it
        j = int(entering[0])
        col = tab[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise LpError("LP is unbounded (cannot happen for bounded edge LPs)")
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        i = int(min(ties, key=lambda r: basis[r]))
        tab[i] /= tab[i, j]
        others = np.arange(m + 1) != i
        tab[others] -= np.outer(tab[others, j], tab[i])
        basis[i] = j
    raise IterationLimitError(f"simplex exceeded {max_iter} pivots", basis)


def solve_lp(problem: LpProblem, backend: str = "simplex", max_iter: Optional[int] = None) -> FractionalSolution:
    """Optimal vertex of ``problem``.

    ``backend="highs"`` routes through scipy's HiGHS instead of the built-in
    simplex; the result contract is the same.
    """
    n = problem.n_vars
    a = problem.dense()
    ub = problem.bounds()
    if n == 0:
        x = np.zeros(0)
    elif backend == "simplex":
        full_a = np.vstack([a, np.eye(n)])
        full_b = np.concatenate([problem.rhs, ub])
        if np.any(full_b < 0):
            raise LpError("x = 0 must be feasible (negative right-hand side)")
        limit = 50 * (full_a.shape[0] + n) + 100 if max_iter is None else max_iter
        x, iters = _simplex(full_a, full_b, problem.objective, limit)
    elif backend == "highs":
        from scipy.optimize import linprog

        res = linprog(-problem.objective, A_ub=a if len(a) else None, b_ub=problem.rhs if len(a) else None,
                      bounds=list(zip(np.zeros(n), ub)), method="highs")
        if res.status != 0:
            raise LpError(f"HiGHS failed: {res.message}")
        x = res.x
        iters = int(res.nit)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if n == 0:
        iters = 0
    x = np.clip(x, 0.0, ub)
    residuals = np.maximum(a @ x - problem.rhs, 0.0) if len(a) else np.zeros(0)
    if residuals.max(initial=0.0) > FEAS_TOL:
        raise LpError(f"solution infeasible by {residuals.max():.3g}")
    value = float(problem.objective @ x)
    if problem.var_edges is not None:
        per_edge = np.zeros(problem.n_edges)
        per_edge[problem.var_edges] = x
        x = per_edge
    return FractionalSolution(x, value, residuals, iters)


# ------------------------------------------------------------------ builders


def _vertex_rows(instance: Instance, var_edges: np.ndarray, vertices=None):
    """Per-vertex incident-variable index lists, in vertex order."""
    arr = instance.arrays
    pos = {int(e): k for k, e in enumerate(var_edges)}
    incident = [[] for _ in range(arr.n_vertices)]
    for e in var_edges:
        incident[arr.eu[e]].append(pos[int(e)])
        incident[arr.ev[e]].append(pos[int(e)])
    order = range(arr.n_vertices) if vertices is None else [instance.index[v] for v in vertices]
    return [(v, np.array(incident[v], dtype=np.int64)) for v in order if incident[v]]


def _probed_edges(instance: Instance) -> np.ndarray:
    return np.flatnonzero(instance.p > 0.0)


def build_lp_bip(instance: Instance) -> LpProblem:
    """Timeout LP: per-vertex probability mass <= 1 and probe count <= t_v."""
    var_edges = _probed_edges(instance)
    p = instance.p[var_edges]
    objective = instance.w[var_edges] * p
    rows, rhs, labels = [], [], []
    for v, idx in _vertex_rows(instance, var_edges):
        name = instance.vertices[v]
        rows.append((idx, p[idx]))
        rhs.append(1.0)
        labels.append(f"prob[{name}]")
        rows.append((idx, np.ones(len(idx))))
        rhs.append(float(instance.timeouts[name]))
        labels.append(f"timeout[{name}]")
    return LpProblem(objective, tuple(rows), np.array(rhs), tuple(labels), var_edges, instance.n_edges)


def build_lp_match(instance: Instance) -> LpProblem:
    """Matching LP in z with objective w*p."""
    var_edges = np.arange(instance.n_edges)
    objective = instance.w * instance.p
    rows, rhs, labels = [], [], []
    for v, idx in _vertex_rows(instance, var_edges):
        rows.append((idx, np.ones(len(idx))))
        rhs.append(1.0)
        labels.append(f"degree[{instance.vertices[v]}]")
    return LpProblem(objective, tuple(rows), np.array(rhs), tuple(labels), var_edges, instance.n_edges)


def build_lp_onl(instance: Instance) -> LpProblem:
    """Online LP: item mass <= 1; type mass <= 1 and type probe count <= t_b."""
    if not instance.is_online:
        raise ValueError("build_lp_onl needs an online instance")
    var_edges = _probed_edges(instance)
    p = instance.p[var_edges]
    objective = instance.w[var_edges] * p
    rows, rhs, labels = [], [], []
    items, types = instance.bipartition
    for v, idx in _vertex_rows(instance, var_edges, items):
        rows.append((idx, p[idx]))
        rhs.append(1.0)
        labels.append(f"prob[{instance.vertices[v]}]")
    for v, idx in _vertex_rows(instance, var_edges, types):
        name = instance.vertices[v]
        rows.append((idx, p[idx]))
        rhs.append(1.0)
        labels.append(f"prob[{name}]")
        rows.append((idx, np.ones(len(idx))))
        rhs.append(float(instance.timeouts[name]))
        labels.append(f"timeout[{name}]")
    return LpProblem(objective, tuple(rows), np.array(rhs), tuple(labels), var_edges, instance.n_edges)


def solve_lp_bip(instance: Instance) -> FractionalSolution:
    return solve_lp(build_lp_bip(instance))


def solve_lp_onl(instance: Instance) -> FractionalSolution:
    return solve_lp(build_lp_onl(instance))


# -------------------------------------------------------- blossom inequalities


def _mask_vertices(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _blossom_scan_numpy(n: int, eu: np.ndarray, ev: np.ndarray, px: np.ndarray, tie_tol: float):
    masks = np.arange(1 << n, dtype=np.int64)
    size = np.zeros_like(masks)
    for i in range(n):
        size += (masks >> i) & 1
    keep = (size >= 3) & (size % 2 == 1)
    masks, size = masks[keep], size[keep]
    if masks.size == 0:
        return -1, -np.inf
    inside = ((masks[:, None] >> eu[None, :]) & 1) & ((masks[:, None] >> ev[None, :]) & 1)
    viol = inside.astype(float) @ px - (size - 1) / 2.0
    near = np.flatnonzero(viol >= viol.max() - tie_tol)
    cands = [(int(size[k]), _mask_vertices(int(masks[k])), k) for k in near]
    _, _, k = min(cands)
    return int(masks[k]), float(viol[k])


def separate_blossom(instance: Instance, x: np.ndarray, tol: float = FEAS_TOL):
    """Most violated odd-set inequality, by exhaustive enumeration.

    Returns ``(W, violation)`` with ``W`` a tuple of vertex ids, or ``None``
    when no odd set is violated by more than ``tol``.  Ties go to the
    smallest set, then the lexicographically first sorted vertex list.
    """
    arr = instance.arrays
    n = arr.n_vertices
    if n > MAX_BLOSSOM_VERTICES:
        raise ValueError(f"blossom separation is exhaustive; {n} vertices exceeds {MAX_BLOSSOM_VERTICES}")
    if n < 3:
        return None
    px = arr.p * np.asarray(x, dtype=float)
    if USE_NUMBA:
        mask, viol = kernels.blossom_scan(n, arr.eu, arr.ev, px, 1e-12)
    else:
        mask, viol = _blossom_scan_numpy(n, arr.eu, arr.ev, px, 1e-12)
    if mask < 0 or viol <= tol:
        return None
    return tuple(instance.vertices[i] for i in _mask_vertices(int(mask))), float(viol)


def blossom_row(instance: Instance, problem: LpProblem, subset: Sequence[str]):
    members = {instance.index[v] for v in subset}
    arr = instance.arrays
    idx = [k for k, e in enumerate(problem.var_edges) if arr.eu[e] in members and arr.ev[e] in members]
    idx = np.array(idx, dtype=np.int64)
    return (idx, arr.p[problem.var_edges[idx]]), (len(members) - 1) / 2.0


def solve_lp_gen(instance: Instance, max_vertices: int = MAX_BLOSSOM_VERTICES) -> FractionalSolution:
    """Timeout LP plus odd-set cuts, added one at a time until none is violated."""
    n = len(instance.vertices)
    if n > max_vertices:
        raise ValueError(f"blossom separation supports at most {max_vertices} vertices, got {n}")
    problem = build_lp_bip(instance)
    cuts: list[tuple[str, ...]] = []
    limit = max(1, n ** 3)
    while True:
        sol = solve_lp(problem)
        found = separate_blossom(instance, sol.x)
        if found is None:
            return FractionalSolution(sol.x, sol.objective, sol.residuals, sol.iterations, tuple(cuts))
        if len(cuts) >= limit:
            raise LpError(f"cut loop exceeded {limit} cuts")
        subset, _ = found
        row, rhs = blossom_row(instance, problem, subset)
        cuts.append(subset)
        problem = problem.with_rows([row], [rhs], [f"blossom{{{','.join(subset)}}}"])


def lp_gen_problem(instance: Instance, cuts: Sequence[Sequence[str]]) -> LpProblem:
    problem = build_lp_bip(instance)
    rows, rhs, labels = [], [], []
    for subset in cuts:
        row, r = blossom_row(instance, problem, subset)
        rows.append(row)
        rhs.append(r)
        labels.append(f"blossom{{{','.join(subset)}}}")
    return problem.with_rows(rows, rhs, labels)


def all_blossom_rows(instance: Instance) -> LpProblem:
    """Timeout LP with every odd-set inequality written out (small graphs only)."""
    verts = instance.vertices
    subsets = [c for k in range(3, len(verts) + 1, 2) for c in itertools.combinations(verts, k)]
    return lp_gen_problem(instance, subsets)


# ---------------------------------------------------------- large/small split


def split_large_small(instance: Instance, x: np.ndarray, delta: float) -> LpSummary:
    x = np.asarray(x, dtype=float)
    contrib = instance.w * instance.p * x
    large = instance.p >= delta
    lp_large = float(contrib[large].sum())
    lp_small = float(contrib[~large].sum())
    lp_value = lp_large + lp_small
    gamma = lp_large / lp_value if lp_value > 0 else 0.0
    return LpSummary(lp_value, lp_large, lp_small, min(max(gamma, 0.0), 1.0), delta)
