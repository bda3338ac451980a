"""Stochastic-matching instances: types, validation, JSON serialization, generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

KINDS = ("offline-bipartite", "offline-general", "online")


@dataclass(frozen=True)
class Edge:
    id: int
    u: str
    v: str
    p: float
    w: float

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.u, self.v)


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


@dataclass(frozen=True)
class OfflineArrays:
    """Edge and adjacency arrays indexed by vertex position."""

    n_vertices: int
    eu: np.ndarray
    ev: np.ndarray
    p: np.ndarray
    w: np.ndarray
    t: np.ndarray
    adj_ptr: np.ndarray
    adj_edge: np.ndarray


@dataclass(frozen=True)
class OnlineArrays:
    n_items: int
    n_types: int
    eid: np.ndarray  # (items, types) -> edge id, -1 if absent
    p: np.ndarray
    w: np.ndarray
    t_types: np.ndarray
    rounds: int
    edge_item: np.ndarray
    edge_type: np.ndarray


@dataclass(frozen=True)
class Instance:
    """A stochastic-matching instance.

    ``timeouts`` maps every vertex id to its patience.  For online instances
    the bipartition is ``(items, buyer types)``; item patience is stored as
    ``|B| * rounds``, which no run can exhaust.
    """

    kind: str
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    timeouts: Mapping[str, int]
    bipartition: Optional[tuple[tuple[str, ...], tuple[str, ...]]] = None
    rounds: Optional[int] = None
    name: str = field(default="", compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def is_bipartite(self) -> bool:
        return self.bipartition is not None

    @property
    def is_online(self) -> bool:
        return self.kind == "online"

    @property
    def items(self) -> tuple[str, ...]:
        return self.bipartition[0]

    @property
    def buyer_types(self) -> tuple[str, ...]:
        return self.bipartition[1]

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def p(self) -> np.ndarray:
        return np.array([e.p for e in self.edges], dtype=np.float64)

    @cached_property
    def w(self) -> np.ndarray:
        return np.array([e.w for e in self.edges], dtype=np.float64)

    def edge_pairs(self) -> list[tuple[int, int]]:
        idx = self.index
        return [(idx[e.u], idx[e.v]) for e in self.edges]

    @cached_property
    def arrays(self) -> OfflineArrays:
        n = len(self.vertices)
        pairs = self.edge_pairs()
        eu = np.array([a for a, _ in pairs], dtype=np.int64)
        ev = np.array([b for _, b in pairs], dtype=np.int64)
        ptr, adj = csr_adjacency(n, eu, ev)
        t = np.array([self.timeouts[v] for v in self.vertices], dtype=np.int64)
        return OfflineArrays(n, eu, ev, self.p, self.w, t, ptr, adj)

    @cached_property
    def online_arrays(self) -> OnlineArrays:
        if not self.is_online:
            raise ValueError("not an online instance")
        items, types = self.bipartition
        ia = {a: i for i, a in enumerate(items)}
        ib = {b: j for j, b in enumerate(types)}
        eid = np.full((len(items), len(types)), -1, dtype=np.int64)
        p = np.zeros(eid.shape)
        w = np.zeros(eid.shape)
        e_item = np.empty(self.n_edges, dtype=np.int64)
        e_type = np.empty(self.n_edges, dtype=np.int64)
        for e in self.edges:
            a, b = (e.u, e.v) if e.u in ia else (e.v, e.u)
            eid[ia[a], ib[b]] = e.id
            p[ia[a], ib[b]] = e.p
            w[ia[a], ib[b]] = e.w
            e_item[e.id] = ia[a]
            e_type[e.id] = ib[b]
        t = np.array([self.timeouts[b] for b in types], dtype=np.int64)
        return OnlineArrays(len(items), len(types), eid, p, w, t, int(self.rounds), e_item, e_type)


def csr_adjacency(n: int, eu: np.ndarray, ev: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Incident edges per vertex, each list ascending by edge id."""
    deg = np.zeros(n + 1, dtype=np.int64)
    np.add.at(deg, eu + 1, 1)
    np.add.at(deg, ev + 1, 1)
    ptr = np.cumsum(deg)
    fill = ptr[:-1].copy()
    adj = np.empty(2 * len(eu), dtype=np.int64)
    for e in range(len(eu)):
        for x in (eu[e], ev[e]):
            adj[fill[x]] = e
            fill[x] += 1
    return ptr, adj


def make_instance(
    kind: str,
    vertices: Sequence[str],
    edges: Sequence[tuple[str, str, float, float]],
    timeouts: Mapping[str, int] | int = 1,
    bipartition=None,
    rounds: Optional[int] = None,
    name: str = "",
) -> Instance:
    """Convenience constructor from ``(u, v, p, w)`` tuples."""
    vertices = tuple(str(v) for v in vertices)
    if isinstance(timeouts, int):
        timeouts = {v: timeouts for v in vertices}
    else:
        timeouts = {str(k): int(t) for k, t in timeouts.items()}
    es = tuple(Edge(i, str(u), str(v), float(p), float(w)) for i, (u, v, p, w) in enumerate(edges))
    bp = None
    if bipartition is not None:
        bp = (tuple(str(a) for a in bipartition[0]), tuple(str(b) for b in bipartition[1]))
    return Instance(kind, vertices, es, dict(timeouts), bp, rounds, name)


def online_instance(p, w, t_types, rounds: Optional[int] = None, name: str = "") -> Instance:
    """Complete items x types instance from ``(|A|, |B|)`` matrices ``p`` and ``w``."""
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    n_a, n_b = p.shape
    rounds = n_b if rounds is None else rounds
    items = [f"a{i}" for i in range(n_a)]
    types = [f"b{j}" for j in range(n_b)]
    t_types = np.broadcast_to(np.asarray(t_types, dtype=int), (n_b,))
    timeouts = {a: n_b * rounds for a in items}
    timeouts.update({b: int(t) for b, t in zip(types, t_types)})
    edges = [(items[i], types[j], p[i, j], w[i, j]) for i in range(n_a) for j in range(n_b)]
    return make_instance("online", items + types, edges, timeouts, (items, types), rounds, name)


# ---------------------------------------------------------------- validation


def validate(instance: Instance) -> list[Violation]:
    out: list[Violation] = []

    def bad(code, detail):
        out.append(Violation(code, detail))

    if instance.kind not in KINDS:
        bad("unknown-kind", instance.kind)
    vset = set()
    for v in instance.vertices:
        if v in vset:
            bad("duplicate-vertex", v)
        vset.add(v)
    for v in instance.vertices:
        t = instance.timeouts.get(v)
        if t is None:
            bad("missing-timeout", v)
        elif not isinstance(t, (int, np.integer)) or t < 1:
            bad("nonpositive-timeout", f"{v}: {t}")
    seen_pairs = set()
    for i, e in enumerate(instance.edges):
        if e.id != i:
            bad("edge-id-not-dense", f"position {i} has id {e.id}")
        if e.u not in vset or e.v not in vset:
            bad("unknown-endpoint", f"edge {e.id}: ({e.u}, {e.v})")
        if e.u == e.v:
            bad("self-loop", f"edge {e.id}: {e.u}")
        key = frozenset((e.u, e.v))
        if key in seen_pairs:
            bad("parallel-edge", f"edge {e.id}: ({e.u}, {e.v})")
        seen_pairs.add(key)
        if not (math.isfinite(e.p) and 0.0 <= e.p <= 1.0):
            bad("probability-out-of-range", f"edge {e.id}: p={e.p}")
        if not (math.isfinite(e.w) and e.w >= 0.0):
            bad("negative-weight", f"edge {e.id}: w={e.w}")

    needs_bp = instance.kind in ("offline-bipartite", "online")
    if instance.bipartition is None:
        if needs_bp:
            bad("missing-bipartition", instance.kind)
    else:
        side_a, side_b = set(instance.bipartition[0]), set(instance.bipartition[1])
        if side_a & side_b or side_a | side_b != vset:
            bad("bipartition-mismatch", "sides must partition the vertex set")
        for e in instance.edges:
            if not ((e.u in side_a and e.v in side_b) or (e.u in side_b and e.v in side_a)):
                bad("edge-not-crossing", f"edge {e.id}: ({e.u}, {e.v})")

    if instance.kind == "online":
        if instance.rounds is None or instance.rounds < 1:
            bad("invalid-rounds", str(instance.rounds))
        elif instance.bipartition is not None:
            items, types = instance.bipartition
            if len(seen_pairs) != len(items) * len(types) or len(instance.edges) != len(items) * len(types):
                bad("online-incomplete", "online instances need the full items x types edge set")
            cap = len(types) * instance.rounds
            for a in items:
                if instance.timeouts.get(a, 0) < cap:
                    bad("item-timeout-bounded", f"{a}: expected >= {cap}")
    elif instance.rounds is not None:
        bad("unexpected-rounds", instance.kind)
    return out


def check(instance: Instance) -> Instance:
    errs = validate(instance)
    if errs:
        raise ValueError("invalid instance: " + "; ".join(f"{v.code} ({v.detail})" for v in errs))
    return instance


# ------------------------------------------------------------- serialization


class InstanceFormatError(ValueError):
    def __init__(self, message: str, field: str = "", line: Optional[int] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


def _num(x: float) -> str:
    return repr(float(x))


def to_document(instance: Instance) -> dict:
    doc: dict = {"kind": instance.kind}
    if instance.name:
        doc["name"] = instance.name
    doc["vertices"] = [{"id": v, "timeout": int(instance.timeouts[v])} for v in instance.vertices]
    if instance.bipartition is not None:
        doc["bipartition"] = {"A": list(instance.bipartition[0]), "B": list(instance.bipartition[1])}
    doc["edges"] = [{"u": e.u, "v": e.v, "p": _num(e.p), "w": _num(e.w)} for e in instance.edges]
    if instance.rounds is not None:
        doc["rounds"] = int(instance.rounds)
    return doc


def serialize(instance: Instance) -> str:
    return json.dumps(to_document(instance), indent=2) + "\n"


def _decimal(value, path: str) -> float:
    if isinstance(value, bool):
        raise InstanceFormatError("expected a decimal number", path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise InstanceFormatError(f"not a decimal string: {value!r}", path) from None
    raise InstanceFormatError("expected a decimal string", path)


def _integer(value, path: str) -> int:
    if isinstance(value, bool):
        raise InstanceFormatError("expected an integer", path)
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value)
    raise InstanceFormatError("expected an integer", path)


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise InstanceFormatError("expected an object", path)
    if key not in obj:
        raise InstanceFormatError("missing required field", f"{path}.{key}" if path else key)
    return obj[key]


def parse(text: str) -> Instance:
    """Parse an instance document; errors name the line (syntax) or field (schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"JSON syntax error: {exc.msg}", line=exc.lineno) from None
    return from_document(doc)


def from_document(doc) -> Instance:
    kind = _require(doc, "kind", "")
    if kind not in KINDS:
        raise InstanceFormatError(f"unknown kind {kind!r}", "kind")
    raw_vertices = _require(doc, "vertices", "")
    if not isinstance(raw_vertices, list):
        raise InstanceFormatError("expected a list", "vertices")
    vertices, timeouts = [], {}
    for i, rv in enumerate(raw_vertices):
        path = f"vertices[{i}]"
        vid = str(_require(rv, "id", path))
        vertices.append(vid)
        timeouts[vid] = _integer(_require(rv, "timeout", path), f"{path}.timeout")
    bp = None
    if "bipartition" in doc and doc["bipartition"] is not None:
        raw = doc["bipartition"]
        side_a = _require(raw, "A", "bipartition")
        side_b = _require(raw, "B", "bipartition")
        bp = (tuple(str(a) for a in side_a), tuple(str(b) for b in side_b))
    raw_edges = _require(doc, "edges", "")
    if not isinstance(raw_edges, list):
        raise InstanceFormatError("expected a list", "edges")
    edges = []
    for i, re_ in enumerate(raw_edges):
        path = f"edges[{i}]"
        u = str(_require(re_, "u", path))
        v = str(_require(re_, "v", path))
        p = _decimal(_require(re_, "p", path), f"{path}.p")
        w = _decimal(_require(re_, "w", path), f"{path}.w")
        edges.append(Edge(i, u, v, p, w))
    rounds = None
    if "rounds" in doc:
        rounds = _integer(doc["rounds"], "rounds")
    elif kind == "online":
        raise InstanceFormatError("missing required field", "rounds")
    return Instance(kind, tuple(vertices), tuple(edges), timeouts, bp, rounds, str(doc.get("name", "")))


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        inst = parse(fh.read())
    if not inst.name:
        from pathlib import Path

        inst = Instance(inst.kind, inst.vertices, inst.edges, inst.timeouts, inst.bipartition, inst.rounds, Path(path).stem)
    return inst


def save(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(instance))


# ---------------------------------------------------------------- generation


@dataclass(frozen=True)
class GeneratorParams:
    """Random-instance recipe.

    ``prob`` is ``("uniform", lo, hi)`` or ``("two-point", p_small, p_large,
    frac_large)``.  ``density`` is the fraction of possible vertex pairs that
    become edges (online instances are always complete).
    """

    kind: str = "offline-bipartite"
    n_left: int = 3
    n_right: int = 3
    n_vertices: int = 6
    density: float = 1.0
    prob: tuple = ("uniform", 0.05, 1.0)
    weights: tuple[float, float] = (0.5, 2.0)
    timeouts: tuple[int, int] = (1, 3)
    seed: int = 0
    rounds: Optional[int] = None


def _check_params(params: GeneratorParams) -> None:
    if params.kind not in KINDS:
        raise ValueError(f"unknown kind {params.kind!r}")
    if not 0.0 <= params.density <= 1.0:
        raise ValueError(f"density {params.density} is outside [0, 1]")
    kind, *vals = params.prob
    if kind == "uniform":
        lo, hi = vals
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError("uniform probability range must satisfy 0 <= lo <= hi <= 1")
    elif kind == "two-point":
        small, large, frac = vals
        if not (0.0 <= small <= 1.0 and 0.0 <= large <= 1.0 and 0.0 <= frac <= 1.0):
            raise ValueError("two-point probabilities and fraction must lie in [0, 1]")
    else:
        raise ValueError(f"unknown probability spec {kind!r}")
    wlo, whi = params.weights
    if not 0.0 <= wlo <= whi:
        raise ValueError("weight range must satisfy 0 <= lo <= hi")
    tlo, thi = params.timeouts
    if not 1 <= tlo <= thi:
        raise ValueError("timeout range must satisfy 1 <= lo <= hi")
    sizes = (params.n_left, params.n_right) if params.kind != "offline-general" else (params.n_vertices,)
    if min(sizes) < 1:
        raise ValueError("vertex counts must be positive")


def _draw_probs(rng: np.random.Generator, spec: tuple, k: int) -> np.ndarray:
    kind, *vals = spec
    if kind == "uniform":
        lo, hi = vals
        return rng.uniform(lo, hi, size=k)
    small, large, frac = vals
    return np.where(rng.random(k) < frac, large, small)


def generate(params: GeneratorParams, name: str = "") -> Instance:
    """Deterministic random instance for the given recipe."""
    _check_params(params)
    rng = np.random.default_rng(params.seed)
    if params.kind == "offline-general":
        vertices = [f"v{i}" for i in range(params.n_vertices)]
        pairs = [(vertices[i], vertices[j]) for i in range(len(vertices)) for j in range(i + 1, len(vertices))]
        bp = None
    else:
        side_a = [f"a{i}" for i in range(params.n_left)]
        side_b = [f"b{j}" for j in range(params.n_right)]
        vertices = side_a + side_b
        pairs = [(a, b) for a in side_a for b in side_b]
        bp = (side_a, side_b)
    if params.kind == "online":
        chosen = pairs
    else:
        k = int(round(params.density * len(pairs)))
        keep = np.sort(rng.permutation(len(pairs))[:k])
        chosen = [pairs[i] for i in keep]
    probs = _draw_probs(rng, params.prob, len(chosen))
    weights = rng.uniform(params.weights[0], params.weights[1], size=len(chosen))
    tlo, thi = params.timeouts
    t = rng.integers(tlo, thi + 1, size=len(vertices))
    timeouts = {v: int(x) for v, x in zip(vertices, t)}
    rounds = None
    if params.kind == "online":
        rounds = params.rounds if params.rounds is not None else params.n_right
        for a in bp[0]:
            timeouts[a] = params.n_right * rounds
    edges = [(u, v, float(p), float(w)) for (u, v), p, w in zip(chosen, probs, weights)]
    return make_instance(params.kind, vertices, edges, timeouts, bp, rounds, name)
