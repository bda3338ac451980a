"""The shipped instance corpus and acceptance suite.

Everything here is rebuilt deterministically by ``build_corpus``; the JSON
files under ``data/corpus`` are its serialized output (regenerate with
``python -m stochmatch.corpus``).
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .instance import GeneratorParams, Instance, generate, load, make_instance, online_instance, save

ACCEPTANCE_TRIALS = 100_000


def _bip(name, left, right, edges, timeouts=1):
    return make_instance("offline-bipartite", list(left) + list(right), edges, timeouts, (left, right), name=name)


def _gen(name, vertices, edges, timeouts=1):
    return make_instance("offline-general", vertices, edges, timeouts, name=name)


def _cycle(name, k, probs, weights, timeouts=1):
    vs = [f"c{i}" for i in range(k)]
    edges = [(vs[i], vs[(i + 1) % k], probs[i], weights[i]) for i in range(k)]
    if k % 2 == 0:
        return _bip(name, vs[0::2], vs[1::2], edges, timeouts)
    return _gen(name, vs, edges, timeouts)


def _hand_built() -> list[Instance]:
    out = [
        _bip("single-edge", ["u"], ["v"], [("u", "v", 0.5, 1.0)]),
        _bip("single-edge-certain", ["u"], ["v"], [("u", "v", 1.0, 2.0)]),
        _bip("single-edge-rare", ["u"], ["v"], [("u", "v", 0.05, 3.0)], 2),
        _bip("star-2", ["v"], ["a", "b"], [("v", "a", 0.5, 1.0), ("v", "b", 0.5, 1.0)], {"v": 2, "a": 1, "b": 1}),
        _bip("star-4", ["v"], ["a", "b", "c", "d"],
             [("v", "a", 0.9, 1.0), ("v", "b", 0.6, 1.5), ("v", "c", 0.3, 2.0), ("v", "d", 0.1, 4.0)],
             {"v": 2, "a": 1, "b": 1, "c": 1, "d": 1}),
        _bip("star-5-small", ["v"], list("abcde"),
             [("v", x, 0.2, 1.0 + 0.25 * i) for i, x in enumerate("abcde")], {"v": 3, **{x: 1 for x in "abcde"}}),
        _bip("star-6-patient", ["v"], list("abcdef"),
             [("v", x, 0.35, 1.0) for x in "abcdef"], {"v": 6, **{x: 1 for x in "abcdef"}}),
        _bip("path-uvw", ["v"], ["u", "w"], [("u", "v", 1.0, 1.0), ("v", "w", 1.0, 2.0)]),
        _bip("path-4", ["p0", "p2"], ["p1", "p3"],
             [("p0", "p1", 0.5, 1.0), ("p1", "p2", 0.5, 1.0), ("p2", "p3", 0.5, 1.0)], 2),
        _bip("path-6-mixed", ["p0", "p2", "p4"], ["p1", "p3", "p5"],
             [("p0", "p1", 0.8, 1.0), ("p1", "p2", 0.2, 3.0), ("p2", "p3", 0.6, 1.0),
              ("p3", "p4", 0.4, 2.0), ("p4", "p5", 1.0, 0.5)], 2),
        _cycle("cycle-4", 4, [0.5] * 4, [1.0] * 4),
        _cycle("cycle-4-weighted", 4, [1.0] * 4, [3.0, 1.0, 3.0, 1.0]),
        _cycle("cycle-6", 6, [0.9, 0.1, 0.7, 0.3, 0.5, 0.5], [1.0, 2.0, 1.0, 2.0, 1.0, 2.0], 2),
        _bip("two-point-star", ["v"], ["a", "b"], [("v", "a", 1.0, 1.0), ("v", "b", 0.05, 20.0)],
             {"v": 2, "a": 1, "b": 1}),
        _bip("two-point-path", ["v", "x"], ["u", "w"],
             [("u", "v", 0.05, 10.0), ("v", "w", 1.0, 1.0), ("w", "x", 0.05, 10.0)], 2),
        _gen("triangle", ["u", "v", "w"], [("u", "v", 1.0, 1.0), ("v", "w", 1.0, 1.0), ("w", "u", 1.0, 1.0)]),
        _gen("triangle-weighted", ["u", "v", "w"],
             [("u", "v", 1.0, 3.0), ("v", "w", 1.0, 2.0), ("w", "u", 1.0, 2.0)]),
        _gen("triangle-half", ["u", "v", "w"],
             [("u", "v", 0.5, 1.0), ("v", "w", 0.5, 1.0), ("w", "u", 0.5, 1.0)], 2),
        _cycle("cycle-5", 5, [1.0] * 5, [1.0] * 5),
        _cycle("cycle-5-mixed", 5, [0.9, 0.2, 0.6, 0.05, 1.0], [1.0, 3.0, 1.5, 8.0, 0.5], 2),
        _gen("k4", list("abcd"),
             [(a, b, 0.6, 1.0 + 0.5 * i) for i, (a, b) in
              enumerate([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")])], 2),
        _gen("bowtie", list("abcde"),
             [("a", "b", 1.0, 1.0), ("b", "c", 1.0, 1.0), ("c", "a", 1.0, 1.0),
              ("c", "d", 1.0, 1.0), ("d", "e", 1.0, 1.0), ("e", "c", 1.0, 1.0)]),
        _gen("path-as-general", ["u", "v", "w"], [("u", "v", 1.0, 1.0), ("v", "w", 1.0, 2.0)]),
    ]
    return out


def _generated() -> list[Instance]:
    out = []
    for s in range(6):
        dens = (1.0, 0.8, 0.7)[s % 3]
        out.append(generate(GeneratorParams("offline-bipartite", 3, 3, density=dens, seed=100 + s),
                            f"bip-3x3-s{s}"))
    for s in range(3):
        out.append(generate(GeneratorParams("offline-bipartite", 3, 4, density=1.0, seed=200 + s),
                            f"bip-3x4-s{s}"))
    for s in range(5):
        out.append(generate(GeneratorParams("offline-bipartite", 6, 6, density=0.6, seed=300 + s),
                            f"bip-6x6-s{s}"))
    for s in range(3):
        out.append(generate(GeneratorParams("offline-bipartite", 3, 3, density=0.8,
                                            prob=("two-point", 0.05, 1.0, 0.5), seed=400 + s),
                            f"two-point-3x3-s{s}"))
    for s in range(2):
        out.append(generate(GeneratorParams("offline-bipartite", 6, 6, density=0.5,
                                            prob=("two-point", 0.05, 1.0, 0.4), seed=450 + s),
                            f"two-point-6x6-s{s}"))
    for s, (n, dens) in enumerate([(5, 0.6), (5, 0.8), (6, 0.5), (6, 0.7), (7, 0.5), (8, 0.4), (9, 0.35), (10, 0.3)]):
        out.append(generate(GeneratorParams("offline-general", n_vertices=n, density=dens, seed=500 + s),
                            f"gen-{n}-s{s}"))
    for s in range(3):
        out.append(generate(GeneratorParams("offline-general", n_vertices=6, density=0.6,
                                            prob=("two-point", 0.05, 1.0, 0.5), seed=600 + s),
                            f"gen-two-point-6-s{s}"))
    out.append(online_instance([[0.5]], [[1.0]], 1, rounds=1, name="online-1x1"))
    for s in range(4):
        prob = ("two-point", 0.05, 1.0, 0.5) if s == 3 else ("uniform", 0.05, 1.0)
        out.append(generate(GeneratorParams("online", 3, 3, prob=prob, timeouts=(1, 3), seed=700 + s),
                            f"online-3x3-s{s}"))
    for s in range(3):
        out.append(generate(GeneratorParams("online", 5, 5, timeouts=(1, 3), seed=800 + s), f"online-5x5-s{s}"))
    rng = np.random.default_rng(900)
    out.append(online_instance(rng.uniform(0.05, 0.6, (3, 2)), rng.uniform(0.5, 2.0, (3, 2)), [2, 3],
                               name="online-3x2-small"))
    return out


def build_corpus() -> list[Instance]:
    return _hand_built() + _generated()


def _bench_cells(instances) -> list[dict]:
    cells = []
    for inst in instances:
        path = f"{inst.name}.json"
        base = {"instance": path, "trials": ACCEPTANCE_TRIALS, "seed": 1, "reference": "lp"}
        if inst.kind == "offline-bipartite":
            cells.append({**base, "algorithm": "main", "threshold": 0.39})
            cells.append({**base, "algorithm": "hybrid", "delta": 0.6, "threshold": 0.351})
        elif inst.kind == "offline-general":
            cells.append({**base, "algorithm": "general-hybrid", "delta": 0.558, "threshold": 0.269})
        else:
            cells.append({**base, "algorithm": "online-half", "threshold": 0.24})
            cells.append({**base, "algorithm": "online-combined", "delta": 0.74, "beta": "exact",
                          "threshold": 0.245})
    return cells


def write_corpus(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    instances = build_corpus()
    paths = []
    for inst in instances:
        p = directory / f"{inst.name}.json"
        save(inst, p)
        paths.append(p)
    with open(directory / "acceptance.json", "w", encoding="utf-8") as fh:
        json.dump({"cells": _bench_cells(instances)}, fh, indent=2)
        fh.write("\n")
    return paths


def corpus_dir() -> Path:
    return Path(str(resources.files("stochmatch") / "data" / "corpus"))


def load_corpus() -> list[Instance]:
    d = corpus_dir()
    return [load(p) for p in sorted(d.glob("*.json")) if p.name != "acceptance.json"]


if __name__ == "__main__":
    written = write_corpus(corpus_dir())
    print(f"wrote {len(written)} instances to {corpus_dir()}")
