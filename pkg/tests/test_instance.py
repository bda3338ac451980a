import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochmatch.instance import (
    Edge,
    GeneratorParams,
    Instance,
    InstanceFormatError,
    check,
    generate,
    make_instance,
    online_instance,
    parse,
    serialize,
    validate,
)


def codes(inst):
    return [v.code for v in validate(inst)]


def test_minimal_instance_is_valid(single_edge):
    assert validate(single_edge) == []


def test_probability_out_of_range():
    inst = make_instance("offline-general", ["u", "v"], [("u", "v", 1.2, 1.0)])
    assert codes(inst) == ["probability-out-of-range"]


def test_edge_not_crossing():
    inst = make_instance("offline-bipartite", ["a", "b", "c"], [("a", "b", 0.5, 1.0)], 1, (["a", "b"], ["c"]))
    assert codes(inst) == ["edge-not-crossing"]


@pytest.mark.parametrize(
    "edges, timeouts, code",
    [
        ([("u", "u", 0.5, 1.0)], 1, "self-loop"),
        ([("u", "v", 0.5, 1.0), ("v", "u", 0.5, 1.0)], 1, "parallel-edge"),
        ([("u", "x", 0.5, 1.0)], 1, "unknown-endpoint"),
        ([("u", "v", 0.5, -1.0)], 1, "negative-weight"),
        ([("u", "v", 0.5, 1.0)], 0, "nonpositive-timeout"),
        ([("u", "v", 0.5, 1.0)], {"u": 1}, "missing-timeout"),
    ],
)
def test_violation_codes(edges, timeouts, code):
    inst = make_instance("offline-general", ["u", "v"], edges, timeouts)
    assert code in codes(inst)


def test_structural_codes():
    inst = Instance("offline-general", ("u", "v"), (Edge(3, "u", "v", 0.5, 1.0),), {"u": 1, "v": 1})
    assert codes(inst) == ["edge-id-not-dense"]
    assert "missing-bipartition" in codes(make_instance("offline-bipartite", ["u", "v"], [("u", "v", 0.5, 1.0)]))
    assert "unknown-kind" in codes(make_instance("weird", ["u"], []))
    dup = Instance("offline-general", ("u", "u"), (), {"u": 1})
    assert "duplicate-vertex" in codes(dup)
    with pytest.raises(ValueError):
        check(dup)


def test_online_checks():
    inst = online_instance(np.full((2, 2), 0.5), np.ones((2, 2)), 1)
    assert validate(inst) == []
    short = make_instance("online", ["a0", "b0", "b1"], [("a0", "b0", 0.5, 1.0)],
                          {"a0": 4, "b0": 1, "b1": 1}, (["a0"], ["b0", "b1"]), rounds=2)
    assert "online-incomplete" in codes(short)
    tight = make_instance("online", ["a0", "b0"], [("a0", "b0", 0.5, 1.0)], 1, (["a0"], ["b0"]), rounds=3)
    assert "item-timeout-bounded" in codes(tight)
    bad_rounds = make_instance("online", ["a0", "b0"], [("a0", "b0", 0.5, 1.0)], 1, (["a0"], ["b0"]), rounds=0)
    assert "invalid-rounds" in codes(bad_rounds)
    offline_rounds = make_instance("offline-general", ["u", "v"], [("u", "v", 0.5, 1.0)], 1, rounds=2)
    assert "unexpected-rounds" in codes(offline_rounds)


CANONICAL = """{
  "kind": "offline-bipartite",
  "vertices": [
    {
      "id": "u",
      "timeout": 1
    },
    {
      "id": "v",
      "timeout": 1
    }
  ],
  "bipartition": {
    "A": [
      "u"
    ],
    "B": [
      "v"
    ]
  },
  "edges": [
    {
      "u": "u",
      "v": "v",
      "p": "0.5",
      "w": "1.0"
    }
  ]
}
"""


def test_canonical_round_trip():
    inst = parse(CANONICAL)
    assert inst.n_edges == 1
    assert serialize(inst) == CANONICAL


def test_missing_timeout_names_field():
    doc = json.loads(CANONICAL)
    del doc["vertices"][1]["timeout"]
    with pytest.raises(InstanceFormatError) as info:
        parse(json.dumps(doc))
    assert info.value.field == "vertices[1].timeout"


def test_syntax_error_reports_line():
    text = CANONICAL.replace('"p": "0.5",', '"p": "0.5"')
    with pytest.raises(InstanceFormatError) as info:
        parse(text)
    assert info.value.line is not None and info.value.line > 1


def test_bad_decimal_names_field():
    with pytest.raises(InstanceFormatError) as info:
        parse(CANONICAL.replace('"0.5"', '"half"'))
    assert info.value.field == "edges[0].p"


def test_generated_round_trip():
    inst = generate(GeneratorParams("offline-general", n_vertices=8, density=20 / 28, seed=3))
    assert inst.n_edges == 20
    assert parse(serialize(inst)) == inst


def test_generator_determinism_and_shapes():
    a = generate(GeneratorParams(seed=7))
    assert a == generate(GeneratorParams(seed=7))
    tp = generate(GeneratorParams("offline-bipartite", 4, 4, prob=("two-point", 0.05, 1.0, 0.5), seed=1))
    assert set(tp.p.tolist()) <= {0.05, 1.0}
    full = generate(GeneratorParams("offline-bipartite", 5, 5, density=1.0, seed=2))
    assert full.n_edges == 25 and validate(full) == []


@pytest.mark.parametrize(
    "params",
    [
        GeneratorParams(density=1.5),
        GeneratorParams(prob=("uniform", 0.5, 1.2)),
        GeneratorParams(prob=("beta", 1, 2)),
        GeneratorParams(weights=(2.0, 1.0)),
        GeneratorParams(timeouts=(0, 2)),
        GeneratorParams(n_left=0),
        GeneratorParams(kind="hypergraph"),
    ],
)
def test_infeasible_params(params):
    with pytest.raises(ValueError):
        generate(params)


def test_thousand_seeds_validate():
    kinds = ("offline-bipartite", "offline-general", "online")
    for s in range(1000):
        kind = kinds[s % 3]
        prob = ("two-point", 0.05, 1.0, 0.3) if s % 5 == 0 else ("uniform", 0.0, 1.0)
        inst = generate(GeneratorParams(kind, 1 + s % 4, 1 + s % 3, n_vertices=2 + s % 7,
                                        density=(s % 11) / 10, prob=prob, seed=s))
        assert validate(inst) == [], (s, validate(inst))


finite_prob = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
finite_weight = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=6),
    data=st.data(),
)
def test_round_trip_property(n, data):
    vs = [f"v{i}" for i in range(n)]
    pairs = [(vs[i], vs[j]) for i in range(n) for j in range(i + 1, n)]
    keep = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    edges = [(u, v, data.draw(finite_prob), data.draw(finite_weight)) for u, v in keep]
    timeouts = {v: data.draw(st.integers(1, 9)) for v in vs}
    inst = make_instance("offline-general", vs, edges, timeouts, name=data.draw(st.sampled_from(["", "x"])))
    text = serialize(inst)
    back = parse(text)
    assert back == inst
    assert serialize(back) == text
