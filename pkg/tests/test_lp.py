import numpy as np
import pytest
from oracles import lp_oracle

from stochmatch.corpus import build_corpus
from stochmatch.instance import GeneratorParams, generate, make_instance, online_instance
from stochmatch.lp import (
    IterationLimitError,
    LpProblem,
    all_blossom_rows,
    build_lp_bip,
    build_lp_match,
    build_lp_onl,
    separate_blossom,
    solve_lp,
    solve_lp_bip,
    solve_lp_gen,
    solve_lp_onl,
    split_large_small,
)


def _problem(obj, rows, rhs):
    rows = tuple((np.array(i, dtype=np.int64), np.array(c, dtype=float)) for i, c in rows)
    return LpProblem(np.array(obj, dtype=float), rows, np.array(rhs, dtype=float))


def test_one_variable():
    sol = solve_lp(_problem([1.0], [([0], [1.0])], [1.0]))
    assert sol.objective == pytest.approx(1.0)
    assert sol.x == pytest.approx([1.0])


def test_degenerate_optimum():
    sol = solve_lp(_problem([1.0, 1.0], [([0, 1], [1.0, 1.0])], [1.0]))
    assert sol.objective == pytest.approx(1.0)
    assert sol.x.sum() == pytest.approx(1.0)


def test_nonfinite_coefficients_rejected():
    with pytest.raises(ValueError):
        _problem([np.inf], [], [])
    with pytest.raises(ValueError):
        _problem([1.0], [([3], [1.0])], [1.0])


def test_iteration_limit_reports_basis():
    prob = _problem([1.0, 2.0], [([0, 1], [1.0, 1.0])], [1.0])
    with pytest.raises(IterationLimitError) as info:
        solve_lp(prob, max_iter=0)
    assert "basis=" in str(info.value)


def test_star_bip(star):
    sol = solve_lp_bip(star)
    assert sol.objective == pytest.approx(1.0)
    assert sol.x == pytest.approx([1.0, 1.0])


def test_path_bip(path_uvw):
    sol = solve_lp_bip(path_uvw)
    assert sol.objective == pytest.approx(2.0)
    assert sol.x == pytest.approx([0.0, 1.0])


def test_single_edge_bip(single_edge):
    sol = solve_lp_bip(single_edge)
    assert sol.objective == pytest.approx(0.5)
    assert sol.x == pytest.approx([1.0])


def test_zero_probability_edges_get_no_variable():
    inst = make_instance("offline-bipartite", ["u", "v", "w"], [("u", "v", 0.0, 5.0), ("u", "w", 0.5, 1.0)],
                         1, (["u"], ["v", "w"]))
    prob = build_lp_bip(inst)
    assert prob.n_vars == 1
    sol = solve_lp(prob)
    assert sol.x[0] == 0.0 and sol.x[1] == pytest.approx(1.0)


def _small_instances():
    out = [i for i in build_corpus() if i.n_edges <= 6]
    for s in range(12):
        kind = "offline-general" if s % 2 else "offline-bipartite"
        out.append(generate(GeneratorParams(kind, 2, 3, n_vertices=4, density=0.9, seed=s)))
    return out


@pytest.mark.parametrize("inst", _small_instances(), ids=lambda i: i.name or "gen")
def test_simplex_matches_vertex_enumeration(inst):
    if inst.is_online:
        prob = build_lp_onl(inst)
    else:
        prob = build_lp_bip(inst)
    if prob.n_vars == 0:
        pytest.skip("no variables")
    sol = solve_lp(prob)
    assert sol.objective == pytest.approx(lp_oracle(prob), abs=1e-7)
    assert sol.max_residual <= 1e-7


def test_simplex_matches_highs_on_corpus():
    for inst in build_corpus():
        prob = build_lp_onl(inst) if inst.is_online else build_lp_bip(inst)
        a = solve_lp(prob)
        b = solve_lp(prob, backend="highs")
        assert a.objective == pytest.approx(b.objective, abs=1e-7), inst.name


def test_triangle_blossom(triangle):
    assert solve_lp_bip(triangle).objective == pytest.approx(1.5)
    assert solve_lp_bip(triangle).x == pytest.approx([0.5, 0.5, 0.5])
    sol = solve_lp_gen(triangle)
    assert sol.objective == pytest.approx(1.0)
    assert sol.cuts == (("u", "v", "w"),)


def test_cycle5_lp_gen(cycle5):
    assert solve_lp_gen(cycle5).objective == pytest.approx(2.0)
    assert lp_oracle(all_blossom_rows(cycle5)) == pytest.approx(2.0)


def test_separation_examples(triangle, cycle5):
    W, viol = separate_blossom(triangle, np.full(3, 0.5))
    assert W == ("u", "v", "w") and viol == pytest.approx(0.5)
    W, viol = separate_blossom(cycle5, np.full(5, 0.5))
    assert W == tuple("abcde") and viol == pytest.approx(0.5)
    two = make_instance("offline-general", ["a", "b"], [("a", "b", 1.0, 1.0)])
    assert separate_blossom(two, np.ones(1)) is None


def test_separation_tie_prefers_smaller_set():
    # two disjoint triangles joined by an edge, both equally violated
    vs = list("abcdef")
    edges = [("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d"), ("c", "d")]
    inst = make_instance("offline-general", vs, [(u, v, 1.0, 1.0) for u, v in edges])
    x = np.array([0.5] * 6 + [0.0])
    W, viol = separate_blossom(inst, x)
    assert W == ("a", "b", "c") and viol == pytest.approx(0.5)


def test_separation_vertex_cap():
    vs = [f"v{i}" for i in range(19)]
    inst = make_instance("offline-general", vs, [(vs[0], vs[1], 1.0, 1.0)])
    with pytest.raises(ValueError):
        separate_blossom(inst, np.ones(1))
    with pytest.raises(ValueError):
        solve_lp_gen(inst)


def test_lp_gen_equals_full_blossom_lp():
    for inst in build_corpus():
        if inst.kind != "offline-general" or len(inst.vertices) > 7:
            continue
        full = solve_lp(all_blossom_rows(inst), backend="highs").objective
        assert solve_lp_gen(inst).objective == pytest.approx(full, abs=1e-7), inst.name


def test_lp_gen_bounded_by_lp_bip_and_bipartite_unchanged():
    for inst in build_corpus():
        if inst.is_online:
            continue
        gen = solve_lp_gen(inst)
        bip = solve_lp_bip(inst)
        assert gen.objective <= bip.objective + 1e-9
        if inst.is_bipartite:
            assert gen.cuts == ()
            assert gen.objective == pytest.approx(bip.objective, abs=1e-9)


def test_onl_examples():
    assert solve_lp_onl(online_instance([[0.5]], [[1.0]], 1, rounds=1)).objective == pytest.approx(0.5)
    assert solve_lp_onl(online_instance([[1.0], [1.0]], [[1.0], [1.0]], 1)).objective == pytest.approx(1.0)
    sol = solve_lp_onl(online_instance([[1.0, 1.0]], [[1.0, 2.0]], 1))
    assert sol.objective == pytest.approx(2.0)
    assert sol.x == pytest.approx([0.0, 1.0])


def test_onl_row_structure():
    inst = online_instance(np.full((2, 3), 0.5), np.ones((2, 3)), 2)
    prob = build_lp_onl(inst)
    assert sum(lab.startswith("timeout") for lab in prob.labels) == 3
    assert sum(lab.startswith("prob") for lab in prob.labels) == 5


def test_match_lp(path_uvw):
    sol = solve_lp(build_lp_match(path_uvw))
    assert sol.objective == pytest.approx(2.0)


def test_split_examples(corpus_by_name):
    certain = corpus_by_name["cycle-4-weighted"]
    s = split_large_small(certain, solve_lp_bip(certain).x, 0.6)
    assert s.gamma == 1.0
    rare = make_instance("offline-bipartite", ["u", "v"], [("u", "v", 0.05, 1.0)], 1, (["u"], ["v"]))
    assert split_large_small(rare, solve_lp_bip(rare).x, 0.6).gamma == 0.0
    # equal LP mass on a p=1 edge and a p=0.05 edge
    mix = make_instance("offline-bipartite", ["a", "b", "c", "d"],
                        [("a", "b", 1.0, 1.0), ("c", "d", 0.05, 20.0)], 1, (["a", "c"], ["b", "d"]))
    s = split_large_small(mix, solve_lp_bip(mix).x, 0.6)
    assert s.gamma == pytest.approx(0.5)
    assert s.lp_large + s.lp_small == pytest.approx(s.lp_value, abs=1e-9)


def test_split_empty_value():
    inst = make_instance("offline-bipartite", ["u", "v"], [("u", "v", 0.0, 1.0)], 1, (["u"], ["v"]))
    s = split_large_small(inst, np.zeros(1), 0.6)
    assert s.lp_value == 0.0 and s.gamma == 0.0


def test_listing_is_deterministic(triangle):
    sol = solve_lp_gen(triangle)
    from stochmatch.lp import lp_gen_problem

    txt = lp_gen_problem(triangle, sol.cuts).to_text()
    assert txt == lp_gen_problem(triangle, sol.cuts).to_text()
    assert txt.splitlines()[0].startswith("max ")
    assert "blossom{u,v,w}" in txt


def test_every_corpus_solve_is_feasible():
    for inst in build_corpus():
        if inst.is_online:
            sol = solve_lp_onl(inst)
        elif inst.is_bipartite:
            sol = solve_lp_bip(inst)
        else:
            sol = solve_lp_gen(inst)
        assert sol.max_residual <= 1e-7
        assert np.all(sol.x >= 0) and np.all(sol.x <= 1 + 1e-9)
