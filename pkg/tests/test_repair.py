
import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundtree.counting import is_spanning_tree
from boundtree.forest import BoundedForest
from boundtree.graph import build_graph, complete_graph, path_graph, random_regular
from boundtree.orientation import StagePlan
from boundtree.repair import (
    PreconditionError,
    RepairError,
    check_step_hypotheses,
    extend_forest_once,
    generate_many,
    pipeline_generate,
    repair_to_spanning_tree,
    step_violations,
    tree_hash,
)

from instances import random_instance, small_component_instance, two_block_instance


def _nx_forest(f: BoundedForest) -> nx.Graph:
    ref = nx.Graph()
    ref.add_nodes_from(range(f.n))
    ref.add_edges_from(f.edges)
    return ref


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=150, deadline=None)
def test_step_conclusions_hold(seed):
    g, f, _ = random_instance(np.random.default_rng(seed))
    out, rep = extend_forest_once(g, f)
    assert nx.is_forest(_nx_forest(out)) and out.is_subgraph_of(g)
    assert out.m == f.m + 1
    assert len(out.edges & f.edges) >= f.m - 3
    assert out.max_degree <= f.k
    assert out.w_count <= f.w_count + 4
    assert rep.w_count_before == f.w_count and rep.w_count_after == out.w_count
    assert set(rep.edges_added) == out.edges - f.edges
    assert set(rep.edges_removed) == f.edges - out.edges
    if rep.l1_size is not None:
        assert rep.l1_size <= g.n / (2 * f.k - 1)


def test_case_a_on_a_path_pair():
    g = complete_graph(30)
    f = BoundedForest.from_edges(30, 3, [(i, i + 1) for i in range(28)])
    out, rep = extend_forest_once(g, f)
    assert rep.case_used == "a" and rep.edges_removed == ()
    assert out.m == 29


@pytest.mark.parametrize("adjacent", [True, False])
def test_case_b_subcases(adjacent):
    rng = np.random.default_rng(11)
    for _ in range(40):
        g, f = small_component_instance(80, 3, rng, adjacent)
        out, rep = extend_forest_once(g, f)
        if rep.case_used == "b":
            assert rep.subcase == ("adjacent" if adjacent else "independent")
            return
    pytest.fail("case b never arose")


@pytest.mark.parametrize("kind,label", [("uw", "a-after-c"), ("ww", "c-after-d")])
def test_exchange_cases(kind, label):
    rng = np.random.default_rng(5)
    seen = set()
    for _ in range(40):
        g, f = two_block_instance(80, 3, rng, kind)
        seen.add(extend_forest_once(g, f)[1].case_used)
    assert label in seen


@pytest.mark.parametrize(
    "g,f,name",
    [
        (complete_graph(10), BoundedForest.from_edges(10, 2, [(0, 1)]), "k"),
        (build_graph(10, [(i, i + 1) for i in range(8)]), BoundedForest.from_edges(10, 3, []), "connected"),
        (path_graph(10), BoundedForest.from_edges(10, 3, [(0, 1)]), "degree"),
        (complete_graph(5), BoundedForest.from_edges(5, 3, [(0, 1), (1, 2), (2, 3), (3, 4)]), "edges"),
        (complete_graph(30), BoundedForest.from_edges(30, 3, [(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]), "w_count budget"),
        (complete_graph(10), BoundedForest.from_edges(9, 3, []), "not spanning"),
    ],
)
def test_precondition_names(g, f, name):
    with pytest.raises(PreconditionError) as info:
        check_step_hypotheses(g, f)
    assert info.value.hypothesis == name


def test_step_violations_reports_problems():
    a = BoundedForest.from_edges(6, 3, [(0, 1), (1, 2)])
    b = BoundedForest.from_edges(6, 3, [(3, 4)])
    _, rep = extend_forest_once(complete_graph(6 * 7 * 3), BoundedForest.from_edges(126, 3, [(0, 1)]))
    assert any("edge count" in p for p in step_violations(a, b, rep))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_full_repair_yields_bounded_tree(seed):
    rng = np.random.default_rng(seed)
    g, f, _ = random_instance(rng)
    if f.w_count * 7 * f.k > g.n:
        return
    res = repair_to_spanning_tree(g, f)
    assert is_spanning_tree(g, res.tree.sorted_edges(), f.k)
    assert nx.is_tree(_nx_forest(res.tree))
    assert res.steps == g.n - 1 - f.m
    assert res.added_total <= 4 * res.steps
    assert all(r.w_count_before * 6.8 * f.k <= g.n for r in res.trail)


def test_repair_start_checks():
    g = complete_graph(200)
    with pytest.raises(PreconditionError) as info:
        repair_to_spanning_tree(g, BoundedForest.from_edges(200, 3, []), c=1.0)
    assert info.value.hypothesis == "edges"
    tree = BoundedForest.from_edges(5, 3, [(0, 1), (1, 2), (2, 3), (3, 4)])
    assert repair_to_spanning_tree(complete_graph(5), tree).steps == 0


def test_repair_error_carries_step():
    err = RepairError("boom", 4)
    assert err.step == 4 and "step 4" in str(err)


def test_pipeline_k4_every_accepted_orientation_gives_tree():
    g = complete_graph(4)
    summary, trees = generate_many(g, 3, 100, seed=0, s=4, ell=4)
    assert summary.repair_failed == 0
    assert summary.trees + summary.rejected == 100
    assert summary.trees > 0 and 1 <= summary.distinct <= 16
    for t in trees:
        assert is_spanning_tree(g, t, 3)


def test_pipeline_rejects_small_k():
    assert pipeline_generate(complete_graph(5), 2).status == "rejected"


def test_pipeline_with_stage_plan():
    g = random_regular(40, 10, seed=3)
    res = [pipeline_generate(g, 4, StagePlan.uniform(2), seed=1, trial=t) for t in range(30)]
    for r in res:
        assert r.status in ("tree", "rejected")
        if r.status == "tree":
            assert is_spanning_tree(g, r.tree, 4)


def test_generate_many_worker_independent():
    g = random_regular(30, 8, seed=0)
    a, ta = generate_many(g, 4, 24, seed=3, workers=1)
    b, tb = generate_many(g, 4, 24, seed=3, workers=2)
    assert a.to_dict() == b.to_dict() and ta == tb


def test_tree_hash_is_canonical():
    assert tree_hash([(1, 0), (2, 1)]) == tree_hash([(1, 2), (0, 1)])
    assert tree_hash([(0, 1)]) != tree_hash([(0, 2)])
