import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundtree.graph import complete_graph, random_regular
from boundtree.nibble import (
    StageError,
    StageForest,
    check_successful,
    default_stages,
    final_stage_goodness,
    nibble_step,
    q_sequence,
    red_forest_stage,
    regular_small_k_constant,
    run_nibble,
)
from boundtree.counting import is_spanning_tree
from boundtree.orientation import Orientation, sample_orientation


def _q_oracle(i):
    q = 1 / math.e
    for _ in range(i - 1):
        q = q / math.exp(q)
    return q


def test_q_sequence():
    assert q_sequence(1) == pytest.approx(1 / math.e)
    assert [q_sequence(i) for i in range(1, 8)] == pytest.approx([_q_oracle(i) for i in range(1, 8)])
    assert q_sequence(4) == pytest.approx(0.162038, abs=1e-6)
    assert q_sequence(19) == pytest.approx(0.045821, abs=1e-6)
    with pytest.raises(ValueError):
        q_sequence(0)


def test_stage_constants():
    assert default_stages(3) == 20 and default_stages(4) == 5 and default_stages(9) == 2
    # quoted values are truncations: 0.0494... and 0.1527...
    assert 0.0494 <= regular_small_k_constant(20) < 0.0495
    assert 0.1527 <= regular_small_k_constant(5) < 0.1528
    with pytest.raises(ValueError):
        regular_small_k_constant(4)


def test_stage_forest_validation():
    s = StageForest.empty(4)
    assert s.missing() == [0, 1, 2, 3] and s.is_acyclic()
    cyc = StageForest(3, np.array([1, 2, 0]), np.array([1, 1, 1]), 1)
    assert not cyc.is_acyclic()
    with pytest.raises(StageError):
        cyc.validate()
    two_in = StageForest(3, np.array([2, 2, -1]), np.array([1, 1, 0]), 1)
    assert any("in-degree" in v for v in two_in.violations())
    bad_label = StageForest(3, np.array([1, -1, -1]), np.array([3, 0, 0]), 1)
    assert any("stage label" in v for v in bad_label.violations())


@given(st.integers(0, 10**6), st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_nibble_steps_keep_invariants(seed, steps):
    g = random_regular(60, 12, seed=seed % 7)
    rng = np.random.default_rng(seed)
    s = StageForest.empty(g.n)
    for _ in range(steps):
        before = set(s.arcs())
        o = sample_orientation(g, rng)
        x = len(s.missing())
        s, rep = nibble_step(g, s, o, rng)
        assert set(s.arcs()) >= before
        assert s.violations(g) == []
        assert s.in_degrees().max() <= 1 and s.out_degrees().max() <= 1
        assert rep.x_size == x and rep.kept == x - len(s.missing())
        assert rep.kept + rep.e_star + rep.e_star_star >= x
        for v, u in s.arcs():
            if s.stage[v] == s.i:
                assert o.gamma[v] == u


def test_first_step_zero_in_fraction_near_q1():
    g = random_regular(400, 100, seed=1)
    rng = np.random.default_rng(2)
    s, _ = nibble_step(g, StageForest.empty(g.n), sample_orientation(g, rng), rng)
    chk = check_successful(s, g, eps=0.15)
    assert chk.forest_ok and chk.degrees_ok and chk.zero_in_ok
    assert abs(chk.zero_in_ratio - 1) < 0.15


def test_check_needs_regular():
    from boundtree.graph import star_graph

    with pytest.raises(ValueError):
        check_successful(StageForest.empty(4), star_graph(3))


def test_goodness_prefix_tracking():
    g = complete_graph(6)
    s = StageForest.empty(6)
    # every vertex points at 0 (0 points at 1): in-degree 5 at vertex 0
    o = Orientation((1, 0, 0, 0, 0, 0))
    comp, good = final_stage_goodness(g, s, o, 3)
    assert comp == o
    assert not good.good and good.first_bad_prefix is not None
    assert not good.in_degree_ok and good.in_cap == 2
    assert not good.accepted


def test_goodness_for_large_k():
    g = random_regular(60, 12, seed=0)
    rng = np.random.default_rng(0)
    s = red_forest_stage(g, sample_orientation(g, rng), 6, rng)
    assert s.in_cap == 4 and s.violations(g) == []
    comp, good = final_stage_goodness(g, s, sample_orientation(g, rng), 6)
    assert good.in_cap == 4 and good.added == len(s.missing())
    assert all(comp.gamma[v] == int(s.succ[v]) for v in range(g.n) if s.succ[v] >= 0)


@pytest.mark.parametrize("k", [5, 8])
def test_run_nibble_large_k_produces_trees(k):
    g = random_regular(200, 60, seed=4)
    run = run_nibble(g, k, seed=3)
    d = run.to_dict()
    assert d["schema"] == "boundtree.nibble-run/1" and d["K"] == 2
    if run.accepted:
        assert run.tree_status == "tree"
        assert is_spanning_tree(g, [tuple(e) for e in run.tree], k)
    assert run_nibble(g, k, seed=3).to_dict() == d


def test_run_nibble_small_k_reports_stages():
    g = random_regular(120, 40, seed=2)
    run = run_nibble(g, 4, seed=0, repair=False)
    assert len(run.stages) == 4
    assert all("check" in row for row in run.stages)
    assert run.reference_constant == pytest.approx(regular_small_k_constant(5))


def test_run_nibble_rejects_bad_input():
    g = random_regular(30, 8, seed=0)
    with pytest.raises(ValueError):
        run_nibble(g, 2)
    with pytest.raises(ValueError):
        run_nibble(g, 4, K=1)
