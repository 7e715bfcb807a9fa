import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundtree.constructions import (
    HypothesisError,
    bipartite_counterexample,
    bound_below_mean_degree,
    constants,
    f_const,
    g_const,
    no_bounded_tree_certificate,
    smallest_tight_t,
    theorem_bound,
    tight_regular_construction,
    z_const,
    z_star_const,
)
from boundtree.counting import count_bounded
from boundtree.graph import GraphError, complete_graph, path_graph, random_regular

TABLE = {5: 0.843148, 6: 0.962200, 7: 0.991935, 8: 0.998565, 9: 0.999783, 10: 0.999971, 11: 0.999997}


@pytest.mark.parametrize("k,z", sorted(TABLE.items()))
def test_z_table(k, z):
    assert z_const(k) == pytest.approx(z, abs=1e-6)


def test_f_against_direct_sum():
    for k in range(3, 15):
        direct = 1 - sum(1 / math.factorial(i) for i in range(k - 2)) / math.e
        assert f_const(k) == pytest.approx(direct, rel=1e-9)
    # the tail form stays accurate where the subtraction loses everything
    assert f_const(30) > 0 and f_const(30) == pytest.approx(1 / (math.e * math.factorial(28)), rel=0.05)


def test_g_and_small_constants():
    assert g_const(5) == pytest.approx(2 / (math.e * 24))
    assert z_const(3) == 0.0494 and z_const(4) == 0.1527
    assert z_star_const(20) > 0.956
    assert z_star_const(20) == pytest.approx(0.956753, abs=1e-6)
    with pytest.raises(ValueError):
        constants(2)
    assert constants(6).to_dict()["k"] == 6


@given(st.integers(3, 40))
def test_constants_in_unit_interval_and_increase(k):
    c, nxt = constants(k), constants(k + 1)
    # z_k rounds to 1.0 in double precision from k = 21 on
    assert 0 < c.z_k <= 1 and 0 < c.z_star_k < 1
    assert nxt.z_star_k > c.z_star_k
    if k >= 5:
        assert nxt.z_k >= c.z_k


def test_theorem_bound_regimes():
    rep = theorem_bound(600, 100, 5)
    assert rep.bound == pytest.approx(100 * TABLE[5], abs=1e-4)
    with pytest.raises(HypothesisError, match="r >= n/\\(k\\+1\\)"):
        theorem_bound(100, 24, 3)
    near = theorem_bound(100, [30] * 50 + [40] * 50, 200, "nearly-regular")
    assert near.base == pytest.approx(math.sqrt(1200))
    with pytest.raises(HypothesisError, match="max degree"):
        theorem_bound(100, [30] * 50 + [40] * 50, 20, "nearly-regular")
    with pytest.raises(HypothesisError):
        theorem_bound(100, [30] * 100, 3, "non-regular")
    with pytest.raises(ValueError):
        theorem_bound(10, 5, 3, "bogus")
    assert bound_below_mean_degree(random_regular(60, 20, seed=0), 5)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_tight_construction(k):
    t = smallest_tight_t(k)
    tc = tight_regular_construction(k, t)
    g = tc.graph
    assert g.regular_degree == tc.r == g.n // (k + 1) - 2
    assert no_bounded_tree_certificate(g, k) == tc.witness == 0
    ref = nx.Graph(list(g.edges))
    ref.remove_node(0)
    assert nx.number_connected_components(ref) == k + 1


@pytest.mark.parametrize("k,t", [(2, 8), (2, 7), (3, 5), (4, 7)])
def test_tight_construction_rejects(k, t):
    with pytest.raises(ValueError):
        tight_regular_construction(k, t, "odd-general" if (k, t) == (2, 7) else "auto")


@pytest.mark.parametrize("n,k", [(8, 3), (10, 4), (11, 3)])
def test_bipartite_counterexample(n, k):
    g = bipartite_counterexample(n, k)
    a = (n - 2) // k
    assert g.min_degree == a and a * (k + 1) > n - 2
    assert count_bounded(g, k) == 0


def test_bipartite_rejects_bad_parity():
    with pytest.raises(ValueError):
        bipartite_counterexample(9, 2)


def test_certificate_negative_and_disconnected():
    assert no_bounded_tree_certificate(complete_graph(6), 3) is None
    assert no_bounded_tree_certificate(path_graph(5), 1) == 1
    from boundtree.graph import build_graph

    with pytest.raises(GraphError):
        no_bounded_tree_certificate(build_graph(3, [(0, 1)]), 2)
