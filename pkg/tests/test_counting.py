import math

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundtree.counting import (
    bareiss_determinant,
    count_bounded,
    count_by_max_degree,
    count_hamilton_paths,
    count_spanning_trees,
    enumerate_spanning_trees,
    is_spanning_tree,
    normalized_count,
)
from boundtree.graph import build_graph, complete_bipartite, complete_graph, cycle_graph, path_graph, star_graph

from test_graph import graphs


@pytest.mark.parametrize(
    "matrix,det",
    [([[2]], 2), ([[1, 2], [3, 4]], -2), ([[0, 1], [1, 0]], -1), ([[0, 0], [1, 1]], 0),
     ([[2, -1, 0], [-1, 2, -1], [0, -1, 2]], 4), ([], 1)],
)
def test_bareiss_small(matrix, det):
    assert bareiss_determinant(matrix) == det


@given(st.integers(1, 6).flatmap(lambda n: st.lists(
    st.lists(st.integers(-50, 50), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_leibniz(m):
    import itertools

    n = len(m)
    ref = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        ref += (-1) ** inv * math.prod(m[i][perm[i]] for i in range(n))
    assert bareiss_determinant(m) == ref


def test_bareiss_big_integers():
    big = 10**40
    assert bareiss_determinant([[big, 1], [1, big]]) == big * big - 1


@pytest.mark.parametrize("n", range(1, 9))
def test_cayley(n):
    assert count_spanning_trees(complete_graph(n)) == n ** (n - 2) if n > 1 else 1


def test_known_counts():
    assert count_spanning_trees(cycle_graph(7)) == 7
    assert count_spanning_trees(complete_bipartite(3, 4)) == 3 ** 3 * 4 ** 2
    assert count_spanning_trees(build_graph(3, [(0, 1)])) == 0
    assert count_spanning_trees(star_graph(5)) == 1


@given(graphs(max_n=7))
@settings(max_examples=60, deadline=None)
def test_enumeration_matches_determinant(g):
    en = enumerate_spanning_trees(g)
    assert en.count == count_spanning_trees(g) or g.n == 1
    assert len(set(en.trees)) == len(en.trees)
    for t in en.trees:
        assert is_spanning_tree(g, t)


@given(graphs(max_n=7))
@settings(max_examples=40, deadline=None)
def test_trees_are_trees_by_networkx(g):
    for t in enumerate_spanning_trees(g, cap=30).trees:
        ref = nx.Graph()
        ref.add_nodes_from(range(g.n))
        ref.add_edges_from(t)
        assert nx.is_tree(ref)


def test_cap_and_visitor():
    g = complete_graph(5)
    en = enumerate_spanning_trees(g, cap=10)
    assert en.count == 10 and en.truncated
    exact = enumerate_spanning_trees(g, cap=125)
    assert exact.count == 125 and not exact.truncated
    seen = []
    stopped = enumerate_spanning_trees(g, visitor=lambda t: seen.append(t) or len(seen) < 3)
    assert len(seen) == 3 and stopped.count == 3


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_c2_is_hamilton_paths(n):
    g = complete_graph(n)
    assert count_bounded(g, 2) == math.factorial(n) // 2 == count_hamilton_paths(g)


@given(graphs(max_n=7))
@settings(max_examples=40, deadline=None)
def test_c2_matches_hamilton_dp(g):
    if g.n >= 2:
        assert count_bounded(g, 2) == count_hamilton_paths(g)


@given(graphs(max_n=7))
@settings(max_examples=40, deadline=None)
def test_histogram_accumulates_to_bounded_counts(g):
    hist = count_by_max_degree(g)
    for k in range(1, g.n + 1):
        assert count_bounded(g, k) == (hist.bounded(k) if g.n > 1 else 1)


def test_k8_bounded_counts():
    # frozen from a full enumeration of the 262144 trees of K8
    assert [count_bounded(complete_graph(8), k) for k in (1, 2, 3)] == [0, 20160, 201600]


def test_k5_histogram():
    assert count_by_max_degree(complete_graph(5)).by_max_degree == {2: 60, 3: 60, 4: 5}


def test_small_cases():
    assert count_bounded(star_graph(3), 2) == 0
    assert count_bounded(path_graph(4), 2) == 1
    assert count_bounded(build_graph(1, []), 1) == 1
    with pytest.raises(ValueError):
        count_bounded(path_graph(3), 0)
    assert normalized_count(star_graph(3), 2) == 0.0
    assert normalized_count(complete_graph(4), 3) == pytest.approx(16 ** 0.25)


def test_is_spanning_tree_rejections():
    g = complete_graph(4)
    assert not is_spanning_tree(g, [(0, 1), (1, 2)])
    assert not is_spanning_tree(g, [(0, 1), (1, 2), (0, 2)])
    assert not is_spanning_tree(path_graph(4), [(0, 1), (1, 2), (0, 3)])
    assert not is_spanning_tree(g, [(0, 1), (0, 2), (0, 3)], k=2)
    assert is_spanning_tree(g, [(0, 1), (0, 2), (0, 3)], k=3)
