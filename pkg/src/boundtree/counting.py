"""Exact spanning-tree counts: a Matrix-Tree determinant and a pruned enumerator.

The two routes share nothing but the Graph type, so agreement between them is
the oracle the probabilistic modules are tested against.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .graph import Edge, Graph, is_connected

TreeVisitor = Callable[[tuple[Edge, ...]], "bool | None"]


@dataclass(frozen=True)
class CountResult:
    total: int
    by_max_degree: dict[int, int] | None = None

    def bounded(self, k: int) -> int:
        if self.by_max_degree is None:
            raise ValueError("histogram was not requested")
        return sum(c for d, c in self.by_max_degree.items() if d <= k)


@dataclass(frozen=True)
class Enumeration:
    count: int
    truncated: bool
    trees: list[tuple[Edge, ...]] = field(default_factory=list, repr=False)


def bareiss_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination.

    Every intermediate division is exact, so the result is exact for
    arbitrarily large entries.
    """
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for p in range(n - 1):
        if a[p][p] == 0:
            for i in range(p + 1, n):
                if a[i][p] != 0:
                    a[p], a[i] = a[i], a[p]
                    sign = -sign
                    break
            else:
                return 0
        piv = a[p][p]
        row_p = a[p]
        for i in range(p + 1, n):
            row_i = a[i]
            f = row_i[p]
            for j in range(p + 1, n):
                row_i[j] = (row_i[j] * piv - f * row_p[j]) // prev
            row_i[p] = 0
        prev = piv
    return sign * a[n - 1][n - 1]


def laplacian(g: Graph) -> list[list[int]]:
    lap = [[0] * g.n for _ in range(g.n)]
    for v in range(g.n):
        lap[v][v] = g.degree(v)
        for u in g.neighbors(v):
            lap[v][u] = -1
    return lap


def count_spanning_trees(g: Graph) -> int:
    """c(G) as the cofactor of the Laplacian obtained by deleting vertex 0.

    Disconnected graphs give 0, which is what the cofactor evaluates to.
    """
    if g.n < 1:
        raise ValueError("graph must have at least one vertex")
    lap = laplacian(g)
    minor = [row[1:] for row in lap[1:]]
    return bareiss_determinant(minor)


def _search(g: Graph, k: int, on_tree: Callable[[list[Edge], list[int]], bool]) -> None:
    # Branch on the lowest undecided edge, deletion first.  Deletion is only
    # tried when the remaining graph stays connected (bridges are forced in);
    # inclusion is only tried when it keeps the forest acyclic and degree <= k.
    n = g.n
    edges = g.edges
    m = len(edges)
    parent = list(range(n))
    size = [1] * n
    deg = [0] * n
    chosen: list[Edge] = []
    stop = False

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def stays_connected(start: int) -> bool:
        p = [find(x) for x in range(n)]
        comps = len(set(p))
        if comps == 1:
            return True

        def f(x: int) -> int:
            while p[x] != x:
                p[x] = p[p[x]]
                x = p[x]
            return x

        for j in range(start, m):
            a, b = edges[j]
            ra, rb = f(a), f(b)
            if ra != rb:
                p[ra] = rb
                comps -= 1
                if comps == 1:
                    return True
        return False

    def rec(i: int) -> None:
        nonlocal stop
        if len(chosen) == n - 1:
            if not on_tree(chosen, deg):
                stop = True
            return
        if m - i < n - 1 - len(chosen):
            return
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru == rv:
            rec(i + 1)
            return
        if stays_connected(i + 1):
            rec(i + 1)
            if stop:
                return
        if deg[u] < k and deg[v] < k:
            if size[ru] < size[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] += size[rv]
            deg[u] += 1
            deg[v] += 1
            chosen.append((u, v))
            rec(i + 1)
            chosen.pop()
            deg[u] -= 1
            deg[v] -= 1
            size[ru] -= size[rv]
            parent[rv] = rv

    if n == 0 or not is_connected(g):
        return
    rec(0)


def enumerate_spanning_trees(
    g: Graph,
    visitor: TreeVisitor | None = None,
    cap: int | None = None,
    max_degree: int | None = None,
) -> Enumeration:
    """Emit every spanning tree of ``g`` exactly once, in a deterministic order.

    Each tree is passed to ``visitor`` as a tuple of sorted edges; a visitor
    returning ``False`` stops the walk.  Without a visitor the trees are
    collected into the result.  Reaching ``cap`` trees stops the walk and sets
    ``truncated``; the flag is only raised if a further tree actually exists.
    """
    k = g.n if max_degree is None else max_degree
    trees: list[tuple[Edge, ...]] = []
    count = 0
    truncated = False

    def on_tree(chosen: list[Edge], _deg: list[int]) -> bool:
        nonlocal count, truncated
        if cap is not None and count >= cap:
            truncated = True
            return False
        count += 1
        tree = tuple(chosen)
        if visitor is None:
            trees.append(tree)
        elif visitor(tree) is False:
            return False
        return True

    _search(g, k, on_tree)
    return Enumeration(count, truncated, trees)


def count_bounded(g: Graph, k: int) -> int:
    """c_k(G): spanning trees with every degree at most ``k``, by pruned enumeration."""
    if k < 1:
        raise ValueError("degree bound k must be at least 1")
    if g.n == 1:
        return 1
    total = 0

    def on_tree(_chosen: list[Edge], _deg: list[int]) -> bool:
        nonlocal total
        total += 1
        return True

    _search(g, k, on_tree)
    return total


def count_by_max_degree(g: Graph) -> CountResult:
    """All spanning trees bucketed by their maximum degree (one full enumeration)."""
    hist: Counter[int] = Counter()
    if g.n == 1:
        return CountResult(1, {0: 1})

    def on_tree(_chosen: list[Edge], deg: list[int]) -> bool:
        hist[max(deg)] += 1
        return True

    _search(g, g.n, on_tree)
    return CountResult(sum(hist.values()), dict(sorted(hist.items())))


def log_count(c: int) -> float:
    """Natural log of a big integer count (``-inf`` for zero)."""
    return math.log(c) if c > 0 else float("-inf")


def normalized_count(g: Graph, k: int) -> float:
    """c_k(G) ** (1/n) evaluated through logarithms; 0.0 when no such tree exists."""
    c = count_bounded(g, k)
    return math.exp(math.log(c) / g.n) if c else 0.0


def count_hamilton_paths(g: Graph) -> int:
    """Undirected Hamilton paths by bitmask dynamic programming (equals c_2(G))."""
    n = g.n
    if n == 1:
        return 1
    if n > 20:
        raise ValueError("bitmask DP is limited to n <= 20")
    full = (1 << n) - 1
    dp = [[0] * n for _ in range(1 << n)]
    for v in range(n):
        dp[1 << v][v] = 1
    for mask in range(1, full + 1):
        row = dp[mask]
        for v in range(n):
            c = row[v]
            if not c:
                continue
            for u in g.neighbors(v):
                if not mask >> u & 1:
                    dp[mask | 1 << u][u] += c
    return sum(dp[full]) // 2


def is_spanning_tree(g: Graph, edges: Iterable[Sequence[int]], k: int | None = None) -> bool:
    """True when ``edges`` is a spanning tree of ``g`` (with every degree <= k if given)."""
    es = [tuple(sorted((int(a), int(b)))) for a, b in edges]
    if len(es) != g.n - 1 or len(set(es)) != len(es):
        return False
    parent = list(range(g.n))
    deg = [0] * g.n

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in es:
        if not g.has_edge(u, v):
            return False
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
        deg[u] += 1
        deg[v] += 1
    return k is None or max(deg, default=0) <= k
