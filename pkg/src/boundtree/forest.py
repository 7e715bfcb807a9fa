"""Degree-capped spanning forests and their construction from orientations."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal, Sequence

import numpy as np

from .graph import Edge, Graph
from .orientation import (
    Orientation,
    delete_excess_in_edges,
    directed_cycles,
    in_degrees,
)

PruneMode = Literal["cycles", "general", "regular"]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class BoundedForest:
    """Acyclic spanning subgraph with every degree at most ``k``.

    Vertices of degree exactly ``k`` are W-vertices, the rest U-vertices.
    ``log`` records how the forest was obtained and is not part of equality.
    """

    n: int
    k: int
    edges: frozenset[Edge]
    log: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        deg = self.degrees
        if any(d > self.k for d in deg):
            raise ValueError(f"forest has a vertex of degree {max(deg)} > k = {self.k}")
        if len(self.edges) + len(self.components) != self.n:
            raise ValueError("edge set contains a cycle")

    @classmethod
    def from_edges(cls, n: int, k: int, edges: Iterable[Sequence[int]], log: tuple = ()) -> BoundedForest:
        return cls(n, k, frozenset(norm_edge(int(a), int(b)) for a, b in edges), log)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return tuple(deg)

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    @cached_property
    def components(self) -> list[list[int]]:
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            parent[find(u)] = find(v)
        groups: dict[int, list[int]] = {}
        for v in range(self.n):
            groups.setdefault(find(v), []).append(v)
        return sorted(groups.values())

    @property
    def w_vertices(self) -> list[int]:
        return [v for v, d in enumerate(self.degrees) if d == self.k]

    @property
    def w_count(self) -> int:
        return sum(1 for d in self.degrees if d == self.k)

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def is_subgraph_of(self, g: Graph) -> bool:
        return g.n == self.n and all(g.has_edge(u, v) for u, v in self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def break_cycles(o: Orientation) -> list[Edge]:
    """One arc per directed cycle: the arc whose head has the largest in-degree, lowest tail on ties."""
    indeg = in_degrees(o)
    out = []
    for cyc in directed_cycles(o.gamma):
        tail = min(cyc, key=lambda u: (-indeg[o.gamma[u]], u))
        out.append((tail, o.gamma[tail]))
    return sorted(out)


def orientation_to_pruned_forest(
    g: Graph,
    o: Orientation,
    k: int,
    mode: PruneMode = "general",
    rng: np.random.Generator | None = None,
) -> BoundedForest:
    """Turn an orientation into a forest with degree cap ``k``.

    One arc is removed from every directed cycle.  Then, by ``mode``:

    * ``"cycles"``: nothing more; needs max in-degree <= k-1 to respect the cap.
    * ``"general"``: every removable arc (head in-degree >= k-1) is dropped.
    * ``"regular"``: surplus in-arcs are dropped (uniformly at random, or lowest
      source ids when ``rng`` is None) until every in-degree is <= k-2.

    ``log`` lists ``(tail, head, reason)`` for every dropped arc.
    """
    o.validate(g)
    cuts = break_cycles(o)
    gone = set(cuts)
    log = [(u, v, "cycle") for u, v in cuts]
    if mode == "general":
        indeg = in_degrees(o)
        for u, v in enumerate(o.gamma):
            if indeg[v] >= k - 1 and (u, v) not in gone:
                gone.add((u, v))
                log.append((u, v, "removable"))
    elif mode == "regular":
        for u, v in delete_excess_in_edges(o, k - 1, rng, exclude=gone):
            gone.add((u, v))
            log.append((u, v, "excess"))
    elif mode != "cycles":
        raise ValueError(f"unknown pruning mode {mode!r}")
    kept = [norm_edge(u, v) for u, v in enumerate(o.gamma) if (u, v) not in gone]
    return BoundedForest.from_edges(g.n, k, kept, tuple(log))
