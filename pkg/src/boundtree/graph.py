"""Immutable simple undirected graphs and the generators used as experiment substrates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised for malformed graph input or infeasible generator parameters."""


def _norm(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``adjacency[v]`` is the sorted tuple of neighbours of ``v``.  Instances are
    never mutated after construction, so they can be shared between workers.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple((u, v) for u in range(self.n) for v in self.adjacency[u] if u < v)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @cached_property
    def _adjsets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjsets[u]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def min_degree(self) -> int:
        return min(self.degrees) if self.n else 0

    @property
    def max_degree(self) -> int:
        return max(self.degrees) if self.n else 0

    @property
    def regular_degree(self) -> int | None:
        """Common degree if the graph is regular, else ``None``."""
        if self.n and self.min_degree == self.max_degree:
            return self.min_degree
        return None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency))

    def summary(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "min_degree": self.min_degree,
            "max_degree": self.max_degree,
            "regular": self.regular_degree is not None,
        }


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a graph, deduplicating repeated edges.

    Raises GraphError on a self-loop or an out-of-range endpoint.
    """
    if n < 0:
        raise GraphError(f"vertex count must be non-negative, got {n}")
    adj: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
        if u == v:
            raise GraphError(f"self-loop ({u}, {v}) is not allowed")
        adj[u].add(v)
        adj[v].add(u)
    return Graph(n, tuple(tuple(sorted(a)) for a in adj))


def validate_graph(g: Graph) -> None:
    """Check the structural invariants; raises GraphError on the first violation."""
    if len(g.adjacency) != g.n:
        raise GraphError("adjacency length differs from n")
    for v, nbrs in enumerate(g.adjacency):
        if list(nbrs) != sorted(set(nbrs)):
            raise GraphError(f"neighbours of {v} are not sorted and unique")
        for u in nbrs:
            if not 0 <= u < g.n:
                raise GraphError(f"neighbour {u} of {v} out of range")
            if u == v:
                raise GraphError(f"self-loop at {v}")
            if v not in g._adjsets[u]:
                raise GraphError(f"asymmetric adjacency between {v} and {u}")


def degree_product(g: Graph) -> int:
    """Exact product of all vertex degrees, i.e. the number of out-degree-one orientations."""
    if any(d == 0 for d in g.degrees):
        raise GraphError("graph has an isolated vertex")
    return math.prod(g.degrees)


def geometric_mean_degree(g: Graph) -> float:
    if any(d == 0 for d in g.degrees):
        raise GraphError("graph has an isolated vertex")
    return math.exp(sum(math.log(d) for d in g.degrees) / g.n)


def components(g: Graph) -> list[list[int]]:
    """Connected components as sorted vertex lists, ordered by smallest vertex."""
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            x = stack.pop()
            for y in g.adjacency[x]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    stack.append(y)
        out.append(sorted(comp))
    return out


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or len(components(g)) == 1


# -- named graphs ---------------------------------------------------------------


def complete_graph(n: int) -> Graph:
    return build_graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 vertices")
    return build_graph(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return build_graph(n, ((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> Graph:
    """K_{1,leaves} with centre 0."""
    return build_graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b} with part A = {0..a-1} and part B = {a..a+b-1}."""
    if a < 1 or b < 1:
        raise GraphError("both parts of a complete bipartite graph must be non-empty")
    return build_graph(a + b, ((u, a + v) for u in range(a) for v in range(b)))


def _pair_stubs(n: int, r: int, rng: np.random.Generator) -> set[Edge] | None:
    # Pair stubs at random, keep the simple pairs and re-pair only the
    # leftovers; None when the leftovers cannot form a simple pairing.
    edges: set[Edge] = set()
    stubs = np.repeat(np.arange(n), r)
    for _ in range(100 + n * r):
        if not stubs.size:
            return edges
        rng.shuffle(stubs)
        leftovers: list[int] = []
        for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            e = _norm(a, b)
            if a != b and e not in edges:
                edges.add(e)
            else:
                leftovers += (a, b)
        if not leftovers:
            return edges
        rest = sorted(set(leftovers))
        if not any(
            _norm(x, y) not in edges for i, x in enumerate(rest) for y in rest[i + 1:]
        ):
            return None
        stubs = np.array(leftovers)
    return None


def random_regular(n: int, r: int, seed: int, max_attempts: int = 1000) -> Graph:
    """Connected simple r-regular graph on n vertices, deterministic given ``seed``.

    Uses the pairing (configuration) model; pairings that leave an
    unfixable collision, and disconnected results, are discarded and redrawn.
    """
    if r < 0 or r >= n:
        raise GraphError(f"need 0 <= r < n, got n={n}, r={r}")
    if (n * r) % 2:
        raise GraphError(f"n*r = {n * r} is odd; no {r}-regular graph on {n} vertices")
    if r == 0 and n > 1 or r == 1 and n > 2:
        raise GraphError(f"no connected {r}-regular graph on {n} vertices")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        edges = _pair_stubs(n, r, rng)
        if edges is None:
            continue
        g = build_graph(n, sorted(edges))
        if is_connected(g):
            return g
    raise GraphError(f"no connected {r}-regular graph found in {max_attempts} attempts")


# -- edge-list files ------------------------------------------------------------


def parse_edge_list(text: str) -> Graph:
    """Parse the ``n m`` header + ``u v`` lines format; duplicates and loops are rejected."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise GraphError("empty edge list")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        pairs = [(int(a), int(b)) for a, b, *_ in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    if len(pairs) != m:
        raise GraphError(f"header declares {m} edges but {len(pairs)} were given")
    seen: set[Edge] = set()
    for u, v in pairs:
        if u == v:
            raise GraphError(f"self-loop line '{u} {v}'")
        e = _norm(u, v)
        if e in seen:
            raise GraphError(f"duplicate edge line '{u} {v}'")
        seen.add(e)
    return build_graph(n, pairs)


def format_edge_list(g: Graph) -> str:
    rows = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(rows) + "\n"


def read_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))
