"""Out-degree-one orientations: sampling, enumeration and structural classification.

An orientation assigns every vertex ``v`` one out-neighbour ``gamma[v]``.  Each
component of the resulting functional graph holds exactly one directed cycle.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .graph import Edge, Graph, GraphError, degree_product


@dataclass(frozen=True)
class Orientation:
    gamma: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.gamma)

    def arcs(self) -> list[Edge]:
        return list(enumerate(self.gamma))

    def validate(self, g: Graph) -> None:
        if len(self.gamma) != g.n:
            raise ValueError("orientation length differs from vertex count")
        for v, u in enumerate(self.gamma):
            if not g.has_edge(v, u):
                raise ValueError(f"gamma[{v}] = {u} is not a neighbour of {v}")


@dataclass(frozen=True)
class OrientationClassification:
    max_in_degree: int
    num_at_cap: int  # vertices with in-degree exactly k-1
    num_in_degree_at_least_cap: int  # vertices with in-degree >= k-1
    num_components: int
    num_directed_cycles: int
    in_H_ks: bool
    in_H_star_ell: bool
    histogram: dict[int, int]

    @property
    def accepted(self) -> bool:
        return self.in_H_ks and self.in_H_star_ell


@dataclass(frozen=True)
class StagePlan:
    """Stage count K and the per-vertex stage probabilities p_1..p_K."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.probs) < 1:
            raise ValueError("a stage plan needs K >= 1 stages")
        if any(p < 0 for p in self.probs):
            raise ValueError("stage probabilities must be non-negative")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"stage probabilities sum to {sum(self.probs)!r}, not 1")

    @property
    def K(self) -> int:
        return len(self.probs)

    @classmethod
    def uniform(cls, K: int) -> StagePlan:
        return cls(tuple([1.0 / K] * K))

    @classmethod
    def parse(cls, text: str) -> StagePlan:
        return cls(tuple(float(x) for x in text.split(",") if x.strip()))


def default_s(n: int, k: int) -> int:
    return n // (7 * k)


def default_ell(n: int) -> int:
    return max(1, math.ceil(math.log(n))) if n > 1 else 1


# -- sampling and enumeration ---------------------------------------------------


def _check_no_isolated(g: Graph) -> None:
    if g.n == 0 or any(d == 0 for d in g.degrees):
        raise GraphError("orientations need a graph without isolated vertices")


def sample_orientation(g: Graph, rng: np.random.Generator) -> Orientation:
    """Every vertex independently picks a uniform neighbour."""
    _check_no_isolated(g)
    deg = np.asarray(g.degrees)
    idx = np.minimum((rng.random(g.n) * deg).astype(np.int64), deg - 1)
    return Orientation(tuple(g.adjacency[v][i] for v, i in enumerate(idx.tolist())))


def enumerate_orientations(g: Graph, cap: int = 10**6) -> Iterator[Orientation]:
    """All d(G) orientations, each once, in mixed-radix order (last vertex fastest)."""
    _check_no_isolated(g)
    total = degree_product(g)
    if total > cap:
        raise ValueError(f"d(G) = {total} exceeds the enumeration cap {cap}")
    for gamma in itertools.product(*g.adjacency):
        yield Orientation(gamma)


def k_stage_sample(
    g: Graph, plan: StagePlan, rng: np.random.Generator
) -> tuple[Orientation, list[int], list[Orientation]]:
    """Draw K independent orientations, then let each vertex adopt stage c with prob p_c.

    Returns the composite, the 1-based stage of every vertex, and the K stage
    orientations.
    """
    stages = [sample_orientation(g, rng) for _ in range(plan.K)]
    if plan.K == 1:
        return stages[0], [1] * g.n, stages
    choice = rng.choice(plan.K, size=g.n, p=np.asarray(plan.probs))
    composite = tuple(stages[c].gamma[v] for v, c in enumerate(choice.tolist()))
    return Orientation(composite), [c + 1 for c in choice.tolist()], stages


# -- structure ------------------------------------------------------------------


def in_degrees(o: Orientation | Sequence[int]) -> list[int]:
    gamma = o.gamma if isinstance(o, Orientation) else o
    indeg = [0] * len(gamma)
    for u in gamma:
        indeg[u] += 1
    return indeg


def in_degree_histogram(o: Orientation) -> dict[int, int]:
    """Sizes of the classes B_i (vertices of in-degree i)."""
    return dict(sorted(Counter(in_degrees(o)).items()))


def directed_cycles(gamma: Sequence[int]) -> list[list[int]]:
    """The directed cycles of a functional graph, found by successor iteration."""
    n = len(gamma)
    state = [0] * n  # 0 unseen, otherwise the walk stamp that reached it
    cycles = []
    for s in range(n):
        if state[s]:
            continue
        stamp = s + 1
        x = s
        while not state[x]:
            state[x] = stamp
            x = gamma[x]
        if state[x] == stamp:
            cyc = [x]
            y = gamma[x]
            while y != x:
                cyc.append(y)
                y = gamma[y]
            cycles.append(cyc)
    return cycles


def functional_components(gamma: Sequence[int]) -> list[list[int]]:
    """Components of the underlying undirected graph of a functional graph."""
    n = len(gamma)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v, u in enumerate(gamma):
        a, b = find(v), find(u)
        if a != b:
            parent[a] = b
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values())


def classify(g: Graph, o: Orientation, k: int, s: int, ell: int) -> OrientationClassification:
    """Membership of ``o`` in H_{k,s}(G) and H*_ell(G), with the supporting counts."""
    indeg = in_degrees(o)
    hist = Counter(indeg)
    max_in = max(indeg)
    at_cap = hist.get(k - 1, 0)
    at_least = sum(c for i, c in hist.items() if i >= k - 1)
    comps = len(functional_components(o.gamma))
    cycles = len(directed_cycles(o.gamma))
    return OrientationClassification(
        max_in_degree=max_in,
        num_at_cap=at_cap,
        num_in_degree_at_least_cap=at_least,
        num_components=comps,
        num_directed_cycles=cycles,
        in_H_ks=max_in <= k - 1 and at_cap <= s,
        in_H_star_ell=comps <= ell,
        histogram=dict(sorted(hist.items())),
    )


def in_degree_prob_exact(r: int, i: int) -> float:
    """P[in-degree = i] for a vertex of an r-regular graph: Binomial(r, 1/r) at i."""
    if i < 0 or i > r:
        return 0.0
    if r == 1:
        return 1.0 if i == 1 else 0.0
    log_p = (
        math.lgamma(r + 1) - math.lgamma(i + 1) - math.lgamma(r - i + 1)
        - i * math.log(r) + (r - i) * math.log1p(-1.0 / r)
    )
    return math.exp(log_p)


def removable_edges(g: Graph, o: Orientation, k: int) -> list[Edge]:
    """Arcs (u, gamma[u]) whose head has in-degree at least k-1."""
    indeg = in_degrees(o)
    return [(u, v) for u, v in enumerate(o.gamma) if indeg[v] >= k - 1]


def removal_cost_Q(o: Orientation | Sequence[int], t: int) -> int:
    """Fewest arcs whose deletion leaves every in-degree at most t-1."""
    if t < 1:
        raise ValueError("t must be at least 1")
    return sum(i - t + 1 for i in in_degrees(o) if i >= t)


def delete_excess_in_edges(
    o: Orientation | Sequence[int],
    t: int,
    rng: np.random.Generator | None = None,
    exclude: set[Edge] | None = None,
) -> list[Edge]:
    """Arcs to drop so every in-degree becomes at most t-1.

    For each overloaded head the surplus in-arcs are chosen uniformly at random,
    or, with ``rng=None``, the arcs with the lowest source ids.  Arcs in
    ``exclude`` are treated as already gone.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    gamma = o.gamma if isinstance(o, Orientation) else o
    gone = exclude or set()
    into: dict[int, list[int]] = {}
    for u, v in enumerate(gamma):
        if (u, v) not in gone:
            into.setdefault(v, []).append(u)
    dropped = []
    for v in sorted(into):
        srcs = into[v]
        excess = len(srcs) - (t - 1)
        if excess <= 0:
            continue
        if rng is None:
            pick = srcs[:excess]
        else:
            pick = sorted(rng.choice(srcs, size=excess, replace=False).tolist())
        dropped += [(u, v) for u in pick]
    return sorted(dropped)


# -- vectorised batch helpers ---------------------------------------------------


def neighbor_table(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Padded ``(n, Delta)`` neighbour matrix and the degree vector."""
    _check_no_isolated(g)
    deg = np.asarray(g.degrees, dtype=np.int64)
    table = np.zeros((g.n, int(deg.max())), dtype=np.int64)
    for v, nbrs in enumerate(g.adjacency):
        table[v, : len(nbrs)] = nbrs
    return table, deg


def batch_orientations(table: np.ndarray, deg: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Map a ``(B, n)`` block of uniforms to ``(B, n)`` orientation arrays."""
    idx = np.minimum((uniforms * deg).astype(np.int64), deg - 1)
    return table[np.arange(table.shape[0])[None, :], idx]


def batch_in_degrees(gam: np.ndarray) -> np.ndarray:
    b, n = gam.shape
    flat = (gam + (np.arange(b) * n)[:, None]).ravel()
    return np.bincount(flat, minlength=b * n).reshape(b, n)


def batch_cycle_counts(gam: np.ndarray) -> np.ndarray:
    """Number of directed cycles (= components) of every orientation in a batch.

    Pointer doubling: after ceil(log2 n) squarings every vertex has been mapped
    onto its cycle, and a windowed minimum identifies one representative per cycle.
    """
    b, n = gam.shape
    rows = np.arange(b)[:, None]
    ident = np.broadcast_to(np.arange(n), (b, n))
    p = gam.copy()
    low = np.array(ident)
    steps = max(1, math.ceil(math.log2(max(n, 2))))
    for _ in range(steps):
        low = np.minimum(low, low[rows, p])
        p = p[rows, p]
    # p = gamma^(2^steps) lands on cycles; its image is exactly the cycle vertices
    on_cycle = np.zeros((b, n), dtype=bool)
    on_cycle[rows, p] = True
    # the window 2^steps >= n covers each whole cycle
    return np.count_nonzero(on_cycle & (low == ident), axis=1)
