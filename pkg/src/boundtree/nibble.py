"""Multi-stage construction of a low in-degree orientation, one stage at a time.

Each stage lets the vertices that still lack an out-edge draw one from a fresh
orientation, then discards just enough of the new edges to keep the union a
forest of directed paths (in- and out-degree at most one).  The final stage
adds the remaining out-edges and checks the resulting orientation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .graph import Graph
from .orientation import Orientation, classify, default_ell, default_s, sample_orientation
from .rng import trial_generator

SCHEMA = "boundtree.nibble-run/1"
DEFAULT_EPS = 0.15


def q_sequence(i: int) -> float:
    """q_1 = 1/e and q_i = q_{i-1} * exp(-q_{i-1})."""
    if i < 1:
        raise ValueError("stage index must be at least 1")
    q = math.exp(-1.0)
    for _ in range(i - 1):
        q *= math.exp(-q)
    return q


def _q(i: int) -> float:
    # stage 0 is the empty forest: every vertex has in- and out-degree 0
    return 1.0 if i == 0 else q_sequence(i)


def default_stages(k: int) -> int:
    """Stage count K used for k = 3 and k = 4; two stages otherwise."""
    return {3: 20, 4: 5}.get(k, 2)


def regular_small_k_constant(K: int) -> float:
    """(1 - 5 q_{K-1})^{q_{K-1}} / K, the per-vertex rate the staged argument yields."""
    if K < 5:
        raise ValueError("K >= 5 keeps 1 - 5 q_{K-1} positive")
    q = q_sequence(K - 1)
    return (1 - 5 * q) ** q / K


class StageError(ValueError):
    pass


@dataclass
class StageForest:
    """Union of the stage edge sets, stored as a partial successor map.

    ``succ[v]`` is v's out-neighbour or -1, ``stage[v]`` the stage that
    contributed that edge (0 when absent).  ``in_cap`` bounds in-degrees.
    """

    n: int
    succ: np.ndarray
    stage: np.ndarray
    i: int = 0
    in_cap: int = 1

    @classmethod
    def empty(cls, n: int) -> StageForest:
        return cls(n, np.full(n, -1, dtype=np.int64), np.zeros(n, dtype=np.int64))

    def arcs(self) -> list[tuple[int, int]]:
        return [(v, int(u)) for v, u in enumerate(self.succ) if u >= 0]

    def in_degrees(self) -> np.ndarray:
        tgt = self.succ[self.succ >= 0]
        return np.bincount(tgt, minlength=self.n)

    def out_degrees(self) -> np.ndarray:
        return (self.succ >= 0).astype(np.int64)

    def missing(self) -> list[int]:
        """Vertices without an out-edge, ascending."""
        return np.flatnonzero(self.succ < 0).tolist()

    def is_acyclic(self) -> bool:
        state = np.zeros(self.n, dtype=np.int64)
        for s in range(self.n):
            if state[s]:
                continue
            x = s
            while x >= 0 and not state[x]:
                state[x] = s + 1
                x = int(self.succ[x])
            if x >= 0 and state[x] == s + 1:
                return False
        return True

    def violations(self, g: Graph | None = None) -> list[str]:
        out = []
        if g is not None and any(not g.has_edge(v, u) for v, u in self.arcs()):
            out.append("edge outside G")
        if self.in_degrees().max(initial=0) > self.in_cap:
            out.append(f"in-degree above {self.in_cap}")
        if any(s < 1 or s > self.i for s in self.stage[self.succ >= 0]):
            out.append("edge with an invalid stage label")
        if not self.is_acyclic():
            out.append("union of stage edges has a cycle")
        return out

    def validate(self, g: Graph | None = None) -> None:
        bad = self.violations(g)
        if bad:
            raise StageError("; ".join(bad))


def _find(parent: np.ndarray, x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = int(parent[x])
    return x


def _forest_union_find(s: StageForest) -> tuple[np.ndarray, np.ndarray]:
    parent = np.arange(s.n)
    size = np.ones(s.n, dtype=np.int64)
    for v, u in s.arcs():
        a, b = _find(parent, v), _find(parent, u)
        if a != b:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
    return parent, size


@dataclass
class StepReport:
    i: int
    x_size: int
    friendly: int
    e_star: int
    e_star_star: int
    kept: int
    q_i: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def nibble_step(
    g: Graph,
    s: StageForest,
    o_next: Orientation,
    rng: np.random.Generator,
    small: float | None = None,
) -> tuple[StageForest, StepReport]:
    """Add stage i = s.i + 1 to the forest.

    The out-edges of the vertices lacking one are examined in id order.  A
    vertex is friendly when its component (in the forest plus the edges seen
    so far) has at most ``small`` (default sqrt n) vertices and its target lies
    in it; friendly edges and one cycle-closing edge per remaining cycle form
    E*.  E** drops, at every vertex whose in-degree exceeds one, a uniformly
    random set of new in-edges leaving in-degree exactly one.
    """
    s.validate()
    if s.in_cap != 1:
        raise StageError("stage forests for the nibble need in-degree cap 1")
    n = s.n
    small = math.sqrt(n) if small is None else small
    xs = s.missing()
    i = s.i + 1
    new = [(v, int(o_next.gamma[v])) for v in xs]
    parent, size = _forest_union_find(s)
    friendly: set[int] = set()
    closing: set[int] = set()
    for v, u in new:
        a, b = _find(parent, v), _find(parent, u)
        if a == b:
            if size[a] <= small:
                friendly.add(v)
            else:
                closing.add(v)
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    # E** on the full E_i plus forest, as in-degrees there
    into: dict[int, list[int]] = {}
    for v, u in new:
        into.setdefault(u, []).append(v)
    base_in = s.in_degrees()
    drop: set[int] = set()
    for u in sorted(into):
        srcs = into[u]
        if base_in[u] + len(srcs) <= 1:
            continue
        if base_in[u] >= 1:
            drop.update(srcs)
        else:
            keep = srcs[int(rng.integers(len(srcs)))]
            drop.update(v for v in srcs if v != keep)
    succ = s.succ.copy()
    stage = s.stage.copy()
    kept = 0
    for v, u in new:
        if v in friendly or v in closing or v in drop:
            continue
        succ[v] = u
        stage[v] = i
        kept += 1
    out = StageForest(n, succ, stage, i, 1)
    out.validate(g)
    report = StepReport(i, len(xs), len(friendly), len(friendly) + len(closing), len(drop), kept, q_sequence(i))
    return out, report


@dataclass
class SuccessCheck:
    i: int
    eps: float
    q_i: float
    forest_ok: bool  # item (b)
    degrees_ok: bool  # item (c)
    zero_in_ok: bool  # item (d)
    nbr_zero_in_ok: bool  # item (e)
    nbr_zero_out_ok: bool  # item (f)
    zero_in_count: int
    zero_in_ratio: float
    nbr_in_ratio_range: tuple[float, float]
    nbr_out_ratio_range: tuple[float, float]

    @property
    def passed(self) -> bool:
        return (self.forest_ok and self.degrees_ok and self.zero_in_ok
                and self.nbr_zero_in_ok and self.nbr_zero_out_ok)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _neighbour_counts(g: Graph, mask: np.ndarray) -> np.ndarray:
    return np.array([int(mask[list(g.neighbors(v))].sum()) for v in range(g.n)], dtype=np.int64)


def check_successful(s: StageForest, g: Graph, eps: float = DEFAULT_EPS) -> SuccessCheck:
    """Evaluate the successfulness items (b)-(f) for stage ``s.i`` with tolerance band 1 +- eps."""
    r = g.regular_degree
    if r is None:
        raise ValueError("successfulness is defined for regular graphs")
    n = s.n
    q = _q(s.i)
    indeg = s.in_degrees()
    outdeg = s.out_degrees()
    forest_ok = s.is_acyclic() and all(g.has_edge(v, u) for v, u in s.arcs())
    degrees_ok = bool(indeg.max(initial=0) <= 1 and outdeg.max(initial=0) <= 1)
    zero_in = indeg == 0
    z = int(zero_in.sum())
    nin = _neighbour_counts(g, zero_in) / (r * q)
    nout = _neighbour_counts(g, outdeg == 0) / (r * q)
    lo, hi = 1 - eps, 1 + eps
    tol = 1e-12
    return SuccessCheck(
        i=s.i, eps=eps, q_i=q,
        forest_ok=forest_ok,
        degrees_ok=degrees_ok,
        zero_in_ok=lo - tol <= z / (n * q) <= hi + tol,
        nbr_zero_in_ok=bool(nin.min() >= lo - tol and nin.max() <= hi + tol),
        nbr_zero_out_ok=bool(nout.min() >= lo - tol and nout.max() <= hi + tol),
        zero_in_count=z,
        zero_in_ratio=z / (n * q),
        nbr_in_ratio_range=(float(nin.min()), float(nin.max())),
        nbr_out_ratio_range=(float(nout.min()), float(nout.max())),
    )


@dataclass
class Goodness:
    in_cap: int
    added: int
    first_bad_prefix: int | None  # number of edges added when goodness first failed
    in_degree_ok: bool
    small_components_are_trees: bool
    cap_count_ok: bool
    classification: dict[str, Any] = field(default_factory=dict)
    accepted: bool = False

    @property
    def good(self) -> bool:
        return self.first_bad_prefix is None

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["good"] = self.good
        return d


def final_stage_goodness(
    g: Graph, s: StageForest, o_k: Orientation, k: int, eps: float = DEFAULT_EPS
) -> tuple[Orientation, Goodness]:
    """Complete ``s`` with the out-edges of ``o_k`` and track goodness prefix by prefix.

    For k in {3, 4} the in-degree cap is 2 and the number of in-degree-2
    vertices may not exceed the number of edges added; otherwise the cap is
    k-2.  In both regimes components below n/ln n must stay trees.  The
    composite is then classified against the class the final stage targets.
    """
    n = s.n
    small_regime = k in (3, 4)
    cap = 2 if small_regime else k - 2
    threshold = n / math.log(n) if n > 1 else 1.0
    parent, size = _forest_union_find(s)
    indeg = s.in_degrees().copy()
    gamma = s.succ.copy()
    at_cap = int((indeg == 2).sum()) if small_regime else 0
    first_bad = None
    deg_ok = trees_ok = count_ok = True
    xs = s.missing()
    for h, v in enumerate(xs, start=1):
        u = int(o_k.gamma[v])
        gamma[v] = u
        indeg[u] += 1
        if small_regime and indeg[u] == 2:
            at_cap += 1
        a, b = _find(parent, v), _find(parent, u)
        bad = False
        if a == b:
            if size[a] < threshold:
                trees_ok = False
                bad = True
        else:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
        if indeg[u] > cap:
            deg_ok = False
            bad = True
        if small_regime and at_cap > h:
            count_ok = False
            bad = True
        if bad and first_bad is None:
            first_bad = h
    composite = Orientation(tuple(int(x) for x in gamma))
    if small_regime:
        target_k, target_s = 3, math.floor(n * _q(s.i) * (1 + eps))
    else:
        target_k, target_s = k, 0
    c = classify(g, composite, target_k, target_s, default_ell(n))
    good = Goodness(
        in_cap=cap,
        added=len(xs),
        first_bad_prefix=first_bad,
        in_degree_ok=deg_ok,
        small_components_are_trees=trees_ok,
        cap_count_ok=count_ok,
        classification={
            "k": target_k, "s": target_s, "ell": default_ell(n),
            "max_in_degree": c.max_in_degree, "at_cap": c.num_at_cap, "components": c.num_components,
        },
        accepted=c.accepted,
    )
    return composite, good


def red_forest_stage(g: Graph, o: Orientation, k: int, rng: np.random.Generator) -> StageForest:
    """Stage-1 forest for k >= 5: cycle breaks plus surplus deletion down to in-degree k-2."""
    from .forest import orientation_to_pruned_forest

    f = orientation_to_pruned_forest(g, o, k, "regular", rng)
    succ = np.asarray(o.gamma, dtype=np.int64).copy()
    for u, _v, _why in f.log:
        succ[u] = -1
    stage = np.where(succ >= 0, 1, 0).astype(np.int64)
    out = StageForest(g.n, succ, stage, 1, max(1, k - 2))
    out.validate(g)
    return out


@dataclass
class NibbleRun:
    k: int
    K: int
    seed: int
    eps: float
    graph_summary: dict[str, Any]
    stages: list[dict[str, Any]]
    goodness: dict[str, Any]
    all_successful: bool
    accepted: bool
    reference_constant: float | None
    tree: list[list[int]] | None = None
    tree_status: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"schema": SCHEMA, **asdict(self)}


def run_nibble(
    g: Graph,
    k: int,
    K: int | None = None,
    seed: int = 0,
    eps: float = DEFAULT_EPS,
    repair: bool = True,
) -> NibbleRun:
    """Run every stage with fresh seeded orientations, then the final stage.

    Stage c uses the generator ``trial_generator(seed, c, "nibble")``.  For
    k >= 5 the first stage is the pruned red forest instead of a nibble step.
    When the composite is accepted and ``repair`` is set, it is turned into a
    spanning tree with the forest-repair pipeline.
    """
    from .forest import orientation_to_pruned_forest
    from .repair import PreconditionError, RepairError, repair_to_spanning_tree
    from .counting import is_spanning_tree
    from .graph import is_connected

    if k < 3:
        raise ValueError("k >= 3 required")
    if g.regular_degree is None:
        raise ValueError("the staged construction needs a regular graph")
    K = default_stages(k) if K is None else K
    if K < 2:
        raise ValueError("at least two stages are needed")
    rows: list[dict[str, Any]] = []
    gens = [trial_generator(seed, c, "nibble") for c in range(1, K + 1)]
    if k in (3, 4):
        s = StageForest.empty(g.n)
        for c in range(1, K):
            o = sample_orientation(g, gens[c - 1])
            s, rep = nibble_step(g, s, o, gens[c - 1])
            chk = check_successful(s, g, eps)
            rows.append({**rep.to_dict(), "check": chk.to_dict()})
    else:
        o = sample_orientation(g, gens[0])
        s = red_forest_stage(g, o, k, gens[0])
        rows.append({"i": 1, "x_size": int((s.succ < 0).sum()), "red_forest": True})
    composite, good = final_stage_goodness(g, s, sample_orientation(g, gens[K - 1]), k, eps)
    ok_all = all(r.get("check", {}).get("passed", True) for r in rows)
    ref = regular_small_k_constant(K) if k in (3, 4) and K >= 5 else None
    run = NibbleRun(k, K, seed, eps, g.summary(), rows, good.to_dict(), ok_all, good.accepted, ref)
    if repair and good.accepted:
        strict = is_connected(g) and g.min_degree * (k + 1) >= g.n
        c = classify(g, composite, k, default_s(g.n, k), default_ell(g.n))
        if not c.in_H_ks:
            run.tree_status = "composite has too many vertices at in-degree k-1 for repair"
            return run
        try:
            f = orientation_to_pruned_forest(g, composite, k, "cycles")
            res = repair_to_spanning_tree(g, f, strict=strict)
            edges = res.tree.sorted_edges()
            if is_spanning_tree(g, edges, k):
                run.tree = [list(e) for e in edges]
                run.tree_status = "tree"
            else:
                run.tree_status = "output failed validation"
        except (RepairError, PreconditionError, ValueError) as exc:
            run.tree_status = f"repair failed: {exc}"
    return run
