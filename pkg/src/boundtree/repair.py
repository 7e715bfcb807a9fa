"""Growing a degree-capped spanning forest into a degree-capped spanning tree.

One call of :func:`extend_forest_once` adds a net single edge while touching at
most four edges; :func:`repair_to_spanning_tree` iterates it under a budget on
the number of saturated (W) vertices.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

from .counting import is_spanning_tree
from .forest import BoundedForest, PruneMode, norm_edge, orientation_to_pruned_forest
from .graph import Edge, Graph, is_connected
from .orientation import (
    StagePlan,
    classify,
    default_ell,
    default_s,
    k_stage_sample,
    sample_orientation,
)
from .rng import trial_generator

STEP_BUDGET = 6.8  # W-vertices allowed per step: n / (STEP_BUDGET * k)
START_BUDGET = 7.0  # W-vertices allowed in the initial forest: n / (START_BUDGET * k)

_AFTER = {("c", "a"): "a-after-c", ("c", "b"): "b-after-c", ("d", "a"): "a-after-d",
          ("d", "b"): "b-after-d", ("d", "c"): "c-after-d"}


class PreconditionError(ValueError):
    """A hypothesis of the repair step does not hold; ``hypothesis`` names it."""

    def __init__(self, hypothesis: str, message: str):
        super().__init__(f"{hypothesis}: {message}")
        self.hypothesis = hypothesis


class RepairError(RuntimeError):
    """The repair could not be completed (only reachable when hypotheses fail)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class RepairReport:
    case_used: str
    chain: tuple[str, ...]
    edges_added: tuple[Edge, ...]
    edges_removed: tuple[Edge, ...]
    w_count_before: int
    w_count_after: int
    subcase: str | None = None
    l1_size: int | None = None
    l1_bound: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["chain"] = list(self.chain)
        d["edges_added"] = [list(e) for e in self.edges_added]
        d["edges_removed"] = [list(e) for e in self.edges_removed]
        return d


# -- mutable working forest -----------------------------------------------------


class _Work:
    def __init__(self, g: Graph, f: BoundedForest):
        self.g = g
        self.k = f.k
        self.n = f.n
        self.adj: list[set[int]] = [set(a) for a in f.adjacency]
        self.info: dict[str, Any] = {}

    def deg(self, v: int) -> int:
        return len(self.adj[v])

    def add(self, u: int, v: int) -> None:
        if not self.g.has_edge(u, v) or v in self.adj[u]:
            raise RepairError(f"cannot add edge {norm_edge(u, v)}")
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove(self, u: int, v: int) -> None:
        self.adj[u].remove(v)
        self.adj[v].remove(u)

    def edges(self) -> frozenset[Edge]:
        return frozenset((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def components(self, skip: frozenset[int] = frozenset(), within: set[int] | None = None) -> list[list[int]]:
        """Components of the forest restricted to ``within`` minus ``skip``, each sorted, ordered by min."""
        pool = range(self.n) if within is None else sorted(within)
        seen = set(skip)
        out = []
        for s in pool:
            if s in seen:
                continue
            seen.add(s)
            comp = [s]
            stack = [s]
            while stack:
                x = stack.pop()
                for y in self.adj[x]:
                    if y not in seen and (within is None or y in within):
                        seen.add(y)
                        comp.append(y)
                        stack.append(y)
            out.append(sorted(comp))
        return out

    def path(self, a: int, b: int) -> list[int]:
        prev = {a: a}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y in self.adj[x]:
                if y not in prev:
                    prev[y] = x
                    stack.append(y)
        if b not in prev:
            raise RepairError(f"{a} and {b} are not in the same tree")
        out = [b]
        while out[-1] != a:
            out.append(prev[out[-1]])
        return out[::-1]


def _smallest_branch(w: _Work, comp: list[int], centre: int) -> list[int]:
    """Smallest subtree of ``comp`` minus ``centre`` (ties: lowest min id)."""
    parts = w.components(skip=frozenset([centre]), within=set(comp))
    return min(parts, key=lambda p: (len(p), p[0]))


def _attach_point(w: _Work, centre: int, branch: list[int]) -> int:
    hits = sorted(set(branch) & w.adj[centre])
    if len(hits) != 1:
        raise RepairError("branch is not attached by a single edge")
    return hits[0]


# -- the four cases -------------------------------------------------------------


def _case_a(w: _Work, comp_of: list[int]) -> bool:
    k = w.k
    best = None
    for u, v in w.g.edges:
        du, dv = w.deg(u), w.deg(v)
        if comp_of[u] != comp_of[v] and du < k and dv < k:
            # prefer joins that create no new W-vertex, then lowest ids
            key = ((du + 1 == k) + (dv + 1 == k), u, v)
            if best is None or key < best:
                best = key
    if best is None:
        return False
    w.add(best[1], best[2])
    return True


def _case_b(w: _Work, comp: list[int], strict: bool) -> None:
    k, n = w.k, w.n
    inside = set(comp)
    for ui in comp:
        if w.deg(ui) > 1:
            continue
        outside = [x for x in w.g.neighbors(ui) if x not in inside]
        if len(outside) < 2:
            if strict:
                raise RepairError(f"vertex {ui} of a small component lacks two outside neighbours")
            continue
        if any(w.deg(x) < k for x in outside):
            raise RepairError("case (b) reached while an outside U-neighbour exists")
        for i, w1 in enumerate(outside):
            for w2 in outside[i + 1:]:
                if w2 in w.adj[w1]:
                    w.remove(w1, w2)
                    w.add(ui, w1)
                    w.add(ui, w2)
                    w.info["subcase"] = "adjacent"
                    return
        w1, w2 = outside[0], outside[1]
        region: set[int] = set()
        for c in w.components():
            if w1 in c or w2 in c:
                region.update(c)
        pieces = w.components(skip=frozenset([w1, w2]), within=region)
        pieces.sort(key=lambda p: (len(p), p[0]))
        bound = n / (2 * k - 1)
        if len(pieces) < 2 * k - 1:
            raise RepairError(f"removing {w1},{w2} left {len(pieces)} < 2k-1 pieces")
        if len(pieces[0]) > bound:
            raise RepairError(f"|L1| = {len(pieces[0])} exceeds n/(2k-1) = {bound:.3f}")
        w.info.update(subcase="independent", l1_size=len(pieces[0]), l1_bound=bound)
        for piece in pieces if not strict else pieces[:1]:
            members = set(piece)
            for u in piece:
                if w.deg(u) >= k:
                    continue
                for u2 in w.g.neighbors(u):
                    if u2 in members or w.deg(u2) >= k or u2 == ui:
                        continue
                    route = w.path(u, u2)
                    idx = next(j for j, x in enumerate(route) if x in (w1, w2))
                    hub, z = route[idx], route[idx - 1]
                    w.add(u, u2)
                    w.remove(hub, z)
                    w.add(ui, hub)
                    if piece is not pieces[0]:
                        w.info.update(l1_size=len(piece))
                    return
        if strict:
            raise RepairError(f"no U-vertex of L1 has an outside U-neighbour (u_i = {ui})")
    raise RepairError("case (b): no candidate vertex could be rewired")


def _case_c(w: _Work, comp_of: list[int], comps: list[list[int]]) -> bool:
    k = w.k
    for ui in range(w.n):
        if w.deg(ui) >= k:
            continue
        for wj in w.g.neighbors(ui):
            if comp_of[wj] == comp_of[ui]:
                continue
            branch = _smallest_branch(w, comps[comp_of[wj]], wj)
            x = _attach_point(w, wj, branch)
            w.add(ui, wj)
            w.remove(wj, x)
            return True
    return False


def _case_d(w: _Work, comp_of: list[int], comps: list[list[int]], strict: bool) -> bool:
    n, k = w.n, w.k
    for a, b in w.g.edges:
        if comp_of[a] == comp_of[b]:
            continue
        wj = a if (len(comps[comp_of[a]]), a) <= (len(comps[comp_of[b]]), b) else b
        tree = comps[comp_of[wj]]
        if 2 * len(tree) > n:
            raise RepairError("both components of a crossing edge exceed n/2")
        branch = _smallest_branch(w, tree, wj)
        x = _attach_point(w, wj, branch)
        members = set(branch)
        leaves = [u for u in branch if w.deg(u) == 1]
        others = [u for u in branch if 1 < w.deg(u) < k] if not strict else []
        for u in leaves + others:
            for u2 in w.g.neighbors(u):
                if u2 not in members and w.deg(u2) < k and u2 != wj:
                    if comp_of[u2] != comp_of[wj]:
                        raise RepairError("case (d) reached while a U-U crossing edge exists")
                    w.add(u, u2)
                    w.remove(wj, x)
                    return True
        raise RepairError(f"case (d): no vertex of the branch at {wj} has an outside U-neighbour")
    return False


def _dispatch(w: _Work, strict: bool, allowed: str = "abcd", depth: int = 0) -> list[str]:
    if depth > 2:
        raise RepairError("repair recursion deeper than two exchanges")
    comps = w.components()
    comp_of = [0] * w.n
    for i, c in enumerate(comps):
        for v in c:
            comp_of[v] = i
    if len(comps) == 1:
        raise RepairError("forest is already spanning")
    if _case_a(w, comp_of):
        label = "a"
    else:
        small = [c for c in comps if len(c) * (w.k + 1) < w.n]
        if small:
            _case_b(w, small[0], strict)
            label = "b"
        elif _case_c(w, comp_of, comps):
            return _check_allowed("c", allowed) + _dispatch(w, strict, "ab", depth + 1)
        elif _case_d(w, comp_of, comps, strict):
            return _check_allowed("d", allowed) + _dispatch(w, strict, "abc", depth + 1)
        else:
            raise RepairError("no edge of G joins two components; G is disconnected")
    return _check_allowed(label, allowed)


def _check_allowed(label: str, allowed: str) -> list[str]:
    if label not in allowed:
        raise RepairError(f"case ({label}) arose where only ({'/'.join(allowed)}) may follow")
    return [label]


# -- public operations ----------------------------------------------------------


def check_step_hypotheses(g: Graph, f: BoundedForest) -> None:
    """Raise :class:`PreconditionError` unless (G, F) satisfies the repair-step hypotheses."""
    n, k = g.n, f.k
    if k < 3:
        raise PreconditionError("k", f"k >= 3 required, got {k}")
    if f.n != n or not f.is_subgraph_of(g):
        raise PreconditionError("not spanning", "F is not a spanning subgraph of G")
    if not is_connected(g):
        raise PreconditionError("connected", "G is not connected")
    if g.min_degree * (k + 1) < n:
        raise PreconditionError("degree", f"minimum degree {g.min_degree} < n/(k+1) = {n / (k + 1):.3f}")
    if f.m >= n - 1:
        raise PreconditionError("edges", "F already has n-1 edges")
    if f.w_count * STEP_BUDGET * k > n:
        raise PreconditionError(
            "w_count budget", f"{f.w_count} W-vertices exceed n/({STEP_BUDGET}k) = {n / (STEP_BUDGET * k):.3f}"
        )


def extend_forest_once(g: Graph, f: BoundedForest, strict: bool = True) -> tuple[BoundedForest, RepairReport]:
    """One repair step: a forest with one more edge, at most k per vertex.

    The first case whose guard holds is used, in the order (a) join two
    U-vertices, (b) rewire around a small component, (c) and (d) one exchange
    followed by a re-dispatch.  With ``strict`` the hypotheses are checked up
    front and the conclusions asserted afterwards; without it the same moves
    are attempted (with a wider search) and any dead end raises RepairError.
    """
    if strict:
        check_step_hypotheses(g, f)
    elif f.k < 3:
        raise PreconditionError("k", f"k >= 3 required, got {f.k}")
    w = _Work(g, f)
    chain = tuple(_dispatch(w, strict))
    new_edges = w.edges()
    try:
        out = BoundedForest(f.n, f.k, new_edges)
    except ValueError as exc:
        raise RepairError(f"repair produced an invalid forest: {exc}") from exc
    added = tuple(sorted(new_edges - f.edges))
    removed = tuple(sorted(f.edges - new_edges))
    label = chain[0] if len(chain) == 1 else _AFTER[chain[0], chain[1]]
    report = RepairReport(
        case_used=label,
        chain=chain,
        edges_added=added,
        edges_removed=removed,
        w_count_before=f.w_count,
        w_count_after=out.w_count,
        subcase=w.info.get("subcase"),
        l1_size=w.info.get("l1_size"),
        l1_bound=w.info.get("l1_bound"),
    )
    if strict:
        problems = step_violations(f, out, report)
        if problems:
            raise RepairError("postcondition failed: " + "; ".join(problems))
    return out, report


def step_violations(before: BoundedForest, after: BoundedForest, report: RepairReport) -> list[str]:
    """The repair-step conclusions that ``after`` fails (empty when all hold)."""
    out = []
    if after.m != before.m + 1:
        out.append(f"edge count {after.m} != {before.m + 1}")
    if len(before.edges & after.edges) < before.m - 3:
        out.append("kept fewer than m-3 edges of F")
    if after.max_degree > after.k:
        out.append(f"max degree {after.max_degree} > k")
    if after.w_count > before.w_count + 4:
        out.append(f"W-vertices grew from {before.w_count} to {after.w_count}")
    if report.l1_size is not None and report.l1_bound is not None and report.l1_size > report.l1_bound:
        out.append(f"|L1| = {report.l1_size} > n/(2k-1)")
    return out


def default_edge_slack(k: int) -> float:
    """Default c in the allowance of n - c ln n initial edges."""
    return 50.0 * (k + 1)


@dataclass
class RepairResult:
    tree: BoundedForest
    trail: list[RepairReport]
    added_total: int
    removed_total: int

    @property
    def steps(self) -> int:
        return len(self.trail)


def repair_to_spanning_tree(
    g: Graph, f: BoundedForest, c: float | None = None, strict: bool = True
) -> RepairResult:
    """Iterate :func:`extend_forest_once` until the forest spans.

    Strict mode checks the starting hypotheses (at most n/(7k) W-vertices and at
    least n - c ln n edges) and, before every step, that the W-count is still
    within n/(6.8k); an overflow raises RepairError carrying the step index.
    """
    n, k = g.n, f.k
    if k < 3:
        raise PreconditionError("k", f"k >= 3 required, got {k}")
    if f.m == n - 1:
        return RepairResult(f, [], 0, 0)
    if strict:
        c = default_edge_slack(k) if c is None else c
        if f.m < n - c * math.log(n):
            raise PreconditionError("edges", f"F has {f.m} edges, fewer than n - {c} ln n")
        if f.w_count * START_BUDGET * k > n:
            raise PreconditionError(
                "w_count budget", f"{f.w_count} W-vertices exceed n/({START_BUDGET}k) = {n / (START_BUDGET * k):.3f}"
            )
    trail: list[RepairReport] = []
    cur = f
    while cur.m < n - 1:
        step = len(trail)
        if strict and cur.w_count * STEP_BUDGET * k > n:
            raise RepairError(
                f"W-count {cur.w_count} exceeds the step budget n/({STEP_BUDGET}k) = {n / (STEP_BUDGET * k):.3f}",
                step,
            )
        try:
            cur, rep = extend_forest_once(g, cur, strict)
        except RepairError as exc:
            raise RepairError(str(exc), step) from exc
        trail.append(rep)
    added = len(cur.edges - f.edges)
    removed = len(f.edges - cur.edges)
    if added > 4 * len(trail):
        raise RepairError(f"{added} new edges after {len(trail)} steps")
    return RepairResult(cur, trail, added, removed)


# -- orientation -> tree pipeline -------------------------------------------------


def tree_hash(edges) -> str:
    """Canonical sha256 of a sorted edge list."""
    text = ";".join(f"{u}-{v}" for u, v in sorted(norm_edge(a, b) for a, b in edges))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class PipelineResult:
    status: str  # "tree", "rejected" or "repair_failed"
    reason: str | None = None
    tree: tuple[Edge, ...] | None = None
    steps: int = 0
    hypotheses_hold: bool = True
    classification: dict[str, Any] = field(default_factory=dict)


def pipeline_generate(
    g: Graph,
    k: int,
    plan: StagePlan | None = None,
    seed: int = 0,
    trial: int = 0,
    mode: PruneMode = "cycles",
    s: int | None = None,
    ell: int | None = None,
) -> PipelineResult:
    """Sample an orientation and, when it lies in the accepted class, turn it into a tree.

    The forest keeps every orientation arc except one per directed cycle, so the
    W-vertices are exactly the vertices of in-degree k-1.  When the graph fails
    the connectivity or minimum-degree hypothesis the repair is still attempted
    without the budget checks; every emitted tree is validated independently.
    """
    if k < 3:
        return PipelineResult("rejected", "k >= 3 required")
    s = default_s(g.n, k) if s is None else s
    ell = default_ell(g.n) if ell is None else ell
    rng = trial_generator(seed, trial, "pipeline")
    if plan is None or plan.K == 1:
        o = sample_orientation(g, rng)
    else:
        o = k_stage_sample(g, plan, rng)[0]
    cls = classify(g, o, k, s, ell)
    summary = {"max_in_degree": cls.max_in_degree, "at_cap": cls.num_at_cap, "components": cls.num_components}
    if not cls.in_H_ks:
        why = "in-degree above k-1" if cls.max_in_degree > k - 1 else f"more than s={s} vertices at in-degree k-1"
        return PipelineResult("rejected", why, classification=summary)
    if not cls.in_H_star_ell:
        return PipelineResult("rejected", f"more than ell={ell} components", classification=summary)
    hold = is_connected(g) and g.min_degree * (k + 1) >= g.n
    try:
        forest = orientation_to_pruned_forest(g, o, k, mode, rng)
        res = repair_to_spanning_tree(g, forest, strict=hold)
    except (RepairError, PreconditionError, ValueError) as exc:
        return PipelineResult("repair_failed", str(exc), hypotheses_hold=hold, classification=summary)
    edges = tuple(res.tree.sorted_edges())
    if not is_spanning_tree(g, edges, k):
        return PipelineResult("repair_failed", "output failed validation", hypotheses_hold=hold, classification=summary)
    return PipelineResult("tree", None, edges, res.steps, hold, summary)


@dataclass
class GenerateSummary:
    runs: int
    trees: int
    rejected: int
    repair_failed: int
    distinct: int
    reasons: dict[str, int]
    hashes: list[str]
    max_steps: int

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _pipeline_chunk(args: tuple) -> list[PipelineResult]:
    g, k, plan, seed, lo, hi, mode, s, ell = args
    return [pipeline_generate(g, k, plan, seed, t, mode, s, ell) for t in range(lo, hi)]


def generate_many(
    g: Graph,
    k: int,
    runs: int,
    seed: int = 0,
    plan: StagePlan | None = None,
    mode: PruneMode = "cycles",
    s: int | None = None,
    ell: int | None = None,
    workers: int | None = 1,
) -> tuple[GenerateSummary, list[tuple[Edge, ...]]]:
    """Run the pipeline for trials 0..runs-1 and deduplicate the trees by hash.

    Trial t depends only on (seed, t), so the summary is the same for any
    number of workers.
    """
    workers = max(1, workers or 1)
    bounds = [round(runs * j / workers) for j in range(workers + 1)]
    jobs = [(g, k, plan, seed, a, b, mode, s, ell) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers == 1 or len(jobs) <= 1:
        results = [r for job in jobs for r in _pipeline_chunk(job)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_pipeline_chunk, jobs) for r in part]
    reasons: Counter[str] = Counter()
    seen: dict[str, tuple[Edge, ...]] = {}
    trees = rejected = failed = max_steps = 0
    for r in results:
        if r.status == "tree":
            trees += 1
            max_steps = max(max_steps, r.steps)
            seen.setdefault(tree_hash(r.tree), r.tree)
        else:
            rejected += r.status == "rejected"
            failed += r.status == "repair_failed"
            reasons[f"{r.status}: {r.reason}"] += 1
    hashes = sorted(seen)
    summary = GenerateSummary(runs, trees, rejected, failed, len(seen), dict(sorted(reasons.items())), hashes, max_steps)
    return summary, [seen[h] for h in hashes]
