"""Seeded Monte-Carlo and exhaustive estimation of orientation-class probabilities."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist
from typing import Any

import numpy as np

from .graph import Graph, degree_product
from .orientation import (
    StagePlan,
    batch_cycle_counts,
    batch_in_degrees,
    batch_orientations,
    default_ell,
    default_s,
    neighbor_table,
)
from .rng import trial_uniforms

SCHEMA = "boundtree.trial-report/1"
BLOCK = 4096


@dataclass
class TrialReport:
    graph_summary: dict[str, Any]
    k: int
    s: int
    ell: int
    trials: int
    seed: int
    estimate: float
    ci_low: float
    ci_high: float
    successes: int
    exact: float | None = None
    mean_components: float | None = None
    histograms: dict[str, dict[str, int]] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def to_dict(self) -> dict[str, Any]:
        return {"schema": SCHEMA, **asdict(self)}


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class _Tally:
    """Associative counters merged across trial chunks."""

    trials: int = 0
    successes: int = 0
    comp_sum: int = 0
    comp_sq: int = 0
    comp_hist: dict[int, int] = field(default_factory=dict)
    indeg_hist: dict[int, int] = field(default_factory=dict)

    def merge(self, other: _Tally) -> _Tally:
        self.trials += other.trials
        self.successes += other.successes
        self.comp_sum += other.comp_sum
        self.comp_sq += other.comp_sq
        for src, dst in ((other.comp_hist, self.comp_hist), (other.indeg_hist, self.indeg_hist)):
            for key, c in src.items():
                dst[key] = dst.get(key, 0) + c
        return self


def _accept(gam: np.ndarray, k: int, s: int, ell: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indeg = batch_in_degrees(gam)
    comps = batch_cycle_counts(gam)
    ok = (indeg.max(axis=1) <= k - 1) & ((indeg == k - 1).sum(axis=1) <= s) & (comps <= ell)
    return ok, comps, indeg


def _tally(gam: np.ndarray, k: int, s: int, ell: int) -> _Tally:
    ok, comps, indeg = _accept(gam, k, s, ell)
    t = _Tally(trials=len(gam), successes=int(ok.sum()))
    t.comp_sum = int(comps.sum())
    t.comp_sq = int((comps.astype(np.int64) ** 2).sum())
    vals, cnts = np.unique(comps, return_counts=True)
    t.comp_hist = {int(a): int(b) for a, b in zip(vals, cnts)}
    vals, cnts = np.unique(indeg, return_counts=True)
    t.indeg_hist = {int(a): int(b) for a, b in zip(vals, cnts)}
    return t


def sample_block(
    g: Graph, seed: int, start: int, stop: int, plan: StagePlan | None = None
) -> np.ndarray:
    """Orientations for trials ``start..stop-1`` as a ``(B, n)`` array.

    With a K-stage plan, lane c (c < K) drives stage c's orientation and lane K
    the per-vertex stage choice; the result is the composite.
    """
    table, deg = neighbor_table(g)
    trials = np.arange(start, stop)
    if plan is None or plan.K == 1:
        return batch_orientations(table, deg, trial_uniforms(seed, trials, 0, g.n))
    stages = np.stack(
        [batch_orientations(table, deg, trial_uniforms(seed, trials, c, g.n)) for c in range(plan.K)]
    )
    cum = np.cumsum(plan.probs)
    cum[-1] = 1.0
    pick = np.searchsorted(cum, trial_uniforms(seed, trials, plan.K, g.n), side="right")
    pick = np.minimum(pick, plan.K - 1)
    return np.take_along_axis(stages, pick[None, :, :], axis=0)[0]


def _run_chunk(args: tuple) -> _Tally:
    g, seed, start, stop, k, s, ell, plan = args
    tally = _Tally()
    for lo in range(start, stop, BLOCK):
        hi = min(stop, lo + BLOCK)
        tally.merge(_tally(sample_block(g, seed, lo, hi, plan), k, s, ell))
    return tally


def _run_trials(
    g: Graph, k: int, s: int, ell: int, trials: int, seed: int,
    plan: StagePlan | None, workers: int | None,
) -> _Tally:
    workers = workers or 1
    if workers <= 1 or trials <= BLOCK:
        return _run_chunk((g, seed, 0, trials, k, s, ell, plan))
    # chunk boundaries do not affect per-trial randomness
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(g, seed, int(a), int(b), k, s, ell, plan) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    total = _Tally()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, jobs):
            total.merge(part)
    return total


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def all_orientations_array(g: Graph, cap: int = 10**6) -> np.ndarray:
    """Every orientation of ``g`` as rows of a ``(d(G), n)`` array (mixed radix)."""
    total = degree_product(g)
    if total > cap:
        raise ValueError(f"d(G) = {total} exceeds the enumeration cap {cap}")
    table, deg = neighbor_table(g)
    codes = np.arange(total, dtype=np.int64)
    idx = np.empty((total, g.n), dtype=np.int64)
    for v in range(g.n - 1, -1, -1):
        idx[:, v] = codes % deg[v]
        codes //= deg[v]
    return table[np.arange(g.n)[None, :], idx]


def exact_P(g: Graph, k: int, s: int | None = None, ell: int | None = None, cap: int = 10**6) -> float:
    """P_{k,s,ell}(G) as an exact fraction of all d(G) orientations (returned as float)."""
    s = default_s(g.n, k) if s is None else s
    ell = default_ell(g.n) if ell is None else ell
    ok, _, _ = _accept(all_orientations_array(g, cap), k, s, ell)
    return int(ok.sum()) / degree_product(g)


def estimate_P(
    g: Graph,
    k: int,
    s: int | None = None,
    ell: int | None = None,
    trials: int = 10_000,
    seed: int = 0,
    plan: StagePlan | None = None,
    workers: int | None = 1,
    exact_cap: int = 0,
) -> TrialReport:
    """Monte-Carlo estimate of P_{k,s,ell}(G) with a Wilson 95% interval.

    Deterministic given (seed, trials), whatever ``workers`` is.  When
    d(G) <= ``exact_cap`` the exhaustive value is attached as ``exact``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    s = default_s(g.n, k) if s is None else s
    ell = default_ell(g.n) if ell is None else ell
    tally = _run_trials(g, k, s, ell, trials, seed, plan, workers)
    lo, hi = wilson_interval(tally.successes, tally.trials)
    exact = None
    if exact_cap and degree_product(g) <= exact_cap:
        exact = exact_P(g, k, s, ell, cap=exact_cap)
    return TrialReport(
        graph_summary=g.summary(),
        k=k, s=s, ell=ell, trials=trials, seed=seed,
        estimate=tally.successes / tally.trials,
        ci_low=lo, ci_high=hi,
        successes=tally.successes,
        exact=exact,
        mean_components=tally.comp_sum / tally.trials,
        histograms={
            "components": {str(a): b for a, b in sorted(tally.comp_hist.items())},
            "in_degree": {str(a): b for a, b in sorted(tally.indeg_hist.items())},
        },
        extra={"plan": list(plan.probs) if plan else None},
    )


def exact_mean_components(g: Graph, cap: int = 10**6) -> float:
    return float(batch_cycle_counts(all_orientations_array(g, cap)).mean())


def component_expectation_check(
    g: Graph, k: int, trials: int = 10_000, seed: int = 0, workers: int | None = 1, exact_cap: int = 0
) -> TrialReport:
    """Empirical mean number of components against the (k+1) ln n bound.

    Requires minimum degree >= n/(k+1); ``extra`` carries the bound, the
    standard error and whether the mean sits below the bound.
    """
    if g.min_degree * (k + 1) < g.n:
        raise ValueError(f"minimum degree {g.min_degree} is below n/(k+1) = {g.n / (k + 1):.3f}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    # vacuous class constraints: only the component statistics matter here
    tally = _run_trials(g, g.n + 1, g.n, g.n, trials, seed, None, workers)
    mean = tally.comp_sum / trials
    var = max(0.0, tally.comp_sq / trials - mean * mean)
    bound = (k + 1) * math.log(g.n)
    exact = exact_mean_components(g, exact_cap) if exact_cap and degree_product(g) <= exact_cap else None
    return TrialReport(
        graph_summary=g.summary(),
        k=k, s=g.n, ell=g.n, trials=trials, seed=seed,
        estimate=mean, ci_low=mean - 1.96 * math.sqrt(var / trials),
        ci_high=mean + 1.96 * math.sqrt(var / trials),
        successes=trials,
        exact=exact,
        mean_components=mean,
        histograms={"components": {str(a): b for a, b in sorted(tally.comp_hist.items())}},
        extra={"bound": bound, "stderr": math.sqrt(var / trials), "within_bound": mean <= bound},
    )


def in_degree_frequencies(
    g: Graph, trials: int, seed: int, max_i: int = 5
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial fraction of vertices with in-degree i, averaged over trials, with standard errors.

    Using per-trial fractions keeps the standard error honest despite the
    dependence between vertices within one orientation.
    """
    sums = np.zeros(max_i + 1)
    sq = np.zeros(max_i + 1)
    for lo in range(0, trials, BLOCK):
        hi = min(trials, lo + BLOCK)
        indeg = batch_in_degrees(sample_block(g, seed, lo, hi))
        frac = np.stack([(indeg == i).mean(axis=1) for i in range(max_i + 1)], axis=1)
        sums += frac.sum(axis=0)
        sq += (frac ** 2).sum(axis=0)
    mean = sums / trials
    var = np.maximum(sq / trials - mean ** 2, 0.0) * trials / max(trials - 1, 1)
    return mean, np.sqrt(var / trials)
