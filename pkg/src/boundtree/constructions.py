"""Extremal constructions with no degree-k spanning tree, and the lower-bound constants."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Literal, Sequence

from .graph import Graph, GraphError, build_graph, complete_bipartite, components, geometric_mean_degree, is_connected

Variant = Literal["auto", "odd-general", "even-k"]
Regime = Literal["regular", "nearly-regular", "non-regular"]

# fixed by the staged argument for k = 3 and k = 4 (K = 20 and K = 5 stages)
Z_SMALL = {3: 0.0494, 4: 0.1527}


@dataclass(frozen=True)
class ConstantsTable:
    k: int
    f_k: float
    g_k: float
    z_k: float
    z_star_k: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def f_const(k: int) -> float:
    """1 - (1/e) * sum_{i<=k-3} 1/i!, summed as the tail (1/e) * sum_{i>=k-2} 1/i! for accuracy."""
    total = 0.0
    i = k - 2
    term = math.exp(-math.lgamma(i + 1))
    while term > 0 and term > total * 1e-18:
        total += term
        i += 1
        term /= i
    return total / math.e


def g_const(k: int) -> float:
    return 2.0 * math.exp(-1.0 - math.lgamma(k))


def z_const(k: int) -> float:
    if k in Z_SMALL:
        return Z_SMALL[k]
    f, g = f_const(k), g_const(k)
    base = 1 - (k + 1) * (f + g)
    return base ** g * (1 - g) ** (1 - g) * g ** g


def z_star_const(k: int) -> float:
    a = 1.0 / (7 * k)
    return (1 - a) ** (1 - a) * (1.0 / (9 * k)) ** a


def constants(k: int) -> ConstantsTable:
    if k < 3:
        raise ValueError("constants are defined for k >= 3")
    return ConstantsTable(k, f_const(k), g_const(k), z_const(k), z_star_const(k))


@dataclass(frozen=True)
class BoundReport:
    regime: str
    bound: float
    base: float  # r, or the geometric mean degree
    constant: float
    checks: dict[str, bool]
    note: str = "lower bound on c_k(G)^(1/n) up to a (1 - o(1)) factor"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class HypothesisError(ValueError):
    pass


def theorem_bound(n: int, r_or_degrees: int | Sequence[int] | Graph, k: int, regime: Regime = "regular") -> BoundReport:
    """Evaluate r * z_k (regular) or d(G)^(1/n) * z*_k (the two other regimes).

    The degree hypothesis of the regime is checked and a violation raises
    :class:`HypothesisError` naming the failed inequality.
    """
    if k < 3:
        raise ValueError("k >= 3 required")
    if isinstance(r_or_degrees, Graph):
        degs = list(r_or_degrees.degrees)
    elif isinstance(r_or_degrees, int):
        degs = [r_or_degrees] * n
    else:
        degs = [int(d) for d in r_or_degrees]
    if len(degs) != n or min(degs) < 1:
        raise ValueError("need n positive degrees")
    lo, hi = min(degs), max(degs)
    slack = 3 * math.sqrt(math.log(k) / k)
    if regime == "regular":
        checks = {"regular": lo == hi, "r >= n/(k+1)": lo * (k + 1) >= n}
        base, const = float(lo), z_const(k)
    elif regime == "nearly-regular":
        checks = {"min degree >= n/(k+1)": lo * (k + 1) >= n, "max degree <= n(1 - 3 sqrt(ln k / k))": hi <= n * (1 - slack)}
        base, const = math.exp(sum(math.log(d) for d in degs) / n), z_star_const(k)
    elif regime == "non-regular":
        checks = {"min degree >= (n/k)(1 + 3 sqrt(ln k / k))": lo >= n / k * (1 + slack)}
        base, const = math.exp(sum(math.log(d) for d in degs) / n), z_star_const(k)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise HypothesisError("hypothesis fails: " + ", ".join(failed))
    return BoundReport(regime, base * const, base, const, checks)


@dataclass(frozen=True)
class TightConstruction:
    graph: Graph
    k: int
    t: int
    witness: int
    variant: str

    @property
    def r(self) -> int:
        return self.graph.n // (self.k + 1) - 2


def _clique(offset: int, size: int) -> set[tuple[int, int]]:
    return {(offset + a, offset + b) for a in range(size) for b in range(a + 1, size)}


def tight_regular_construction(k: int, t: int, variant: Variant = "auto") -> TightConstruction:
    """Connected r-regular graph, r = floor(n/(k+1)) - 2, in which every spanning tree has a vertex of degree > k.

    Vertex ids: the k+1 cliques are laid out in order, v_{0,j} = j and, for
    i >= 1, v_{i,j} = |G_0| + (i-1) t + j, designated vertices first.  The
    odd-general variant (|G_0| = t) needs k odd so that the t-k-2 undesignated
    vertices of G_0 can be perfectly matched; the even-k variant
    (|G_0| = t+1) needs k even.
    """
    if k < 2:
        raise ValueError("k >= 2 required")
    if variant == "auto":
        variant = "even-k" if k % 2 == 0 else "odd-general"
    if t % 2 == 0:
        raise ValueError("t must be odd")
    if variant == "odd-general":
        if t < k + 4:
            raise ValueError(f"t = {t} < k + 4")
        if k % 2 == 0:
            raise ValueError("odd-general variant needs k odd (t-k-2 undesignated vertices must be matched)")
        size0 = t
    elif variant == "even-k":
        if k % 2:
            raise ValueError("even-k variant needs k even")
        if t < k + 5:
            raise ValueError(f"t = {t} < k + 5")
        size0 = t + 1
    else:
        raise ValueError(f"unknown variant {variant!r}")
    edges = _clique(0, size0)
    edges -= {(0, j) for j in range(1, size0 - (t - k - 2))}
    if variant == "odd-general":
        free = list(range(k + 2, t))
        edges -= {(free[a], free[a + 1]) for a in range(0, len(free), 2)}
    else:
        edges -= {(j, j + 1) for j in range(1, k + 3, 2)}
        ring = list(range(k + 3, t + 1))
        edges -= {tuple(sorted((ring[a], ring[(a + 1) % len(ring)]))) for a in range(len(ring))}
    for i in range(1, k + 1):
        off = size0 + (i - 1) * t
        block = _clique(off, t)
        block -= {(off, off + 1), (off, off + 2)}
        block -= {(off + j, off + j + 1) for j in range(3, t, 2)}
        edges |= block
        edges.add((0, off))
    n = size0 + k * t
    g = build_graph(n, sorted(edges))
    r = n // (k + 1) - 2
    if g.regular_degree != r or not is_connected(g):
        raise GraphError("construction failed its regularity or connectivity check")
    return TightConstruction(g, k, t, 0, variant)


def smallest_tight_t(k: int) -> int:
    """Smallest legal odd t for the variant matching the parity of k."""
    low = k + 5 if k % 2 == 0 else k + 4
    return low if low % 2 else low + 1


def no_bounded_tree_certificate(g: Graph, k: int) -> int | None:
    """Lowest vertex whose removal leaves at least k+1 components, if any.

    Such a vertex has degree >= k+1 in every spanning tree, so c_k(G) = 0.
    Absence of a witness proves nothing.
    """
    if not is_connected(g):
        raise GraphError("certificate needs a connected graph")
    for v in range(g.n):
        keep = [u for u in range(g.n) if u != v]
        idx = {u: i for i, u in enumerate(keep)}
        sub = build_graph(len(keep), [(idx[a], idx[b]) for a, b in g.edges if v not in (a, b)])
        if len(components(sub)) >= k + 1:
            return v
    return None


def bipartite_counterexample(n: int, k: int) -> Graph:
    """K_{a, n-a} with a = (n-2)/k: minimum degree above n/(k+1) yet no spanning tree of max degree k."""
    if k < 1 or n < 3:
        raise ValueError("need k >= 1 and n >= 3")
    if (n - 2) % k:
        raise ValueError(f"k = {k} does not divide n - 2 = {n - 2}")
    a = (n - 2) // k
    return complete_bipartite(a, n - a)


def bound_below_mean_degree(g: Graph, k: int, regime: Regime = "regular") -> bool:
    """Consistency: the bound never exceeds d(G)^(1/n)."""
    return theorem_bound(g.n, g, k, regime).bound <= geometric_mean_degree(g) + 1e-12
