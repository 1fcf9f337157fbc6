"""Local-neighborhood statistics: canonical codes of colored balls, the
dicolored-class fraction, empirical local coloring distributions, TV
distances against the standalone-forest measure, replica covariances, and
reconstruction correlations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codes import LocalCode, encode_rooted
from .colorings import GibbsAverage, UniformColoringSampler, enumerate_colorings
from .config import resolve_budget
from .errors import CapacityError, DomainError, ParameterError
from .graphs import Graph, RootedBall, ball, connected_components, pairwise_ball_disjoint
from .replicas import DicoloredGraph
from .trees import (
    RootedColoredTree,
    _enumerate_tree_colorings,
    broadcast_colors,
    sample_gw_tree,
    tree_count_colorings,
)

__all__ = [
    "LocalDistribution",
    "TvResult",
    "canonical_code",
    "dicolored_ball_classes",
    "q_statistic",
    "empirical_local_distribution",
    "tv_local_vs_uniform",
    "replica_local_covariance",
    "product_statistic",
    "reconstruction_corr_graph",
    "reconstruction_corr_tree",
    "reconstruction_corr_fixed_tree",
    "local_distribution_to_json",
]


def _restrict(coloring, vertices) -> dict[int, int]:
    if isinstance(coloring, dict):
        return {v: int(coloring[v]) for v in vertices}
    arr = np.asarray(coloring)
    return {v: int(arr[v]) for v in vertices}


def canonical_code(obj, colorings=(), validate: bool = True) -> LocalCode:
    """Canonical code of a RootedBall or RootedColoredTree with 0-2 colorings.

    Ball colorings index by original graph vertex ids; tree colorings by
    tree indices.  A tree attaching its own colors needs no ``colorings``.
    """
    if isinstance(obj, RootedColoredTree):
        adj = obj.adjacency()
        root = 0
        cols = [_restrict(c, range(obj.size)) for c in (colorings or obj.colorings())]
    elif isinstance(obj, RootedBall):
        adj = obj.adjacency()
        root = obj.root
        cols = [_restrict(c, obj.vertices) for c in colorings]
    else:
        raise ParameterError(f"cannot encode {type(obj).__name__}")
    if validate:
        for col in cols:
            for u, nbrs in adj.items():
                for w in nbrs:
                    if col[u] == col[w]:
                        raise ParameterError(f"coloring is improper on edge ({u},{w})")
    return encode_rooted(adj, root, cols)


def dicolored_ball_classes(dg: DicoloredGraph, omega: int) -> dict[tuple[bytes, bytes], int]:
    """Count vertices by the pair of canonical codes of their omega-ball
    colored by sigma1 and by sigma2.  Counts sum to n."""
    g = dg.graph
    out: dict[tuple[bytes, bytes], int] = {}
    for v in range(g.n):
        b = ball(g, v, omega)
        c1 = canonical_code(b, (dg.sigma1,), validate=False).data
        c2 = canonical_code(b, (dg.sigma2,), validate=False).data
        out[(c1, c2)] = out.get((c1, c2), 0) + 1
    return out


def q_statistic(dg: DicoloredGraph, theta: RootedColoredTree, tau1, tau2,
                omega: int) -> float:
    """Fraction of vertices whose omega-ball, dicolored by (sigma1, sigma2),
    is isomorphic to theta colored by (tau1, tau2)."""
    for tau in (tau1, tau2):
        if not theta.is_proper_coloring(tau):
            raise ParameterError("tau must be proper on theta")
    t1 = canonical_code(theta, (tau1,), validate=False).data
    t2 = canonical_code(theta, (tau2,), validate=False).data
    classes = dicolored_ball_classes(dg, omega)
    return classes.get((t1, t2), 0) / dg.graph.n


@dataclass(frozen=True)
class LocalDistribution:
    """Joint law of the colored-ball code tuple at l roots; probabilities
    are exact rationals (empirical frequencies in mc mode)."""

    support: dict[tuple[bytes, ...], Fraction]
    arity: int
    exact: bool

    def total(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))

    def marginal(self, i: int) -> dict[bytes, Fraction]:
        out: dict[bytes, Fraction] = {}
        for key, mass in self.support.items():
            out[key[i]] = out.get(key[i], Fraction(0)) + mass
        return out


def local_distribution_to_json(dist: LocalDistribution) -> dict:
    support = {
        ":".join(code.hex() for code in key): f"{m.numerator}/{m.denominator}"
        for key, m in sorted(dist.support.items())
    }
    return {"arity": dist.arity, "exact": dist.exact, "support": support}


def _induced_subgraph(g: Graph, vertices: tuple[int, ...]) -> tuple[Graph, dict[int, int]]:
    pos = {v: i for i, v in enumerate(vertices)}
    edges = tuple((pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos)
    return Graph(len(vertices), edges), pos


def _full_ball(g: Graph, v: int, omega: int | None) -> RootedBall:
    return ball(g, v, g.n if omega is None else omega)


def empirical_local_distribution(g: Graph, roots, omega: int | None, k: int,
                                 mode: str = "exact", samples: int = 1000,
                                 rng: np.random.Generator | None = None,
                                 budget: int | None = None) -> LocalDistribution:
    """Joint distribution over l-tuples of colored ball codes under a uniform
    proper coloring of g.  ``omega=None`` uses the full component.

    Exact mode enumerates colorings component by component and assembles the
    product, so disconnected roots factorize exactly.
    """
    roots = list(roots)
    l = len(roots)
    if l == 0:
        raise ParameterError("need at least one root")
    balls = [_full_ball(g, r, omega) for r in roots]
    if mode == "mc":
        if rng is None:
            raise ParameterError("mc mode needs an rng")
        sampler = UniformColoringSampler(g, k, budget=budget)
        counts: dict[tuple[bytes, ...], int] = {}
        for _ in range(samples):
            sigma = sampler.sample(rng)
            key = tuple(canonical_code(b, (sigma,), validate=False).data for b in balls)
            counts[key] = counts.get(key, 0) + 1
        support = {key: Fraction(c, samples) for key, c in counts.items()}
        return LocalDistribution(support, l, False)
    if mode != "exact":
        raise ParameterError(f"unknown mode {mode!r}")

    bound = resolve_budget(budget)
    comps = connected_components(g)
    comp_of = {v: ci for ci, comp in enumerate(comps) for v in comp}
    by_comp: dict[int, list[int]] = {}
    for i, r in enumerate(roots):
        by_comp.setdefault(comp_of[r], []).append(i)

    parts: list[tuple[list[int], dict[tuple[bytes, ...], Fraction]]] = []
    for ci in sorted(by_comp):
        idxs = by_comp[ci]
        sub, pos = _induced_subgraph(g, comps[ci])
        inv = {i: v for v, i in pos.items()}
        dist: dict[tuple[bytes, ...], int] = {}
        z = 0
        for colors in enumerate_colorings(sub, k, budget=bound):
            z += 1
            full = {inv[i]: int(c) for i, c in enumerate(colors)}
            key = tuple(
                canonical_code(balls[i], (full,), validate=False).data for i in idxs
            )
            dist[key] = dist.get(key, 0) + 1
        if z == 0:
            raise DomainError(f"component {comps[ci]} has no proper {k}-coloring")
        parts.append((idxs, {key: Fraction(c, z) for key, c in dist.items()}))

    support: dict[tuple[bytes, ...], Fraction] = {}
    for combo in itertools.product(*(part[1].items() for part in parts)):
        mass = Fraction(1)
        slots: list[bytes | None] = [None] * l
        for (idxs, _), (key, part_mass) in zip(parts, combo):
            mass *= part_mass
            for i, code in zip(idxs, key):
                slots[i] = code
        if len(support) > bound:
            raise CapacityError("local distribution support exceeds budget", bound=bound)
        full_key = tuple(slots)  # type: ignore[arg-type]
        support[full_key] = support.get(full_key, Fraction(0)) + mass
    return LocalDistribution(support, l, True)


@dataclass(frozen=True)
class TvResult:
    """TV distance between the Gibbs projection onto a ball union and the
    uniform measure on the union as a standalone graph.  Intersecting balls
    or a cyclic union are flagged, not errors."""

    tv: float
    tv_exact: Fraction
    balls_disjoint: bool
    union_is_forest: bool


def tv_local_vs_uniform(g: Graph, roots, omega: int, k: int,
                        budget: int | None = None) -> TvResult:
    roots = list(roots)
    bound = resolve_budget(budget)
    balls = [ball(g, r, omega) for r in roots]
    disjoint = pairwise_ball_disjoint(g, roots, omega)
    union_vertices = tuple(sorted(set().union(*(b.vertices for b in balls))))
    union_edges = sorted(set().union(*(set(b.edges) for b in balls)))
    pos = {v: i for i, v in enumerate(union_vertices)}
    union_graph = Graph(len(union_vertices), tuple((pos[u], pos[v]) for u, v in union_edges))
    n_union_comps = len(connected_components(union_graph))
    union_forest = union_graph.m == union_graph.n - n_union_comps

    # uniform measure on proper colorings of the union, keyed by the color
    # tuple over union vertices in sorted order
    q_support: dict[tuple[int, ...], Fraction] = {}
    zq = 0
    q_keys = []
    for colors in enumerate_colorings(union_graph, k, budget=bound):
        zq += 1
        q_keys.append(tuple(int(c) for c in colors))
    if zq == 0:
        raise DomainError(f"ball union has no proper {k}-coloring")
    for key in q_keys:
        q_support[key] = Fraction(1, zq)

    # projection of the Gibbs measure of g onto the union vertices,
    # assembled as a product over the components of g that meet the union
    comps = connected_components(g)
    touched = [comp for comp in comps if set(comp) & set(union_vertices)]
    parts = []
    for comp in touched:
        sub, cpos = _induced_subgraph(g, comp)
        inv = {i: v for v, i in cpos.items()}
        local_positions = [pos[v] for v in comp if v in pos]
        local_sub_idx = [cpos[v] for v in comp if v in pos]
        counts: dict[tuple[int, ...], int] = {}
        z = 0
        for colors in enumerate_colorings(sub, k, budget=bound):
            z += 1
            key = tuple(int(colors[i]) for i in local_sub_idx)
            counts[key] = counts.get(key, 0) + 1
        if z == 0:
            raise DomainError(f"component {comp} has no proper {k}-coloring")
        parts.append((local_positions, {key: Fraction(c, z) for key, c in counts.items()}))

    p_support: dict[tuple[int, ...], Fraction] = {}
    for combo in itertools.product(*(part[1].items() for part in parts)):
        mass = Fraction(1)
        slots = [0] * len(union_vertices)
        for (positions, _), (key, part_mass) in zip(parts, combo):
            mass *= part_mass
            for p_i, c in zip(positions, key):
                slots[p_i] = c
        if len(p_support) > bound:
            raise CapacityError("projection support exceeds budget", bound=bound)
        tup = tuple(slots)
        p_support[tup] = p_support.get(tup, Fraction(0)) + mass

    tv = Fraction(0)
    for key in set(q_support) | set(p_support):
        tv += abs(p_support.get(key, Fraction(0)) - q_support.get(key, Fraction(0)))
    tv /= 2
    return TvResult(float(tv), tv, disjoint, union_forest)


def replica_local_covariance(g: Graph, theta: RootedColoredTree, tau, omega: int,
                             k: int, mode: str = "exact", samples: int = 1000,
                             rng: np.random.Generator | None = None,
                             budget: int | None = None) -> GibbsAverage:
    """(1/n) sum over vertices with ball shape theta of the replica covariance
    <(t(S1) - 1/Z)(t(S2) - 1/Z)>, t = indicator of the colored-ball class
    (theta, tau).  With independent replicas this equals the squared bias
    (<t> - 1/Z)^2, which is what exact mode computes."""
    if not theta.is_proper_coloring(tau):
        raise ParameterError("tau must be proper on theta")
    bound = resolve_budget(budget)
    shape_code = canonical_code(theta.with_colors()).data
    target = canonical_code(theta, (tau,), validate=False).data
    z = Fraction(1, tree_count_colorings(theta, k))
    balls = [ball(g, v, omega) for v in range(g.n)]
    matching = [v for v in range(g.n) if canonical_code(balls[v]).data == shape_code]
    if mode == "exact":
        comps = connected_components(g)
        comp_of = {v: ci for ci, comp in enumerate(comps) for v in comp}
        total = Fraction(0)
        by_comp: dict[int, list[int]] = {}
        for v in matching:
            by_comp.setdefault(comp_of[v], []).append(v)
        for ci, verts in sorted(by_comp.items()):
            sub, cpos = _induced_subgraph(g, comps[ci])
            inv = {i: v for v, i in cpos.items()}
            hits = {v: 0 for v in verts}
            zc = 0
            for colors in enumerate_colorings(sub, k, budget=bound):
                zc += 1
                full = {inv[i]: int(c) for i, c in enumerate(colors)}
                for v in verts:
                    if canonical_code(balls[v], (full,), validate=False).data == target:
                        hits[v] += 1
            if zc == 0:
                raise DomainError(f"component {comps[ci]} has no proper {k}-coloring")
            for v in verts:
                total += (Fraction(hits[v], zc) - z) ** 2
        return GibbsAverage(float(total / g.n), 0.0, 1, True)
    if mode == "mc":
        if rng is None:
            raise ParameterError("mc mode needs an rng")
        sampler = UniformColoringSampler(g, k, budget=bound)
        vals = np.empty(samples)
        zf = float(z)
        for s in range(samples):
            s1 = sampler.sample(rng)
            s2 = sampler.sample(rng)
            acc = 0.0
            for v in matching:
                t1 = canonical_code(balls[v], (s1,), validate=False).data == target
                t2 = canonical_code(balls[v], (s2,), validate=False).data == target
                acc += (t1 - zf) * (t2 - zf)
            vals[s] = acc / g.n
        stderr = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("inf")
        return GibbsAverage(float(vals.mean()), stderr, samples, False)
    raise ParameterError(f"unknown mode {mode!r}")


def product_statistic(g: Graph, shapes, omega: int, k: int, samples: int = 400,
                      rng: np.random.Generator | None = None, mode: str = "mc",
                      budget: int | None = None) -> GibbsAverage:
    """Estimate of n^-l sum over root tuples of <prod_i 1{ball(v_i) colored by
    Sigma matches (theta_i, tau_i)}>; the sum over tuples factorizes into a
    product of per-shape match counts for each coloring."""
    targets = []
    for theta, tau in shapes:
        if not theta.is_proper_coloring(tau):
            raise ParameterError("tau must be proper on theta")
        targets.append(canonical_code(theta, (tau,), validate=False).data)
    l = len(targets)
    if l == 0:
        raise ParameterError("need at least one shape")
    balls = [ball(g, v, omega) for v in range(g.n)]
    nf = float(g.n)

    def tuple_product(sigma) -> float:
        codes = [canonical_code(b, (sigma,), validate=False).data for b in balls]
        out = 1.0
        for t in targets:
            out *= sum(1 for c in codes if c == t) / nf
        return out

    if mode == "exact":
        bound = resolve_budget(budget)
        vals = [tuple_product(sigma) for sigma in enumerate_colorings(g, k, budget=bound)]
        if not vals:
            raise DomainError(f"graph has no proper {k}-coloring")
        return GibbsAverage(float(np.mean(vals)), 0.0, len(vals), True)
    if mode == "mc":
        if rng is None:
            raise ParameterError("mc mode needs an rng")
        sampler = UniformColoringSampler(g, k, budget=budget)
        vals = np.empty(samples)
        for s in range(samples):
            vals[s] = tuple_product(sampler.sample(rng))
        stderr = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("inf")
        return GibbsAverage(float(vals.mean()), stderr, samples, False)
    raise ParameterError(f"unknown mode {mode!r}")


def _bias_from_counts(counts: dict[int, int], k: int) -> Fraction:
    total = sum(counts.values())
    bias = Fraction(0)
    for i in range(1, k + 1):
        bias += abs(Fraction(counts.get(i, 0), total) - Fraction(1, k))
    return bias / 2


def reconstruction_corr_graph(g: Graph, v: int, omega: int, k: int,
                              mode: str = "exact", samples: int = 200,
                              rng: np.random.Generator | None = None,
                              budget: int | None = None) -> float:
    """Average over boundary conditions sigma_0 of the bias that fixing
    sigma_0 outside the (omega-1)-ball of v induces on the color of v."""
    if omega < 1:
        raise ParameterError(f"omega must be >= 1, got {omega}")
    if not (0 <= v < g.n):
        raise ParameterError(f"vertex {v} out of range")
    bound = resolve_budget(budget)
    comp = next(c for c in connected_components(g) if v in c)
    free = set(ball(g, v, omega - 1).vertices)
    fixed = [u for u in comp if u not in free]
    sub, cpos = _induced_subgraph(g, comp)
    vi = cpos[v]
    fixed_idx = [cpos[u] for u in fixed]
    if mode == "exact":
        groups: dict[tuple[int, ...], dict[int, int]] = {}
        z = 0
        for colors in enumerate_colorings(sub, k, budget=bound):
            z += 1
            key = tuple(int(colors[i]) for i in fixed_idx)
            marg = groups.setdefault(key, {})
            c = int(colors[vi])
            marg[c] = marg.get(c, 0) + 1
        if z == 0:
            raise DomainError(f"component is not {k}-colorable")
        total = Fraction(0)
        for marg in groups.values():
            size = sum(marg.values())
            total += Fraction(size, z) * _bias_from_counts(marg, k)
        return float(total)
    if mode == "mc":
        if rng is None:
            raise ParameterError("mc mode needs an rng")
        sampler = UniformColoringSampler(g, k, budget=bound)
        vals = np.empty(samples)
        free_idx = [cpos[u] for u in sorted(free)]
        for s in range(samples):
            sigma0 = sampler.sample(rng)
            fixed_colors = {cpos[u]: int(sigma0[u]) for u in fixed}
            counts = _constrained_marginal(sub, free_idx, fixed_colors, vi, k, bound)
            vals[s] = float(_bias_from_counts(counts, k))
        return float(vals.mean())
    raise ParameterError(f"unknown mode {mode!r}")


def _constrained_marginal(sub: Graph, free_idx: list[int], fixed_colors: dict[int, int],
                          v: int, k: int, bound: int) -> dict[int, int]:
    """Color counts of v over proper colorings of the free region given the
    fixed boundary colors, by backtracking."""
    order = free_idx
    pos = {u: i for i, u in enumerate(order)}
    forbidden = [set() for _ in order]
    earlier = [[] for _ in order]
    for i, u in enumerate(order):
        for w in sub.neighbors(u):
            if w in fixed_colors:
                forbidden[i].add(fixed_colors[w])
            elif w in pos and pos[w] < i:
                earlier[i].append(pos[w])
    counts: dict[int, int] = {}
    assign = [0] * len(order)
    tried = 0
    i, c = 0, 1
    vpos = pos[v]
    while True:
        if c > k:
            i -= 1
            if i < 0:
                break
            c = assign[i] + 1
            continue
        tried += 1
        if tried > bound:
            raise CapacityError("constrained enumeration exceeded budget", bound=bound)
        if c in forbidden[i] or any(assign[j] == c for j in earlier[i]):
            c += 1
            continue
        assign[i] = c
        if i == len(order) - 1:
            col = assign[vpos]
            counts[col] = counts.get(col, 0) + 1
            c += 1
        else:
            i += 1
            c = 1
    return counts


def _tree_root_bias(t: RootedColoredTree, sigma0, omega: int, k: int) -> Fraction:
    """Exact root-color bias given the colors of all vertices at depth >= omega,
    by an upward counting DP (exact integers)."""
    sigma0 = [int(c) for c in sigma0]
    counts: dict[int, list[int]] = {}
    for v in reversed(range(t.size)):
        depth = t.depths[v]
        if depth > omega:
            continue
        if depth == omega:
            counts[v] = [1 if c == sigma0[v] else 0 for c in range(1, k + 1)]
            continue
        row = []
        for c in range(1, k + 1):
            prod = 1
            for w in t.children(v):
                child = counts[w]
                prod *= sum(child[cc - 1] for cc in range(1, k + 1) if cc != c)
                if prod == 0:
                    break
            row.append(prod)
        counts[v] = row
    root = counts[0]
    return _bias_from_counts({i + 1: root[i] for i in range(k)}, k)


def reconstruction_corr_tree(d: float, omega: int, k: int, samples: int,
                             rng: np.random.Generator,
                             size_cap: int = 10**6) -> GibbsAverage:
    """Mean root bias over Galton-Watson trees truncated at depth omega with
    broadcast boundary conditions, each resolved by the exact counting DP."""
    if omega < 1:
        raise ParameterError(f"omega must be >= 1, got {omega}")
    vals = np.empty(samples)
    for s in range(samples):
        t = sample_gw_tree(d, omega, rng, size_cap=size_cap)
        sigma0 = broadcast_colors(t, k, rng)
        vals[s] = float(_tree_root_bias(t, sigma0, omega, k))
    stderr = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("inf")
    return GibbsAverage(float(vals.mean()), stderr, samples, False)


def reconstruction_corr_fixed_tree(t: RootedColoredTree, omega: int, k: int,
                                   budget: int | None = None) -> float:
    """Exact mean root bias of a fixed tree: average of the DP bias over all
    proper colorings as boundary conditions, grouped by boundary value."""
    if omega < 1:
        raise ParameterError(f"omega must be >= 1, got {omega}")
    bound = resolve_budget(budget)
    boundary = [v for v in range(t.size) if t.depths[v] >= omega]
    z = 0
    groups: dict[tuple[int, ...], int] = {}
    for colors in _enumerate_tree_colorings(t, k, bound):
        z += 1
        key = tuple(colors[v] for v in boundary)
        groups[key] = groups.get(key, 0) + 1
    total = Fraction(0)
    for key, size in groups.items():
        sigma0 = [0] * t.size
        for v, c in zip(boundary, key):
            sigma0[v] = c
        total += Fraction(size, z) * _tree_root_bias(t, sigma0, omega, k)
    return float(total)
