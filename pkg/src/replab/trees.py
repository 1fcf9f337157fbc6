"""Galton-Watson Po(d) trees truncated at a depth, broadcast colorings,
and exact shape probabilities.

Trees are unordered and rooted at vertex 0; vertices are indexed in BFS
order, so ``parents[i] < i`` and ``parents[0] == -1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import exp, factorial

import numpy as np

from .codes import tree_code
from .config import resolve_budget
from .errors import CapacityError, DomainError, ParameterError
from .graphs import Graph

__all__ = [
    "RootedColoredTree",
    "sample_gw_tree",
    "broadcast_colors",
    "broadcast_coloring",
    "gw_shape_probability",
    "q_target",
    "tree_ball_distribution",
    "tree_count_colorings",
]

TREE_SIZE_CAP = 10**6


@dataclass(frozen=True)
class RootedColoredTree:
    """Rooted tree with up to two proper colorings attached."""

    parents: tuple[int, ...]
    colors1: tuple[int, ...] | None = None
    colors2: tuple[int, ...] | None = None
    _children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _depths: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.parents)
        if n == 0 or self.parents[0] != -1:
            raise ParameterError("tree must have a root at index 0 with parent -1")
        kids: list[list[int]] = [[] for _ in range(n)]
        depths = [0] * n
        for v in range(1, n):
            p = self.parents[v]
            if not (0 <= p < v):
                raise ParameterError(f"parent of {v} must precede it, got {p}")
            kids[p].append(v)
            depths[v] = depths[p] + 1
        object.__setattr__(self, "_children", tuple(tuple(c) for c in kids))
        object.__setattr__(self, "_depths", tuple(depths))
        for colors in (self.colors1, self.colors2):
            if colors is None:
                continue
            if len(colors) != n:
                raise ParameterError("coloring length must match tree size")
            for v in range(1, n):
                if colors[v] == colors[self.parents[v]]:
                    raise ParameterError(f"coloring is improper at edge ({self.parents[v]},{v})")

    @property
    def size(self) -> int:
        return len(self.parents)

    @property
    def depths(self) -> tuple[int, ...]:
        return self._depths

    @property
    def depth(self) -> int:
        return max(self._depths)

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(self.size)}
        for v in range(1, self.size):
            adj[v].append(self.parents[v])
            adj[self.parents[v]].append(v)
        return adj

    def colorings(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c for c in (self.colors1, self.colors2) if c is not None)

    def canonical_code(self) -> bytes:
        return tree_code(self.adjacency(), 0, self.colorings())

    def truncate(self, omega: int) -> "RootedColoredTree":
        """Subtree of vertices at depth <= omega (indices stay BFS-compatible)."""
        keep = [v for v in range(self.size) if self._depths[v] <= omega]
        remap = {v: i for i, v in enumerate(keep)}
        parents = tuple(-1 if v == 0 else remap[self.parents[v]] for v in keep)
        pick = lambda cs: None if cs is None else tuple(cs[v] for v in keep)
        return RootedColoredTree(parents, pick(self.colors1), pick(self.colors2))

    def with_colors(self, colors1=None, colors2=None) -> "RootedColoredTree":
        c1 = None if colors1 is None else tuple(int(c) for c in colors1)
        c2 = None if colors2 is None else tuple(int(c) for c in colors2)
        return RootedColoredTree(self.parents, c1, c2)

    def to_graph(self) -> Graph:
        return Graph(self.size, tuple((self.parents[v], v) for v in range(1, self.size)))

    def is_proper_coloring(self, colors) -> bool:
        colors = tuple(int(c) for c in colors)
        if len(colors) != self.size:
            raise ParameterError("coloring length must match tree size")
        return all(colors[v] != colors[self.parents[v]] for v in range(1, self.size))


def sample_gw_tree(d: float, omega: int, rng: np.random.Generator,
                   size_cap: int = TREE_SIZE_CAP) -> RootedColoredTree:
    """Po(d) branching down to depth omega; depth-omega vertices are leaves."""
    if d < 0:
        raise ParameterError(f"offspring mean must be >= 0, got {d}")
    if omega < 0:
        raise ParameterError(f"omega must be >= 0, got {omega}")
    parents = [-1]
    depths = [0]
    v = 0
    while v < len(parents):
        if depths[v] < omega:
            for _ in range(int(rng.poisson(d))):
                parents.append(v)
                depths.append(depths[v] + 1)
                if len(parents) > size_cap:
                    raise CapacityError("Galton-Watson tree exceeded the size cap",
                                        bound=size_cap)
        v += 1
    return RootedColoredTree(tuple(parents))


def broadcast_colors(t: RootedColoredTree, k: int, rng: np.random.Generator,
                     size: int | None = None) -> np.ndarray:
    """Broadcast process colors: uniform root color, each child uniform over
    the k-1 colors its parent leaves free.

    With ``size`` the same recurrence runs vectorized across that many
    independent draws, returning a (size, n) array.
    """
    if k < 2 and t.size > 1:
        raise DomainError("broadcasting over an edge needs k >= 2")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    squeeze = size is None
    nd = 1 if size is None else size
    out = np.empty((nd, t.size), dtype=np.int64)
    out[:, 0] = rng.integers(1, k + 1, size=nd)
    for v in range(1, t.size):
        r = rng.integers(1, k, size=nd)
        p = out[:, t.parents[v]]
        out[:, v] = r + (r >= p)
    return out[0] if squeeze else out


def broadcast_coloring(t: RootedColoredTree, k: int, rng: np.random.Generator) -> RootedColoredTree:
    """The tree with a fresh broadcast coloring attached as colors1."""
    return t.with_colors(colors1=broadcast_colors(t, k, rng))


def tree_count_colorings(t: RootedColoredTree, k: int) -> int:
    """Closed form Z_k of a tree: k(k-1)^(n-1)."""
    return k * (k - 1) ** (t.size - 1)


def _poisson_pmf(d: float, c: int) -> float:
    return exp(-d) * d**c / factorial(c)


def gw_shape_probability(theta: RootedColoredTree, d: float, omega: int) -> float:
    """P[depth-omega truncation of a Po(d) Galton-Watson tree is isomorphic
    to theta], by the recursive multiset formula: a vertex at depth < omega
    with child subtree multiset {theta_i : m_i} contributes
    Po(d)(sum m_i) * (sum m_i)! / prod m_i! * prod p(theta_i)^{m_i};
    depth-omega vertices contribute 1.
    """
    if theta.depth > omega:
        raise ParameterError(f"shape of depth {theta.depth} exceeds omega={omega}")

    def prob(v: int) -> float:
        if theta.depths[v] == omega:
            return 1.0
        kids = theta.children(v)
        c = len(kids)
        groups: dict[bytes, list[int]] = {}
        for w in kids:
            groups.setdefault(_subtree_code(theta, w), []).append(w)
        p = _poisson_pmf(d, c) * factorial(c)
        for members in groups.values():
            p /= factorial(len(members))
            p *= prob(members[0]) ** len(members)
        return p

    return prob(0)


def _subtree_code(t: RootedColoredTree, v: int) -> bytes:
    sub_vertices = [v]
    for u in sub_vertices:
        sub_vertices.extend(t.children(u))
    adj = {u: [] for u in sub_vertices}
    for u in sub_vertices[1:]:
        adj[u].append(t.parents[u])
        adj[t.parents[u]].append(u)
    return tree_code(adj, v)


def q_target(theta: RootedColoredTree, tau1, tau2, d: float, omega: int, k: int) -> float:
    """Predicted limit of the dicolored-neighborhood fraction:
    P[shape] / Z_k(theta)^2.  The colorings only select the class, so the
    value is the same for every proper (tau1, tau2); they are validated here.
    """
    for tau in (tau1, tau2):
        if not theta.is_proper_coloring(tau):
            raise ParameterError("tau must be a proper coloring of theta")
    z = tree_count_colorings(theta, k)
    return gw_shape_probability(theta, d, omega) / z**2


def _enumerate_tree_colorings(t: RootedColoredTree, k: int, budget: int):
    """All proper colorings of a tree, via root color x per-vertex offsets."""
    z = k * (k - 1) ** (t.size - 1)
    if z > budget:
        raise CapacityError("tree coloring enumeration exceeds budget", bound=budget)
    n = t.size
    if n == 1:
        for c in range(1, k + 1):
            yield (c,)
        return
    for root_color in range(1, k + 1):
        for offsets in itertools.product(range(1, k), repeat=n - 1):
            colors = [root_color] + [0] * (n - 1)
            for v in range(1, n):
                r = offsets[v - 1]
                p = colors[t.parents[v]]
                colors[v] = r + (r >= p)
            yield tuple(colors)


def tree_ball_distribution(t: RootedColoredTree, omega0: int, k: int,
                           budget: int | None = None) -> dict[bytes, Fraction]:
    """Exact law of the canonical colored code of the depth-omega0 truncation
    when the whole tree gets a uniform proper coloring.

    Each truncation coloring is weighted by its number of proper extensions
    below depth omega0, which for trees is (k-1)^(#removed vertices).
    """
    if omega0 < 0:
        raise ParameterError(f"omega0 must be >= 0, got {omega0}")
    if omega0 > t.depth:
        raise ParameterError(f"omega0={omega0} exceeds tree depth {t.depth}")
    if k < 2 and t.size > 1:
        raise DomainError("a tree with an edge has no proper coloring for k < 2")
    bound = resolve_budget(budget)
    trunc = t.truncate(omega0)
    removed = t.size - trunc.size
    ext = (k - 1) ** removed
    z_total = k * (k - 1) ** (t.size - 1)
    adj = trunc.adjacency()
    masses: dict[bytes, Fraction] = {}
    for colors in _enumerate_tree_colorings(trunc, k, bound):
        code = tree_code(adj, 0, ({v: colors[v] for v in range(trunc.size)},))
        masses[code] = masses.get(code, Fraction(0)) + Fraction(ext, z_total)
    return masses
