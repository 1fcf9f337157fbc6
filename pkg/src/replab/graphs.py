"""Simple undirected graphs on 0..n-1, uniform samplers, and neighborhood balls."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = [
    "Graph",
    "RootedBall",
    "sample_gnm",
    "sample_gnp",
    "ball",
    "cycle_census",
    "pairwise_ball_disjoint",
    "connected_components",
    "graph_to_json",
    "graph_from_json",
]


@dataclass(frozen=True)
class Graph:
    """Immutable labeled graph: ``n`` vertices, edge set of (u, v) pairs with u < v."""

    n: int
    edges: tuple[tuple[int, int], ...]
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n <= 0:
            raise ParameterError(f"vertex count must be positive, got {self.n}")
        seen = set()
        adj: list[list[int]] = [[] for _ in range(self.n)]
        normed = []
        for u, v in self.edges:
            if u == v:
                raise ParameterError(f"loop edge ({u},{v}) not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ParameterError(f"edge ({u},{v}) out of range for n={self.n}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ParameterError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            normed.append((u, v))
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "edges", tuple(sorted(normed)))
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def edge_array(self) -> np.ndarray:
        """(m, 2) int array; shape (0, 2) for edgeless graphs."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)


@dataclass(frozen=True)
class RootedBall:
    """Depth-``omega`` neighborhood of ``root``: induced subgraph on vertices
    within BFS distance omega, with exact distances."""

    root: int
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    depth: int
    distances: dict[int, int]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def is_tree(self) -> bool:
        # a ball is connected by construction, so acyclic iff |E| = |V| - 1
        return len(self.edges) == len(self.vertices) - 1

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


def _pair_unrank(idx: np.ndarray, n: int) -> np.ndarray:
    """Map pair ranks in [0, n(n-1)/2) to edges (u, v), u < v, lexicographic."""
    idx = np.asarray(idx, dtype=np.int64)
    # u is the largest integer with offset(u) <= idx, offset(u) = u*n - u*(u+1)/2
    u = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * idx)) / 2).astype(np.int64)
    offset = u * n - u * (u + 1) // 2
    # float guard: correct u by at most one step either way
    over = offset > idx
    u[over] -= 1
    offset = u * n - u * (u + 1) // 2
    under = idx - offset >= n - 1 - u
    u[under] += 1
    offset = u * n - u * (u + 1) // 2
    v = idx - offset + u + 1
    return np.stack([u, v], axis=1)


def _sample_pair_subset(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform m-subset of the n(n-1)/2 vertex pairs via partial Fisher-Yates."""
    total = n * (n - 1) // 2
    state: dict[int, int] = {}
    picked = np.empty(m, dtype=np.int64)
    for i in range(m):
        j = int(rng.integers(i, total))
        picked[i] = state.get(j, j)
        state[j] = state.get(i, i)
    pairs = _pair_unrank(picked, n)
    return [(int(u), int(v)) for u, v in pairs]


def sample_gnm(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Uniform random graph with exactly m edges."""
    if n <= 0:
        raise ParameterError(f"n must be positive, got {n}")
    total = n * (n - 1) // 2
    if not (0 <= m <= total):
        raise ParameterError(f"m={m} out of range [0, {total}] for n={n}")
    return Graph(n, tuple(_sample_pair_subset(n, m, rng)))


def sample_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Binomial random graph: each pair is an edge independently with probability p.

    Sampled as edge count ~ Binomial(n(n-1)/2, p) followed by a uniform
    subset of that size, which is distributionally identical and O(m).
    """
    if n <= 0:
        raise ParameterError(f"n must be positive, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p={p} outside [0, 1]")
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p))
    return Graph(n, tuple(_sample_pair_subset(n, m, rng)))


def ball(g: Graph, v: int, omega: int) -> RootedBall:
    """BFS ball of radius omega around v, with all induced edges."""
    if not (0 <= v < g.n):
        raise ParameterError(f"root {v} out of range for n={g.n}")
    if omega < 0:
        raise ParameterError(f"omega must be non-negative, got {omega}")
    dist = {v: 0}
    frontier = [v]
    d = 0
    while frontier and d < omega:
        d += 1
        nxt = []
        for u in frontier:
            for w in g.neighbors(u):
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    verts = tuple(sorted(dist))
    vset = dist.keys()
    edges = tuple(
        (u, w) for u in verts for w in g.neighbors(u) if u < w and w in vset
    )
    return RootedBall(root=v, vertices=verts, edges=edges, depth=omega, distances=dist)


def cycle_census(g: Graph, omega: int) -> tuple[int, int]:
    """(#vertices whose omega-ball contains a cycle, max ball size)."""
    cyclic = 0
    max_size = 0
    for v in range(g.n):
        b = ball(g, v, omega)
        if not b.is_tree():
            cyclic += 1
        max_size = max(max_size, b.size)
    return cyclic, max_size


def pairwise_ball_disjoint(g: Graph, roots: list[int], omega: int) -> bool:
    """True iff the omega-balls around the given distinct roots share no vertex."""
    if len(set(roots)) != len(roots):
        raise ParameterError("roots must be distinct")
    seen: set[int] = set()
    for r in roots:
        b = ball(g, r, omega)
        if seen & set(b.vertices):
            return False
        seen.update(b.vertices)
    return True


def connected_components(g: Graph) -> list[tuple[int, ...]]:
    """Vertex sets of the connected components, each sorted, in order of smallest vertex."""
    unseen = set(range(g.n))
    comps = []
    while unseen:
        start = min(unseen)
        stack = [start]
        comp = {start}
        unseen.discard(start)
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if w in unseen:
                    unseen.discard(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(tuple(sorted(comp)))
    return comps


def graph_to_json(g: Graph) -> dict:
    """Canonical JSON form: u < v, edges sorted lexicographically."""
    return {"n": g.n, "edges": [[u, v] for u, v in g.edges]}


def graph_from_json(obj: dict) -> Graph:
    return Graph(int(obj["n"]), tuple((int(u), int(v)) for u, v in obj["edges"]))
