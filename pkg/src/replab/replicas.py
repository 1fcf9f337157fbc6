"""The planted replica model, its binomial variant, the random replica
model, the exact planted density, and the mark-based exploration coupling."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .colorings import UniformColoringSampler, as_coloring, forbidden_count_pair, is_proper
from .config import resolve_budget
from .errors import CapacityError, DomainError, ParameterError, RetryExhaustedError
from .graphs import Graph, graph_to_json, sample_gnm
from .trees import RootedColoredTree

__all__ = [
    "DicoloredGraph",
    "ExplorationResult",
    "sample_planted_replica",
    "planted_density",
    "sample_binomial_planted",
    "lemma_p_binomial",
    "sample_random_replica",
    "explore_coupling",
    "dicolored_to_json",
]

PLANTED_REJECTION_CAP = 10**6
COLORABILITY_RETRY_CAP = 10**4

UNBORN, ALIVE, DEAD, REJECTED = 0, 1, 2, 3
_MARK_NAMES = {UNBORN: "unborn", ALIVE: "alive", DEAD: "dead", REJECTED: "rejected"}


@dataclass(frozen=True)
class DicoloredGraph:
    """A graph together with two colorings that are proper on it."""

    graph: Graph
    sigma1: tuple[int, ...]
    sigma2: tuple[int, ...]
    k: int

    def __post_init__(self):
        s1 = as_coloring(self.sigma1, self.k)
        s2 = as_coloring(self.sigma2, self.k)
        object.__setattr__(self, "sigma1", tuple(int(c) for c in s1))
        object.__setattr__(self, "sigma2", tuple(int(c) for c in s2))
        if not is_proper(self.graph, s1) or not is_proper(self.graph, s2):
            raise ParameterError("both colorings must be proper on the graph")


def dicolored_to_json(dg: DicoloredGraph) -> dict:
    return {
        "graph": graph_to_json(dg.graph),
        "sigma1": list(dg.sigma1),
        "sigma2": list(dg.sigma2),
        "k": dg.k,
    }


def _allowed_pairs(n: int, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """(r, 2) array of vertex pairs bichromatic under both colorings."""
    iu, ju = np.triu_indices(n, k=1)
    mask = (s1[iu] != s1[ju]) & (s2[iu] != s2[ju])
    return np.stack([iu[mask], ju[mask]], axis=1)


def sample_planted_replica(n: int, m: int, k: int, rng: np.random.Generator,
                           max_rejections: int = PLANTED_REJECTION_CAP) -> DicoloredGraph:
    """PR1-PR2: uniform map pair conditioned on room for m bichromatic edges,
    then m uniform edges among the pairs bichromatic under both."""
    total = comb(n, 2)
    if not (0 <= m <= total):
        raise ParameterError(f"m={m} out of range [0, {total}]")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k == 1 and m > 0:
        raise DomainError("k=1 leaves no bichromatic pair; no valid map pair exists")
    for _ in range(max_rejections):
        s1 = rng.integers(1, k + 1, size=n)
        s2 = rng.integers(1, k + 1, size=n)
        if forbidden_count_pair(s1, s2) <= total - m:
            break
    else:
        raise RetryExhaustedError("PR1 rejection loop exhausted", attempts=max_rejections)
    pairs = _allowed_pairs(n, s1, s2)
    chosen = rng.choice(len(pairs), size=m, replace=False) if m else np.empty(0, dtype=int)
    edges = tuple((int(u), int(v)) for u, v in pairs[np.sort(chosen)])
    return DicoloredGraph(Graph(n, edges), tuple(s1), tuple(s2), k)


@lru_cache(maxsize=16)
def _valid_pair_count(n: int, m: int, k: int, bound: int) -> int:
    """#{(tau1, tau2) in [k]^n x [k]^n : F(tau1, tau2) <= C(n,2) - m} by
    exhaustive enumeration of all k^(2n) pairs (vectorized)."""
    big = k ** (2 * n)
    if big > bound:
        raise CapacityError(f"planted density needs k^(2n) = {big} pair evaluations",
                            bound=bound)
    kn = k**n
    digits = np.empty((kn, n), dtype=np.int8)
    idx = np.arange(kn)
    for j in range(n):
        digits[:, n - 1 - j] = (idx // k**j) % k + 1
    f_single = np.zeros(kn, dtype=np.int64)
    for c in range(1, k + 1):
        cnt = (digits == c).sum(axis=1)
        f_single += cnt * (cnt - 1) // 2
    shared = np.zeros((kn, kn), dtype=np.int64)
    for a in range(1, k + 1):
        A = (digits == a).astype(np.int64)
        for b in range(1, k + 1):
            B = (digits == b).astype(np.int64)
            j = A @ B.T
            shared += j * (j - 1) // 2
    f_pair = f_single[:, None] + f_single[None, :] - shared
    return int((f_pair <= comb(n, 2) - m).sum())


def planted_density(dg, n: int, m: int, k: int, budget: int | None = None) -> Fraction:
    """Exact probability of one (graph, sigma1, sigma2) triple under PR1-PR2:
    1 / (#valid map pairs) * 1 / C(C(n,2) - F(sigma1,sigma2), m) when the
    triple is reachable, else 0.

    Accepts a DicoloredGraph or a raw (Graph, sigma1, sigma2) triple; raw
    triples with improper colorings simply get density 0.
    """
    if isinstance(dg, DicoloredGraph):
        g, s1, s2 = dg.graph, np.asarray(dg.sigma1), np.asarray(dg.sigma2)
    else:
        g, s1, s2 = dg
        s1, s2 = as_coloring(s1, k), as_coloring(s2, k)
    bound = resolve_budget(budget)
    n_valid = _valid_pair_count(n, m, k, bound)
    if g.n != n or g.m != m:
        return Fraction(0)
    if not (is_proper(g, s1) and is_proper(g, s2)):
        return Fraction(0)
    free = comb(n, 2) - forbidden_count_pair(s1, s2)
    if free < m:
        return Fraction(0)
    return Fraction(1, n_valid) * Fraction(1, comb(free, m))


def lemma_p_binomial(n: int, m: int, k: int) -> float:
    """Edge probability matching m expected edges among bichromatic pairs:
    m / (C(n,2) (1 - 1/k)^2).  Can exceed 1 at tiny n; callers must clamp."""
    return m / (comb(n, 2) * (1.0 - 1.0 / k) ** 2)


def sample_binomial_planted(n: int, p: float, k: int, rng: np.random.Generator) -> DicoloredGraph:
    """PR1'-PR2': unconditioned uniform map pair, then each bichromatic pair
    becomes an edge independently with probability p."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p={p} outside [0, 1]")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    s1 = rng.integers(1, k + 1, size=n)
    s2 = rng.integers(1, k + 1, size=n)
    pairs = _allowed_pairs(n, s1, s2)
    keep = rng.random(len(pairs)) < p
    edges = tuple((int(u), int(v)) for u, v in pairs[keep])
    return DicoloredGraph(Graph(n, edges), tuple(s1), tuple(s2), k)


def sample_random_replica(n: int, m: int, k: int, rng: np.random.Generator,
                          budget: int | None = None,
                          max_retries: int = COLORABILITY_RETRY_CAP) -> DicoloredGraph:
    """RR1-RR2: G(n,m) conditioned k-colorable, then two independent
    exact-uniform colorings of it."""
    bound = resolve_budget(budget)
    for _ in range(max_retries):
        g = sample_gnm(n, m, rng)
        try:
            sampler = UniformColoringSampler(g, k, budget=bound)
        except DomainError:
            continue
        s1 = sampler.sample(rng)
        s2 = sampler.sample(rng)
        return DicoloredGraph(g, tuple(s1), tuple(s2), k)
    raise RetryExhaustedError(
        f"no {k}-colorable G({n},{m}) in {max_retries} draws", attempts=max_retries
    )


@dataclass(frozen=True)
class ExplorationResult:
    """Outcome of the mark-based neighborhood exploration (EX1-EX2)."""

    tree: RootedColoredTree
    root_vertex: int
    coupling_ok: bool
    acyclic: bool
    size_ok: bool
    no_rejected_hit: bool
    marks_trace: tuple[tuple[int, int, str], ...] | None = None


class _Exploration:
    """One run of EX1-EX2 on vertex set [n] with per-pair Be(p) candidate
    coins, drawn lazily.  Candidate coins toward the pool (unborn or
    rejected vertices) are realized as a binomial count plus a uniform
    subset, which is distributionally identical to per-pair Bernoullis.
    """

    def __init__(self, n, p, k, omega, rng, size_cap, trace):
        self.n, self.p, self.k, self.omega, self.rng = n, p, k, omega, rng
        self.size_cap = n**0.1 if size_cap is None else size_cap
        self.status = np.zeros(n, dtype=np.int8)
        self.s1 = np.zeros(n, dtype=np.int64)
        self.s2 = np.zeros(n, dtype=np.int64)
        self.trace: list[tuple[int, int, str]] | None = [] if trace else None
        self.cand_pairs: set[tuple[int, int]] = set()
        self.extra_coins: dict[tuple[int, int], int] = {}
        self.rejected_hit = False
        self.cycle_closed = False

        self.root = int(rng.integers(n))
        self.s1[self.root], self.s2[self.root] = rng.integers(1, k + 1, size=2)
        self.status[self.root] = ALIVE
        self._mark(-1, self.root, ALIVE)
        # pool = unborn + rejected vertices, with O(1) swap-removal
        self.pool = [v for v in range(n) if v != self.root]
        self.pool_pos = {v: i for i, v in enumerate(self.pool)}
        # tree bookkeeping: graph vertex <-> tree index, BFS order
        self.tree_vertices = [self.root]
        self.tree_parents = [-1]
        self.tree_index = {self.root: 0}
        self.depth = {self.root: 0}
        self.proc_step: dict[int, int] = {}
        self.alive_step = {self.root: -1}

    def _mark(self, step, v, mark):
        if self.trace is not None:
            self.trace.append((step, v, _MARK_NAMES[mark]))

    def _pool_remove(self, v):
        i = self.pool_pos.pop(v)
        last = self.pool.pop()
        if last != v:
            self.pool[i] = last
            self.pool_pos[last] = i

    def run(self):
        rng, k, p = self.rng, self.k, self.p
        queue = [self.root] if self.omega > 0 else []
        head = 0
        step = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            self.proc_step[v] = step
            cnt = int(rng.binomial(len(self.pool), p)) if self.pool else 0
            if cnt:
                picks = rng.choice(len(self.pool), size=cnt, replace=False)
                candidates = [self.pool[i] for i in picks]
            else:
                candidates = []
            for w in candidates:
                pair = (min(v, w), max(v, w))
                self.cand_pairs.add(pair)
                if self.status[w] == REJECTED:
                    self.rejected_hit = True  # event R fails; edge discarded
                    continue
                self.s1[w], self.s2[w] = rng.integers(1, k + 1, size=2)
                if self.s1[w] == self.s1[v] or self.s2[w] == self.s2[v]:
                    self.status[w] = REJECTED
                    self._mark(step, w, REJECTED)
                    continue
                self.status[w] = ALIVE
                self._mark(step, w, ALIVE)
                self._pool_remove(w)
                self.alive_step[w] = step
                self.depth[w] = self.depth[v] + 1
                self.tree_index[w] = len(self.tree_vertices)
                self.tree_vertices.append(w)
                self.tree_parents.append(self.tree_index[v])
                if self.depth[w] < self.omega:
                    queue.append(w)
            self.status[v] = DEAD
            self._mark(step, v, DEAD)
            step += 1

    def _queried_in_bfs(self, u, w) -> bool:
        """Was the coin for pair (u, w) already determined during EX2?
        That happens iff one endpoint was processed while the other was
        still in the pool (not yet alive)."""
        INF = float("inf")
        tu, tw = self.proc_step.get(u, INF), self.proc_step.get(w, INF)
        au, aw = self.alive_step.get(u, INF), self.alive_step.get(w, INF)
        return (tu is not INF and aw > tu) or (tw is not INF and au > tw)

    def check_cycles(self):
        """Draw the coins for tree-vertex pairs EX2 never looked at; any
        bichromatic hit is an edge of the coupled graph inside the ball and
        therefore closes a cycle."""
        tv = sorted(self.tree_vertices)
        tree_edges = {
            (min(a, b), max(a, b))
            for a, b in (
                (self.tree_vertices[i], self.tree_vertices[self.tree_parents[i]])
                for i in range(1, len(self.tree_vertices))
            )
        }
        for i, u in enumerate(tv):
            for w in tv[i + 1:]:
                pair = (u, w)
                if pair in tree_edges or self._queried_in_bfs(u, w):
                    continue
                coin = int(self.rng.random() < self.p)
                self.extra_coins[pair] = coin
                if coin and self.s1[u] != self.s1[w] and self.s2[u] != self.s2[w]:
                    self.cycle_closed = True

    def result(self) -> ExplorationResult:
        order = self.tree_vertices
        colors1 = tuple(int(self.s1[v]) for v in order)
        colors2 = tuple(int(self.s2[v]) for v in order)
        tree = RootedColoredTree(tuple(self.tree_parents), colors1, colors2)
        size_ok = len(order) <= self.size_cap
        return ExplorationResult(
            tree=tree,
            root_vertex=self.root,
            coupling_ok=(not self.cycle_closed) and size_ok and (not self.rejected_hit),
            acyclic=not self.cycle_closed,
            size_ok=size_ok,
            no_rejected_hit=not self.rejected_hit,
            marks_trace=None if self.trace is None else tuple(self.trace),
        )

    def fill_graph(self) -> DicoloredGraph:
        """Complete the coupled binomial planted graph: color every unseen
        vertex, settle every undetermined coin, keep bichromatic hits."""
        rng, n = self.rng, self.n
        for v in range(n):
            if self.s1[v] == 0:
                self.s1[v], self.s2[v] = rng.integers(1, self.k + 1, size=2)
        edges = []
        for u in range(n):
            for w in range(u + 1, n):
                pair = (u, w)
                if pair in self.cand_pairs:
                    coin = 1
                elif pair in self.extra_coins:
                    coin = self.extra_coins[pair]
                elif self._queried_in_bfs(u, w):
                    coin = 0
                else:
                    coin = int(rng.random() < self.p)
                if coin and self.s1[u] != self.s1[w] and self.s2[u] != self.s2[w]:
                    edges.append(pair)
        return DicoloredGraph(Graph(n, tuple(edges)), tuple(int(c) for c in self.s1),
                              tuple(int(c) for c in self.s2), self.k)


def explore_coupling(n: int, p: float, k: int, omega: int, rng: np.random.Generator,
                     size_cap: float | None = None, trace: bool = False,
                     with_graph: bool = False):
    """Run the EX1-EX2 exploration; returns an ExplorationResult, or a
    (result, DicoloredGraph) pair when ``with_graph`` is set.

    In the returned pair the graph is the binomial planted graph built from
    the same color pairs and candidate coins the exploration consumed, so
    whenever ``coupling_ok`` holds the exploration tree is isomorphic (as a
    dicolored rooted tree) to the depth-omega ball of the graph at the root.
    ``size_cap`` defaults to n^0.1.
    """
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p={p} outside [0, 1]")
    if omega < 0:
        raise ParameterError(f"omega must be >= 0, got {omega}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    ex = _Exploration(n, p, k, omega, rng, size_cap, trace)
    ex.run()
    ex.check_cycles()
    res = ex.result()
    if with_graph:
        return res, ex.fill_graph()
    return res
