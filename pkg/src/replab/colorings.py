"""Exact enumeration, counting, and uniform sampling of proper k-colorings.

Colors are 1-based: a coloring of a graph on n vertices is a length-n
integer vector with entries in {1..k}.  All counts are exact Python
integers and all probabilities exact ``fractions.Fraction``; floats only
appear in Monte Carlo estimates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .config import resolve_budget
from .errors import CapacityError, DomainError, ParameterError
from .graphs import Graph, connected_components

__all__ = [
    "ColorProfile",
    "GibbsAverage",
    "UniformColoringSampler",
    "as_coloring",
    "is_proper",
    "forbidden_count",
    "forbidden_count_pair",
    "enumerate_colorings",
    "count_colorings",
    "count_by_profile",
    "count_pairs_by_overlap",
    "sample_uniform_coloring",
    "is_k_colorable",
    "prob_proper_exact",
    "gibbs_average",
]


def as_coloring(sigma, k: int | None = None) -> np.ndarray:
    """Normalize to an int64 array and validate the 1..k range when k is given."""
    arr = np.asarray(sigma, dtype=np.int64)
    if arr.ndim != 1:
        raise ParameterError("coloring must be a 1-d vector")
    if arr.size and arr.min() < 1:
        raise ParameterError("colors are 1-based")
    if k is not None and arr.size and arr.max() > k:
        raise ParameterError(f"color exceeds k={k}")
    return arr


@dataclass(frozen=True)
class ColorProfile:
    """Color-class sizes of a map into [k], stored as exact counts over n vertices."""

    counts: tuple[int, ...]
    n: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ParameterError("profile counts must be non-negative")
        if sum(self.counts) != self.n:
            raise ParameterError(
                f"profile counts sum to {sum(self.counts)}, expected n={self.n}"
            )

    @classmethod
    def of(cls, sigma, k: int) -> "ColorProfile":
        arr = as_coloring(sigma, k)
        counts = np.bincount(arr, minlength=k + 1)[1 : k + 1]
        return cls(tuple(int(c) for c in counts), len(arr))

    @classmethod
    def from_fractions(cls, alpha, n: int) -> "ColorProfile":
        counts = []
        for a in alpha:
            c = Fraction(a) * n
            if c.denominator != 1:
                raise ParameterError(f"profile entry {a} is not a multiple of 1/{n}")
            counts.append(int(c))
        return cls(tuple(counts), n)

    @property
    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.n) for c in self.counts)


def is_proper(g: Graph, sigma) -> bool:
    arr = as_coloring(sigma)
    if len(arr) != g.n:
        raise ParameterError(f"coloring length {len(arr)} != n={g.n}")
    e = g.edge_array()
    if e.shape[0] == 0:
        return True
    return bool(np.all(arr[e[:, 0]] != arr[e[:, 1]]))


def forbidden_count(sigma) -> int:
    """Number of complete-graph edges monochromatic under sigma:
    sum over colors of C(class size, 2)."""
    arr = as_coloring(sigma)
    counts = np.bincount(arr)
    return int(sum(comb(int(c), 2) for c in counts))


def forbidden_count_pair(sigma, tau) -> int:
    """Complete-graph edges monochromatic under sigma or tau, by inclusion/exclusion:
    F(sigma) + F(tau) - sum_ij C(joint class size, 2)."""
    a = as_coloring(sigma)
    b = as_coloring(tau)
    if len(a) != len(b):
        raise ParameterError("colorings must have equal length")
    ka, kb = (int(a.max()) if a.size else 0), (int(b.max()) if b.size else 0)
    joint = np.zeros((ka + 1, kb + 1), dtype=np.int64)
    np.add.at(joint, (a, b), 1)
    shared = int(sum(comb(int(c), 2) for c in joint.ravel()))
    return forbidden_count(a) + forbidden_count(b) - shared


def _earlier_neighbors(g: Graph, vertices: tuple[int, ...] | None = None):
    """For each vertex (in enumeration order) the already-colored neighbors."""
    if vertices is None:
        vertices = tuple(range(g.n))
    pos = {v: i for i, v in enumerate(vertices)}
    earlier = []
    for v in vertices:
        earlier.append(tuple(pos[u] for u in g.neighbors(v) if u in pos and pos[u] < pos[v]))
    return earlier


def _backtrack(n: int, k: int, earlier, budget: int, collect: bool,
               stop_at_first: bool = False):
    """Pruned lexicographic backtracking over proper colorings.

    Yields assignments as tuples when ``collect``, else counts leaves.
    The budget bounds the number of (vertex, color) candidate states tried.
    """
    if n == 0:
        yield ()
        return
    assign = [0] * n
    tried = 0
    v, c = 0, 1
    count = 0
    while True:
        if c > k:
            v -= 1
            if v < 0:
                break
            c = assign[v] + 1
            continue
        tried += 1
        if tried > budget:
            raise CapacityError("proper-coloring enumeration exceeded its state budget",
                                bound=budget)
        conflict = False
        for u in earlier[v]:
            if assign[u] == c:
                conflict = True
                break
        if conflict:
            c += 1
            continue
        assign[v] = c
        if v == n - 1:
            if collect:
                yield tuple(assign)
            else:
                count += 1
            if stop_at_first:
                return
            c += 1
        else:
            v += 1
            c = 1
    if not collect:
        yield count  # type: ignore[misc]


def enumerate_colorings(g: Graph, k: int, budget: int | None = None) -> Iterator[np.ndarray]:
    """All proper k-colorings of g, exactly once each, in lexicographic order."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    bound = resolve_budget(budget)
    earlier = _earlier_neighbors(g)
    for assign in _backtrack(g.n, k, earlier, bound, collect=True):
        yield np.asarray(assign, dtype=np.int64)


def _is_forest(g: Graph) -> bool:
    return g.m == g.n - len(connected_components(g))


def count_colorings(g: Graph, k: int, budget: int | None = None) -> int:
    """Exact Z_k(g).  Forests use the closed form k(k-1)^(size-1) per component;
    everything else is counted by pruned backtracking within the budget."""
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    comps = connected_components(g)
    if g.m == g.n - len(comps):
        z = 1
        for comp in comps:
            z *= k * (k - 1) ** (len(comp) - 1)
        return z
    bound = resolve_budget(budget)
    earlier = _earlier_neighbors(g)
    return next(_backtrack(g.n, k, earlier, bound, collect=False))


def count_by_profile(g: Graph, k: int, alpha) -> int:
    """Exact count of proper colorings whose color-class sizes match alpha."""
    if isinstance(alpha, ColorProfile):
        profile = alpha
    else:
        profile = ColorProfile.from_fractions(alpha, g.n)
    if len(profile.counts) != k:
        raise ParameterError(f"profile has {len(profile.counts)} entries, expected k={k}")
    if profile.n != g.n:
        raise ParameterError(f"profile is over n={profile.n}, graph has n={g.n}")
    target = np.asarray(profile.counts)
    total = 0
    for sigma in enumerate_colorings(g, k):
        counts = np.bincount(sigma, minlength=k + 1)[1 : k + 1]
        if np.array_equal(counts, target):
            total += 1
    return total


def count_pairs_by_overlap(g: Graph, k: int, rho, budget: int | None = None) -> int:
    """Exact number of ordered pairs of proper colorings with the given overlap.

    ``rho`` is an OverlapMatrix (anything with integer ``counts``) or a k x k
    matrix of joint class counts summing to n.
    """
    counts = np.asarray(getattr(rho, "counts", rho), dtype=np.int64)
    if counts.shape != (k, k):
        raise ParameterError(f"overlap counts must be {k}x{k}")
    if counts.sum() != g.n:
        raise ParameterError("overlap counts must sum to n")
    bound = resolve_budget(budget)
    all_colorings = list(enumerate_colorings(g, k, budget=bound))
    z = len(all_colorings)
    if z * z > bound:
        raise CapacityError("pair enumeration exceeds budget", bound=bound)
    total = 0
    for sigma in all_colorings:
        for tau in all_colorings:
            joint = np.zeros((k + 1, k + 1), dtype=np.int64)
            np.add.at(joint, (sigma, tau), 1)
            if np.array_equal(joint[1:, 1:], counts):
                total += 1
    return total


class _TreeComponentSampler:
    """Exact-uniform proper colorings of a tree component via top-down broadcast:
    uniform root color, each child uniform over the k-1 colors avoiding its parent."""

    def __init__(self, g: Graph, comp: tuple[int, ...], k: int):
        self.k = k
        root = comp[0]
        order = [root]
        parent_of = {root: None}
        for v in order:
            for w in g.neighbors(v):
                if w not in parent_of:
                    parent_of[w] = v
                    order.append(w)
        self.order = order
        self.parents = [parent_of[v] for v in order]

    def fill(self, out: np.ndarray, rng: np.random.Generator) -> None:
        k = self.k
        for v, p in zip(self.order, self.parents):
            if p is None:
                out[v] = rng.integers(1, k + 1)
            else:
                r = int(rng.integers(1, k))
                out[v] = r + (r >= out[p])


class _EnumComponentSampler:
    def __init__(self, g: Graph, comp: tuple[int, ...], k: int, budget: int):
        pos = {v: i for i, v in enumerate(comp)}
        sub_edges = tuple(
            (pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos
        )
        sub = Graph(len(comp), sub_edges)
        colorings = list(enumerate_colorings(sub, k, budget=budget))
        if not colorings:
            raise DomainError(f"component {comp} has no proper {k}-coloring")
        self.comp = comp
        self.table = np.asarray(colorings, dtype=np.int64)

    def fill(self, out: np.ndarray, rng: np.random.Generator) -> None:
        row = self.table[int(rng.integers(len(self.table)))]
        out[list(self.comp)] = row


class UniformColoringSampler:
    """Exactly uniform sampler over proper k-colorings of a fixed graph.

    Components are independent under the uniform measure, so each is sampled
    on its own: tree components by broadcast, cyclic components from an
    enumerated table (subject to the budget).
    """

    def __init__(self, g: Graph, k: int, budget: int | None = None):
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        bound = resolve_budget(budget)
        self.g = g
        self.k = k
        self.parts: list[_TreeComponentSampler | _EnumComponentSampler] = []
        z = 1
        for comp in connected_components(g):
            members = set(comp)
            n_edges = sum(1 for u, _ in g.edges if u in members)
            if n_edges == len(comp) - 1:
                if k < 2 and len(comp) > 1:
                    raise DomainError("a tree with an edge needs k >= 2")
                self.parts.append(_TreeComponentSampler(g, comp, k))
                z *= k * (k - 1) ** (len(comp) - 1)
            else:
                part = _EnumComponentSampler(g, comp, k, bound)
                self.parts.append(part)
                z *= len(part.table)
        self.count = z

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(self.g.n, dtype=np.int64)
        for part in self.parts:
            part.fill(out, rng)
        return out


def sample_uniform_coloring(g: Graph, k: int, rng: np.random.Generator,
                            budget: int | None = None) -> np.ndarray:
    """One exactly uniform proper k-coloring of g."""
    return UniformColoringSampler(g, k, budget=budget).sample(rng)


def is_k_colorable(g: Graph, k: int, budget: int | None = None) -> bool:
    bound = resolve_budget(budget)
    comps = connected_components(g)
    if g.m == g.n - len(comps):
        return k >= 2 or g.m == 0
    earlier = _earlier_neighbors(g)
    for _ in _backtrack(g.n, k, earlier, bound, collect=True, stop_at_first=True):
        return True
    return False


def prob_proper_exact(sigma, n: int, m: int) -> Fraction:
    """Exact probability that sigma is proper on G(n, m):
    C(C(n,2) - F(sigma), m) / C(C(n,2), m)."""
    total = comb(n, 2)
    if m > total:
        raise ParameterError(f"m={m} exceeds C(n,2)={total}")
    arr = as_coloring(sigma)
    if len(arr) != n:
        raise ParameterError(f"coloring length {len(arr)} != n={n}")
    free = total - forbidden_count(arr)
    if free < m:
        return Fraction(0)
    return Fraction(comb(free, m), comb(total, m))


class GibbsAverage(NamedTuple):
    value: float
    stderr: float
    n_samples: int
    exact: bool


def gibbs_average(g: Graph, k: int, statistic: Callable[..., float], l: int = 1,
                  mode: str = "exact", samples: int = 1000,
                  rng: np.random.Generator | None = None,
                  budget: int | None = None) -> GibbsAverage:
    """Average of statistic(sigma_1, .., sigma_l) over independent uniform
    proper colorings of g.

    Exact mode sums over all Z^l tuples; mc mode draws exact-uniform
    colorings (never MCMC) and reports the standard error of the mean.
    """
    if l < 1:
        raise ParameterError(f"l must be >= 1, got {l}")
    if mode == "exact":
        bound = resolve_budget(budget)
        all_colorings = list(enumerate_colorings(g, k, budget=bound))
        z = len(all_colorings)
        if z == 0:
            raise DomainError(f"graph has no proper {k}-coloring")
        if z**l > bound:
            raise CapacityError(f"Gibbs average over Z^{l} tuples exceeds budget",
                                bound=bound)
        total = 0.0
        for tup in itertools.product(all_colorings, repeat=l):
            total += float(statistic(*tup))
        return GibbsAverage(total / z**l, 0.0, z**l, True)
    if mode == "mc":
        if rng is None:
            raise ParameterError("mc mode needs an rng")
        sampler = UniformColoringSampler(g, k, budget=budget)
        vals = np.empty(samples, dtype=np.float64)
        for i in range(samples):
            vals[i] = float(statistic(*(sampler.sample(rng) for _ in range(l))))
        stderr = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else float("inf")
        return GibbsAverage(float(vals.mean()), stderr, samples, False)
    raise ParameterError(f"unknown mode {mode!r}")
