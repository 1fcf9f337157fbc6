"""Overlap matrices of coloring pairs, stability classification, and the
desk-scale concentration experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .colorings import (
    UniformColoringSampler,
    as_coloring,
    enumerate_colorings,
)
from .config import resolve_budget, split_streams
from .errors import DomainError, ParameterError, RetryExhaustedError
from .graphs import Graph, sample_gnm
from .reports import ExperimentReport, StatRow

__all__ = [
    "OverlapMatrix",
    "StabilityClass",
    "overlap",
    "overlap_distance",
    "default_kappa",
    "classify_stability",
    "cluster_size",
    "overlap_concentration_experiment",
    "profile_concentration_experiment",
    "sample_colorable_gnm",
]


@dataclass(frozen=True)
class OverlapMatrix:
    """Joint color-class sizes of two colorings, entry (i,j) = |sigma^-1(i) & tau^-1(j)|,
    stored as exact counts over n vertices."""

    counts: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        total = sum(sum(row) for row in self.counts)
        if total != self.n:
            raise ParameterError(f"overlap counts sum to {total}, expected n={self.n}")
        if any(c < 0 for row in self.counts for c in row):
            raise ParameterError("overlap counts must be non-negative")

    @property
    def k(self) -> int:
        return len(self.counts)

    def rho(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / self.n

    def rho_fraction(self, i: int, j: int) -> Fraction:
        return Fraction(self.counts[i][j], self.n)

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    def col_sums(self) -> tuple[int, ...]:
        return tuple(sum(row[j] for row in self.counts) for j in range(self.k))


def overlap(sigma, tau, k: int) -> OverlapMatrix:
    a = as_coloring(sigma, k)
    b = as_coloring(tau, k)
    if len(a) != len(b):
        raise ParameterError("colorings must have equal length")
    joint = np.zeros((k + 1, k + 1), dtype=np.int64)
    np.add.at(joint, (a, b), 1)
    counts = tuple(tuple(int(c) for c in row[1:]) for row in joint[1:])
    return OverlapMatrix(counts, len(a))


def overlap_distance(rho: OverlapMatrix) -> float:
    """Frobenius distance to the uniform k x k matrix."""
    mat = rho.rho()
    return float(np.linalg.norm(mat - 1.0 / rho.k**2))


def default_kappa(k: int) -> float:
    return 1.0 - math.log(k) ** 20 / k


@dataclass(frozen=True)
class StabilityClass:
    s: int
    separable: bool
    kappa: float


def classify_stability(rho: OverlapMatrix, k: int, kappa: float | None = None) -> StabilityClass:
    """s = #entries with k*rho_ij >= kappa; separable iff no entry has
    k*rho_ij strictly inside (0.51, kappa).

    The paper's kappa = 1 - ln^20(k)/k is negative for every desk-scale k,
    so it can be overridden; without an override a non-positive kappa is a
    domain error.
    """
    if rho.k != k:
        raise ParameterError(f"overlap is {rho.k}x{rho.k}, expected k={k}")
    if kappa is None:
        kappa = default_kappa(k)
        if kappa <= 0:
            raise DomainError(
                f"default kappa={kappa:.4g} is non-positive at k={k}; pass an explicit kappa"
            )
    s = 0
    separable = True
    for i in range(k):
        for j in range(k):
            scaled = Fraction(k * rho.counts[i][j], rho.n)
            if scaled >= kappa:
                s += 1
            if Fraction(51, 100) < scaled < kappa:
                separable = False
    return StabilityClass(s=s, separable=separable, kappa=kappa)


def cluster_size(g: Graph, sigma, k: int, kappa: float | None = None,
                 budget: int | None = None) -> int:
    """|{tau in S_k(g) : overlap(sigma, tau) is k-stable}| by exhaustive scan."""
    arr = as_coloring(sigma, k)
    total = 0
    for tau in enumerate_colorings(g, k, budget=budget):
        if classify_stability(overlap(arr, tau, k), k, kappa=kappa).s == k:
            total += 1
    return total


def sample_colorable_gnm(n: int, m: int, k: int, rng: np.random.Generator,
                         budget: int | None = None,
                         max_retries: int = 10**4) -> tuple[Graph, UniformColoringSampler]:
    """G(n,m) conditioned on k-colorability, with its exact-uniform sampler."""
    bound = resolve_budget(budget)
    for _ in range(max_retries):
        g = sample_gnm(n, m, rng)
        try:
            return g, UniformColoringSampler(g, k, budget=bound)
        except DomainError:
            continue
    raise RetryExhaustedError(
        f"no {k}-colorable G({n},{m}) found; likely a non-colorable regime",
        attempts=max_retries,
    )


def overlap_concentration_experiment(n: int, m: int, k: int, graphs: int,
                                     pairs_per_graph: int, seed: int,
                                     workers: int = 1,
                                     budget: int | None = None) -> ExperimentReport:
    """Estimate E<||rho - uniform||_2> over colorable G(n,m) with exact-uniform
    coloring pairs; stderr is taken across per-graph means."""
    streams = split_streams(seed, workers)
    chunks = [graphs // workers + (1 if w < graphs % workers else 0) for w in range(workers)]
    graph_means: list[float] = []
    for rng, count in zip(streams, chunks):
        for _ in range(count):
            g, sampler = sample_colorable_gnm(n, m, k, rng, budget=budget)
            dists = [
                overlap_distance(overlap(sampler.sample(rng), sampler.sample(rng), k))
                for _ in range(pairs_per_graph)
            ]
            graph_means.append(float(np.mean(dists)))
    arr = np.asarray(graph_means)
    stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else float("inf")
    from . import __version__

    return ExperimentReport(
        experiment="overlap_concentration",
        params={"n": n, "m": m, "k": k, "graphs": graphs,
                "pairs_per_graph": pairs_per_graph},
        seed=seed,
        workers=workers,
        rows=[StatRow("mean_overlap_distance", float(arr.mean()), stderr, graphs, False)],
        library_version=__version__,
    )


def profile_concentration_experiment(n: int, m: int, k: int, omega_bound: int,
                                     graphs: int, seed: int, workers: int = 1,
                                     coloring_samples: int = 200, exact: bool = False,
                                     budget: int | None = None) -> ExperimentReport:
    """Estimate the Gibbs probability that ||alpha(Sigma) - uniform||_2 exceeds
    sqrt(omega/n), for each omega in 1..omega_bound."""
    if omega_bound < 1:
        raise ParameterError(f"omega_bound must be >= 1, got {omega_bound}")
    streams = split_streams(seed, workers)
    chunks = [graphs // workers + (1 if w < graphs % workers else 0) for w in range(workers)]
    ubar = 1.0 / k
    per_graph = np.empty((graphs, omega_bound), dtype=np.float64)
    gi = 0
    for rng, count in zip(streams, chunks):
        for _ in range(count):
            g, sampler = sample_colorable_gnm(n, m, k, rng, budget=budget)
            if exact:
                dists = [
                    float(np.linalg.norm(np.bincount(s, minlength=k + 1)[1:] / n - ubar))
                    for s in enumerate_colorings(g, k, budget=budget)
                ]
            else:
                dists = [
                    float(np.linalg.norm(
                        np.bincount(sampler.sample(rng), minlength=k + 1)[1:] / n - ubar))
                    for _ in range(coloring_samples)
                ]
            darr = np.asarray(dists)
            for w in range(1, omega_bound + 1):
                per_graph[gi, w - 1] = float(np.mean(darr > math.sqrt(w / n)))
            gi += 1
    from . import __version__

    rows = []
    for w in range(1, omega_bound + 1):
        col = per_graph[:, w - 1]
        stderr = float(col.std(ddof=1) / np.sqrt(graphs)) if graphs > 1 else float("inf")
        rows.append(StatRow(f"exceed_prob[omega={w}]", float(col.mean()), stderr,
                            graphs, exact))
    return ExperimentReport(
        experiment="profile_concentration",
        params={"n": n, "m": m, "k": k, "omega_bound": omega_bound, "graphs": graphs,
                "coloring_samples": coloring_samples, "exact": exact},
        seed=seed,
        workers=workers,
        rows=rows,
        library_version=__version__,
    )
