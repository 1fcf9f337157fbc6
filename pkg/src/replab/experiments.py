"""Registered, reproducible experiments: each wraps library operations into
a seeded run that emits an ExperimentReport.

Every experiment accepts ``seed`` and ``workers``; a (config, seed, workers)
triple pins the emitted numbers bit for bit.  Where both ``m`` and ``d`` are
accepted, exactly one must be given; ``d`` is resolved as m = ceil(d n / 2).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .colorings import count_colorings, enumerate_colorings
from .config import derive_seed, split_streams
from .errors import ParameterError
from .graphs import Graph
from .local import (
    dicolored_ball_classes,
    canonical_code,
    reconstruction_corr_graph,
    reconstruction_corr_tree,
    tv_local_vs_uniform,
)
from .moments import f_gradient_check, f_overlap, phi, separation_scan
from .overlaps import (
    overlap_concentration_experiment,
    profile_concentration_experiment,
    sample_colorable_gnm,
)
from .replicas import planted_density, sample_planted_replica
from .reports import ExperimentReport, StatRow
from .trees import (
    RootedColoredTree,
    _enumerate_tree_colorings,
    broadcast_colors,
    gw_shape_probability,
    q_target,
    tree_count_colorings,
)

__all__ = ["ExperimentConfig", "ExperimentSpec", "REGISTRY", "run", "list_experiments"]


class ParamSpec(NamedTuple):
    caster: Callable
    default: object
    help: str


def _int(x):
    return int(x)


def _float(x):
    return float(x)


def _bool(x):
    if isinstance(x, bool):
        return x
    return str(x).lower() in ("1", "true", "yes")


def _int_list(x):
    if isinstance(x, (list, tuple)):
        return tuple(int(v) for v in x)
    if isinstance(x, int):
        return (x,)
    return tuple(int(v) for v in str(x).split(","))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    output: str | None = None
    fmt: str = "csv"


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    description: str
    params: dict[str, ParamSpec]
    runner: Callable


def _resolve_m(n: int, params: dict) -> int:
    m, d = params.get("m"), params.get("d")
    if (m is None) == (d is None):
        raise ParameterError("exactly one of m or d must be given")
    return int(m) if m is not None else math.ceil(d * n / 2)


def _stderr(arr: np.ndarray) -> float:
    return float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else float("inf")


_EDGE_TREE = RootedColoredTree((-1, 0))
# fixed 7-vertex reference tree: root, two children, each with two children
_TREE7 = RootedColoredTree((-1, 0, 0, 1, 1, 2, 2))


def _run_prop41(params, seed, workers):
    n, k, omega = params["n"], params["k"], params["omega"]
    m = _resolve_m(n, params)
    d = 2.0 * m / n
    samples = params["samples"]
    taus = list(_enumerate_tree_colorings(_EDGE_TREE, k, 10**6))
    codes = [canonical_code(_EDGE_TREE, (tau,), validate=False).data for tau in taus]
    pairs = [(i, j) for i in range(len(taus)) for j in range(len(taus))]
    q = q_target(_EDGE_TREE, taus[0], taus[0], d, omega, k)

    streams = split_streams(seed, workers)
    counts = [samples // workers + (1 if w < samples % workers else 0) for w in range(workers)]
    qhat = np.empty((samples, len(pairs)))
    row_i = 0
    for rng, cnt in zip(streams, counts):
        for _ in range(cnt):
            dg = sample_planted_replica(n, m, k, rng)
            classes = dicolored_ball_classes(dg, omega)
            for pi, (i, j) in enumerate(pairs):
                qhat[row_i, pi] = classes.get((codes[i], codes[j]), 0) / n
            row_i += 1

    rows = [StatRow("q_target", q, 0.0, 1, True)]
    max_z = 0.0
    max_excess = -math.inf
    for pi, (i, j) in enumerate(pairs):
        col = qhat[:, pi]
        mean, se = float(col.mean()), _stderr(col)
        rows.append(StatRow(f"Q_mean[tau{i}|tau{j}]", mean, se, samples, False))
        if se > 0:
            max_z = max(max_z, abs(mean - q) / se)
        max_excess = max(max_excess, abs(mean - q) - (3 * se + 5.0 / n))
    rows.append(StatRow("max_abs_z", max_z, 0.0, samples, False))
    rows.append(StatRow("max_excess_over_tolerance", max_excess, 0.0, samples, False))
    return rows, ()


def _run_lemma32(params, seed, workers):
    rows = []
    for i, n in enumerate(params["n"]):
        m = math.ceil(params["d"] * n / 2)
        rep = overlap_concentration_experiment(
            n, m, params["k"], params["graphs"], params["pairs_per_graph"],
            derive_seed(seed, i), workers)
        r = rep.rows[0]
        rows.append(StatRow(f"mean_dist[n={n}]", r.estimate, r.stderr, r.n_samples, r.exact))
    return rows, ()


def _run_claim33(params, seed, workers):
    n = params["n"]
    m = _resolve_m(n, params)
    rep = profile_concentration_experiment(
        n, m, params["k"], params["omega_bound"], params["graphs"], seed, workers,
        coloring_samples=params["coloring_samples"], exact=params["exact"])
    return rep.rows, ()


def _run_cor12(params, seed, workers):
    k, omega, graphs = params["k"], params["omega"], params["graphs"]
    rows = []
    notes = []
    for i, n in enumerate(params["n"]):
        m = math.ceil(params["d"] * n / 2)
        streams = split_streams(derive_seed(seed, i), workers)
        counts = [graphs // workers + (1 if w < graphs % workers else 0)
                  for w in range(workers)]
        means = np.empty(graphs)
        flagged = 0
        gi = 0
        for rng, cnt in zip(streams, counts):
            for _ in range(cnt):
                g, _sampler = sample_colorable_gnm(n, m, k, rng)
                tvs = []
                for v in range(n):
                    res = tv_local_vs_uniform(g, [v], omega, k)
                    tvs.append(res.tv)
                    if not res.union_is_forest:
                        flagged += 1
                means[gi] = float(np.mean(tvs))
                gi += 1
        rows.append(StatRow(f"mean_tv[n={n}]", float(means.mean()), _stderr(means),
                            graphs, True))
        notes.append(f"n={n}: {flagged} non-forest ball unions over {graphs * n} roots")
    return rows, tuple(notes)


def _run_cor13(params, seed, workers):
    n, k, l, graphs = params["n"], params["k"], params["l"], params["graphs"]
    m = _resolve_m(n, params)
    if l < 1:
        raise ParameterError("l must be >= 1")
    streams = split_streams(seed, workers)
    counts = [graphs // workers + (1 if w < graphs % workers else 0) for w in range(workers)]
    means = np.empty(graphs)
    gi = 0
    uniform_mass = 1.0 / k**l
    import itertools as _it

    for rng, cnt in zip(streams, counts):
        for _ in range(cnt):
            g, _sampler = sample_colorable_gnm(n, m, k, rng)
            table = np.asarray(list(enumerate_colorings(g, k)), dtype=np.int64)
            z = len(table)
            tuple_tvs = []
            for roots in _it.permutations(range(n), l):
                cols = table[:, roots]  # (z, l) color tuples across colorings
                keys = np.zeros(z, dtype=np.int64)
                for j in range(l):
                    keys = keys * k + (cols[:, j] - 1)
                freq = np.bincount(keys, minlength=k**l) / z
                tuple_tvs.append(0.5 * float(np.abs(freq - uniform_mass).sum()))
            means[gi] = float(np.mean(tuple_tvs))
            gi += 1
    rows = [StatRow("mean_tv_joint_vs_product", float(means.mean()), _stderr(means),
                    graphs, True)]
    return rows, ("averaged over all ordered tuples of distinct roots",)


def _run_cor14(params, seed, workers):
    n, k, omega = params["n"], params["k"], params["omega"]
    m = _resolve_m(n, params)
    d = 2.0 * m / n
    graphs, tree_samples = params["graphs"], params["tree_samples"]
    streams = split_streams(seed, workers)
    counts = [graphs // workers + (1 if w < graphs % workers else 0) for w in range(workers)]
    vals = np.empty(graphs)
    gi = 0
    for rng, cnt in zip(streams, counts):
        for _ in range(cnt):
            g, _sampler = sample_colorable_gnm(n, m, k, rng)
            v = int(rng.integers(n))
            vals[gi] = reconstruction_corr_graph(g, v, omega, k, mode="exact")
            gi += 1
    tree = reconstruction_corr_tree(d, omega, k, tree_samples,
                                    split_streams(derive_seed(seed, 1), 1)[0])
    rows = [
        StatRow("graph_corr_mean", float(vals.mean()), _stderr(vals), graphs, True),
        StatRow("tree_corr_mean", tree.value, tree.stderr, tree.n_samples, False),
        StatRow("abs_diff", abs(float(vals.mean()) - tree.value), 0.0, graphs, False),
    ]
    return rows, ()


def _run_prop51(params, seed, workers):
    n, k, omega, l = params["n"], params["k"], params["omega"], params["l"]
    m = _resolve_m(n, params)
    d = 2.0 * m / n
    samples = params["samples"]
    taus = list(_enumerate_tree_colorings(_EDGE_TREE, k, 10**6))[:l]
    if len(taus) < l:
        raise ParameterError(f"not enough distinct colorings for l={l}")
    targets = [canonical_code(_EDGE_TREE, (tau,), validate=False).data for tau in taus]
    target_value = 1.0
    for tau in taus:
        target_value *= gw_shape_probability(_EDGE_TREE, d, omega) / tree_count_colorings(
            _EDGE_TREE, k)

    streams = split_streams(seed, workers)
    counts = [samples // workers + (1 if w < samples % workers else 0)
              for w in range(workers)]
    vals = np.empty(samples)
    si = 0
    from .graphs import ball as _ball

    for rng, cnt in zip(streams, counts):
        for _ in range(cnt):
            dg = sample_planted_replica(n, m, k, rng)
            codes = [
                canonical_code(_ball(dg.graph, v, omega), (dg.sigma1,), validate=False).data
                for v in range(n)
            ]
            prod = 1.0
            for t in targets:
                prod *= sum(1 for c in codes if c == t) / n
            vals[si] = prod
            si += 1
    mean, se = float(vals.mean()), _stderr(vals)
    z = abs(mean - target_value) / se if se > 0 else float("inf")
    rows = [
        StatRow("product_statistic_mean", mean, se, samples, False),
        StatRow("target_product", target_value, 0.0, 1, True),
        StatRow("abs_z", z, 0.0, samples, False),
    ]
    return rows, ("colorings drawn from the planted replica marginal",)


def _run_gw_uniformity(params, seed, workers):
    k, draws = params["k"], params["draws"]
    t = _TREE7
    rng = split_streams(seed, max(workers, 1))[0]
    colors = broadcast_colors(t, k, rng, size=draws)
    keys = np.zeros(draws, dtype=np.int64)
    for v in range(t.size):
        keys = keys * k + (colors[:, v] - 1)
    observed_all = np.bincount(keys, minlength=k**t.size)
    proper_keys = []
    for coloring in _enumerate_tree_colorings(t, k, 10**7):
        key = 0
        for c in coloring:
            key = key * k + (c - 1)
        proper_keys.append(key)
    proper_keys.sort()
    observed = observed_all[proper_keys]
    stray = int(observed_all.sum() - observed.sum())
    chi2, p = stats.chisquare(observed)
    rows = [
        StatRow("cells", len(proper_keys), 0.0, draws, True),
        StatRow("chi2", float(chi2), 0.0, draws, False),
        StatRow("p_value", float(p), 0.0, draws, False),
        StatRow("improper_draws", stray, 0.0, draws, False),
    ]
    return rows, ()


def _run_moment_scan(params, seed, workers):
    k, d, eta = params["k"], params["d"], params["eta"]
    rng = split_streams(seed, max(workers, 1))[0]
    check = f_gradient_check(d, k, params["points"], None, rng)
    scan = separation_scan(d, k, eta, params["resolution"])
    alpha_bar = np.full(k, 1.0 / k)
    rho_bar = np.full(k * k, 1.0 / k**2)
    identity_err = abs(f_overlap(rho_bar, d, k) - 2 * phi(alpha_bar, d, k))
    rows = [
        StatRow("f_uniform", scan.f_uniform, 0.0, 1, True),
        StatRow("identity_f_vs_2phi_err", identity_err, 0.0, 1, True),
        StatRow("grad_tangent_max_abs", check.grad_tangent_max_abs, 0.0, check.points, True),
        StatRow("hessian_top_eig_max", check.hessian_top_eig_max, 0.0, check.points, True),
        StatRow("fd_hessian_max_rel_err", check.fd_hessian_max_rel_err, 0.0, check.points, True),
        StatRow("scan_gap", scan.gap, 0.0, scan.grid_points, True),
        StatRow("scan_violated", float(scan.violated), 0.0, scan.grid_points, True),
    ]
    return rows, (scan.marginal_note,)


def _run_density_oracle(params, seed, workers):
    n, m, k, draws = params["n"], params["m"], params["k"], params["draws"]
    rng = split_streams(seed, max(workers, 1))[0]
    observed: dict[tuple, int] = {}
    for _ in range(draws):
        dg = sample_planted_replica(n, m, k, rng)
        key = (dg.graph.edges, dg.sigma1, dg.sigma2)
        observed[key] = observed.get(key, 0) + 1
    import itertools as _it

    expected: dict[tuple, float] = {}
    vertices = list(range(n))
    all_pairs = [(u, v) for u in vertices for v in vertices[u + 1:]]
    for s1 in _it.product(range(1, k + 1), repeat=n):
        for s2 in _it.product(range(1, k + 1), repeat=n):
            allowed = [
                (u, v) for u, v in all_pairs if s1[u] != s1[v] and s2[u] != s2[v]
            ]
            if len(allowed) < m:
                continue
            for edges in _it.combinations(allowed, m):
                g = Graph(n, edges)
                p = planted_density((g, s1, s2), n, m, k)
                if p > 0:
                    expected[(g.edges, s1, s2)] = float(p) * draws
    chi2 = 0.0
    for key, exp_count in expected.items():
        obs = observed.get(key, 0)
        chi2 += (obs - exp_count) ** 2 / exp_count
    df = len(expected) - 1
    p_value = float(stats.chi2.sf(chi2, df))
    min_exp = min(expected.values())
    rows = [
        StatRow("cells", len(expected), 0.0, draws, True),
        StatRow("min_expected_count", min_exp, 0.0, draws, True),
        StatRow("chi2", chi2, 0.0, draws, False),
        StatRow("p_value", p_value, 0.0, draws, False),
    ]
    return rows, ()


def _run_thm22(params, seed, workers):
    n, k, graphs = params["n"], params["k"], params["graphs"]
    m = _resolve_m(n, params)
    streams = split_streams(seed, workers)
    counts = [graphs // workers + (1 if w < graphs % workers else 0) for w in range(workers)]
    lnz = np.empty(graphs)
    gi = 0
    for rng, cnt in zip(streams, counts):
        for _ in range(cnt):
            g, _sampler = sample_colorable_gnm(n, m, k, rng)
            lnz[gi] = math.log(count_colorings(g, k))
            gi += 1
    fm = n * math.log(k) + m * math.log(1 - 1 / k)
    rows = [
        StatRow("mean_ln_z", float(lnz.mean()), _stderr(lnz), graphs, False),
        StatRow("var_ln_z", float(lnz.var(ddof=1)), 0.0, graphs, False),
        StatRow("first_moment_log", fm, 0.0, 1, True),
        StatRow("abs_dev_from_first_moment", abs(float(lnz.mean()) - fm), 0.0, graphs, False),
    ]
    return rows, ()


REGISTRY: dict[str, ExperimentSpec] = {}


def _register(name, description, params, runner):
    REGISTRY[name] = ExperimentSpec(name, description, params, runner)


_register(
    "prop41",
    "dicolored-neighborhood fraction of the planted replica vs its tree target",
    {
        "n": ParamSpec(_int, 300, "vertex count"),
        "m": ParamSpec(_int, None, "edge count (exclusive with d)"),
        "d": ParamSpec(_float, 2.0, "average degree, m = ceil(dn/2)"),
        "k": ParamSpec(_int, 3, "colors"),
        "omega": ParamSpec(_int, 1, "ball radius"),
        "samples": ParamSpec(_int, 200, "planted replica samples"),
    },
    _run_prop41,
)
_register(
    "lemma32_overlap",
    "overlap concentration E<||rho - uniform||_2> across n (trend check)",
    {
        "n": ParamSpec(_int_list, (8, 10, 12), "comma list of vertex counts"),
        "d": ParamSpec(_float, 1.0, "average degree"),
        "k": ParamSpec(_int, 3, "colors"),
        "graphs": ParamSpec(_int, 200, "graph samples per n"),
        "pairs_per_graph": ParamSpec(_int, 100, "coloring pairs per graph"),
    },
    _run_lemma32,
)
_register(
    "claim33_profile",
    "Gibbs probability of an unbalanced color profile, per deviation level",
    {
        "n": ParamSpec(_int, 10, "vertex count"),
        "m": ParamSpec(_int, None, "edge count (exclusive with d)"),
        "d": ParamSpec(_float, 1.0, "average degree"),
        "k": ParamSpec(_int, 2, "colors"),
        "omega_bound": ParamSpec(_int, 4, "max deviation level"),
        "graphs": ParamSpec(_int, 100, "graph samples"),
        "coloring_samples": ParamSpec(_int, 200, "colorings per graph in mc mode"),
        "exact": ParamSpec(_bool, False, "enumerate instead of sampling"),
    },
    _run_claim33,
)
_register(
    "cor12_trend",
    "mean TV of the Gibbs projection on a ball vs the standalone-forest measure",
    {
        "n": ParamSpec(_int_list, (8, 12), "comma list of vertex counts"),
        "d": ParamSpec(_float, 1.0, "average degree"),
        "k": ParamSpec(_int, 3, "colors"),
        "omega": ParamSpec(_int, 1, "ball radius"),
        "graphs": ParamSpec(_int, 200, "graph samples per n"),
    },
    _run_cor12,
)
_register(
    "cor13_joint",
    "TV between joint root-color law and the product of uniforms (radius 0)",
    {
        "n": ParamSpec(_int, 8, "vertex count"),
        "m": ParamSpec(_int, None, "edge count (exclusive with d)"),
        "d": ParamSpec(_float, 1.0, "average degree"),
        "k": ParamSpec(_int, 3, "colors"),
        "l": ParamSpec(_int, 2, "number of roots"),
        "graphs": ParamSpec(_int, 50, "graph samples"),
    },
    _run_cor13,
)
_register(
    "cor14_recon",
    "reconstruction bias on random graphs vs the broadcast-tree bias",
    {
        "n": ParamSpec(_int, 10, "vertex count"),
        "m": ParamSpec(_int, None, "edge count (exclusive with d)"),
        "d": ParamSpec(_float, 1.0, "average degree"),
        "k": ParamSpec(_int, 3, "colors"),
        "omega": ParamSpec(_int, 2, "conditioning radius"),
        "graphs": ParamSpec(_int, 30, "graph samples"),
        "tree_samples": ParamSpec(_int, 2000, "Galton-Watson samples"),
    },
    _run_cor14,
)
_register(
    "prop51_product",
    "product of per-shape neighborhood fractions vs the product of tree targets",
    {
        "n": ParamSpec(_int, 300, "vertex count"),
        "m": ParamSpec(_int, None, "edge count (exclusive with d)"),
        "d": ParamSpec(_float, 2.0, "average degree"),
        "k": ParamSpec(_int, 3, "colors"),
        "omega": ParamSpec(_int, 1, "ball radius"),
        "l": ParamSpec(_int, 2, "number of shapes"),
        "samples": ParamSpec(_int, 200, "planted replica samples"),
    },
    _run_prop51,
)
_register(
    "gw_uniformity",
    "broadcast colorings of a fixed 7-vertex tree vs uniform (chi-square)",
    {
        "k": ParamSpec(_int, 3, "colors"),
        "draws": ParamSpec(_int, 10**5, "broadcast draws"),
    },
    _run_gw_uniformity,
)
_register(
    "moment_scan",
    "stationarity, curvature, and grid separation of the overlap function",
    {
        "k": ParamSpec(_int, 3, "colors"),
        "d": ParamSpec(_float, 2.0, "average degree"),
        "eta": ParamSpec(_float, 0.1, "separation radius"),
        "resolution": ParamSpec(_float, 1.0 / 60, "grid step"),
        "points": ParamSpec(_int, 100, "Hessian sample points"),
    },
    _run_moment_scan,
)
_register(
    "density_oracle",
    "planted replica sampler vs its exact density (chi-square over triples)",
    {
        "n": ParamSpec(_int, 4, "vertex count"),
        "m": ParamSpec(_int, 3, "edge count"),
        "k": ParamSpec(_int, 2, "colors"),
        "draws": ParamSpec(_int, 10**5, "sampler draws"),
    },
    _run_density_oracle,
)
_register(
    "thm22_empirical",
    "spread of ln Z across graph samples vs the first-moment log scale",
    {
        "n": ParamSpec(_int, 6, "vertex count"),
        "m": ParamSpec(_int, None, "edge count (exclusive with d)"),
        "d": ParamSpec(_float, 2.0, "average degree"),
        "k": ParamSpec(_int, 3, "colors"),
        "graphs": ParamSpec(_int, 200, "graph samples"),
    },
    _run_thm22,
)


def list_experiments() -> list[ExperimentSpec]:
    return [REGISTRY[name] for name in sorted(REGISTRY)]


def run(config: ExperimentConfig) -> ExperimentReport:
    if config.experiment not in REGISTRY:
        raise ParameterError(
            f"unknown experiment {config.experiment!r}; known: {sorted(REGISTRY)}"
        )
    spec = REGISTRY[config.experiment]
    params = {}
    for name, pspec in spec.params.items():
        raw = config.params.get(name, pspec.default)
        params[name] = None if raw is None else pspec.caster(raw)
    unknown = set(config.params) - set(spec.params)
    if unknown:
        raise ParameterError(f"unknown parameters for {spec.name}: {sorted(unknown)}")
    if config.workers < 1:
        raise ParameterError("workers must be >= 1")

    start = time.perf_counter()
    rows, notes = spec.runner(params, config.seed, config.workers)
    elapsed = time.perf_counter() - start

    from . import __version__

    report = ExperimentReport(
        experiment=spec.name,
        params={k: v for k, v in params.items() if v is not None},
        seed=config.seed,
        workers=config.workers,
        rows=list(rows),
        library_version=__version__,
        wall_time=elapsed,
        notes=tuple(notes),
    )
    if config.output:
        report.write(config.output, config.fmt)
    return report
