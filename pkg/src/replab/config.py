"""Enumeration budgets and seed-stream derivation.

All Monte Carlo code takes a ``numpy.random.Generator``.  Worker substreams
are derived from a master seed with ``numpy.random.SeedSequence.spawn``,
which is the documented split function: stream ``i`` of ``w`` workers is
``Generator(PCG64(SeedSequence(seed).spawn(w)[i]))``.  Reductions over
worker partials always run in worker order, so a (seed, workers) pair pins
every estimate bit for bit.
"""

from __future__ import annotations

import os

import numpy as np

DEFAULT_BUDGET = 10**8
BUDGET_ENV_VAR = "REPLAB_BUDGET"


def resolve_budget(budget: int | None) -> int:
    """Explicit argument wins, then the REPLAB_BUDGET env var, then 1e8."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV_VAR)
    if env is not None:
        return int(env)
    return DEFAULT_BUDGET


def master_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def split_streams(seed: int, n: int) -> list[np.random.Generator]:
    """n independent substreams of the master seed, in a fixed order."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic integer sub-seed: SeedSequence(seed, spawn_key=key)."""
    ss = np.random.SeedSequence(seed, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])
