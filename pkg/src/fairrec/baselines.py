"""Comparison strategies: top-k, random-k, mixed-k and poorest-k."""

from __future__ import annotations

import math

import numpy as np

from fairrec import rng as _rng
from fairrec.model import Allocation, Instance, TieBreak


def _from_rows(rows: np.ndarray) -> Allocation:
    return Allocation(tuple(frozenset(r.tolist()) for r in rows))


def _ranked(inst: Instance, tie_break: TieBreak, seed: int | None) -> np.ndarray:
    """Products of every row sorted by descending relevance."""
    V = inst.relevance
    if TieBreak(tie_break) is TieBreak.LOWEST_INDEX:
        return np.argsort(-V, axis=1, kind="stable")
    keys = _rng.stream(seed, "tie").random(V.shape)
    return np.lexsort((keys, -V), axis=1)


def top_k(inst: Instance, k: int, tie_break: TieBreak = TieBreak.LOWEST_INDEX, seed: int | None = None) -> Allocation:
    """Each customer gets their ``k`` most relevant products."""
    return _from_rows(_ranked(inst, tie_break, seed)[:, :k])


def random_k(inst: Instance, k: int, seed: int | None = None) -> Allocation:
    """Each customer gets a uniformly random ``k``-subset of the products."""
    gen = _rng.stream(seed, "random_k")
    keys = gen.random((inst.m, inst.n))
    return _from_rows(np.argpartition(keys, k - 1, axis=1)[:, :k])


def mixed_k(inst: Instance, k: int, seed: int | None = None) -> Allocation:
    """Top ``ceil(k/2)`` products, then the rest uniformly from what is left."""
    head = math.ceil(k / 2)
    ranked = np.argsort(-inst.relevance, axis=1, kind="stable")
    chosen = ranked[:, :head]
    tail = k - head
    if tail == 0:
        return _from_rows(chosen)
    gen = _rng.stream(seed, "mixed_k")
    keys = gen.random((inst.m, inst.n))
    np.put_along_axis(keys, chosen, np.inf, axis=1)
    extra = np.argpartition(keys, tail - 1, axis=1)[:, :tail]
    return _from_rows(np.concatenate([chosen, extra], axis=1))


def poorest_k(inst: Instance, k: int) -> Allocation:
    """Customers in index order each take the ``k`` least exposed products.

    Exposure counts are updated after every customer; ties go to the lower
    product index.  The outcome depends on the customer order.
    """
    exposure = np.zeros(inst.n, dtype=np.int64)
    rows = np.empty((inst.m, k), dtype=np.int64)
    for u in range(inst.m):
        pick = np.argsort(exposure, kind="stable")[:k]
        rows[u] = pick
        exposure[pick] += 1
    return _from_rows(rows)


STRATEGIES = ("fairrec", "top_k", "random_k", "mixed_k", "poorest_k")
