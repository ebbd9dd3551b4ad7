"""Instance and allocation data model.

Customers and products are dense 0-based indices: row ``u`` of the relevance
matrix holds customer ``u``'s scores, column ``p`` is product ``p``.  A
product is identified with its producer.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class FairRecError(ValueError):
    """Base class for invalid inputs."""


class NonFiniteRelevance(FairRecError):
    pass


class NegativeRelevance(FairRecError):
    pass


class KOutOfRange(FairRecError):
    pass


class TooFewSlots(FairRecError):
    pass


class AlphaOutOfRange(FairRecError):
    pass


class IndexOutOfRange(FairRecError, IndexError):
    pass


class DuplicateProduct(FairRecError):
    pass


class TieBreak(str, enum.Enum):
    LOWEST_INDEX = "lowest-index"
    SEEDED_RANDOM = "seeded-random"


@dataclass(frozen=True, eq=False)
class Instance:
    """An ``m x n`` matrix of nonnegative relevance scores.

    The matrix is copied to a read-only float64 array on construction.
    """

    relevance: np.ndarray
    _topk_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rel = np.array(self.relevance, dtype=np.float64, copy=True)
        if rel.ndim != 2 or rel.shape[0] < 1 or rel.shape[1] < 1:
            raise FairRecError(f"relevance must be a non-empty 2-D matrix, got shape {rel.shape}")
        _check_scores(rel)
        rel.setflags(write=False)
        object.__setattr__(self, "relevance", rel)

    @property
    def m(self) -> int:
        return self.relevance.shape[0]

    @property
    def n(self) -> int:
        return self.relevance.shape[1]

    def topk_mass(self, k: int) -> np.ndarray:
        """Per-customer sum of the ``k`` largest relevance values (cached)."""
        cached = self._topk_cache.get(k)
        if cached is None:
            k_eff = min(k, self.n)
            if k_eff <= 0:
                cached = np.zeros(self.m)
            else:
                top = np.partition(self.relevance, self.n - k_eff, axis=1)[:, self.n - k_eff:]
                cached = desc_sum(top, k)
            cached.setflags(write=False)
            self._topk_cache[k] = cached
        return cached


def desc_sum(values: np.ndarray, width: int) -> np.ndarray:
    """Row sums taken in descending-value order over rows zero-padded to ``width``.

    Two rows holding the same multiset of values get bit-identical sums, so a
    top-k bundle's utility is exactly 1.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[1] < width:
        pad = np.zeros((values.shape[0], width - values.shape[1]))
        values = np.concatenate([values, pad], axis=1)
    ordered = -np.sort(-values, axis=1)
    return ordered.sum(axis=1)


def _check_scores(rel: np.ndarray) -> None:
    if not np.isfinite(rel).all():
        u, p = np.argwhere(~np.isfinite(rel))[0]
        raise NonFiniteRelevance(f"relevance[{u}, {p}] = {rel[u, p]} is not finite")
    if (rel < 0).any():
        u, p = np.argwhere(rel < 0)[0]
        raise NegativeRelevance(f"relevance[{u}, {p}] = {rel[u, p]} is negative")


@dataclass(frozen=True)
class RunConfig:
    k: int
    alpha: float = 1.0
    ordering_seed: int | None = None
    tie_break: TieBreak = TieBreak.LOWEST_INDEX

    def __post_init__(self) -> None:
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))


@dataclass(frozen=True)
class Allocation:
    """One product set per customer, aligned with the instance rows."""

    bundles: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        bundles = []
        for u, b in enumerate(self.bundles):
            items = [int(p) for p in b]
            fs = frozenset(items)
            if len(fs) != len(items):
                raise DuplicateProduct(f"bundle {u} contains a duplicate product: {sorted(items)}")
            bundles.append(fs)
        object.__setattr__(self, "bundles", tuple(bundles))

    @classmethod
    def _trusted(cls, bundles: tuple[frozenset[int], ...]) -> Allocation:
        # for frozensets of plain ints built internally; skips revalidation
        obj = object.__new__(cls)
        object.__setattr__(obj, "bundles", bundles)
        return obj

    @classmethod
    def empty(cls, m: int) -> Allocation:
        return cls._trusted((frozenset(),) * m)

    @property
    def m(self) -> int:
        return len(self.bundles)

    def sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.bundles], dtype=np.int64)

    def union(self, other: Allocation) -> Allocation:
        if other.m != self.m:
            raise FairRecError(f"cannot merge allocations over {self.m} and {other.m} customers")
        return Allocation._trusted(tuple(a | b for a, b in zip(self.bundles, other.bundles)))

    def to_matrix(self, n: int) -> np.ndarray:
        """Boolean ``m x n`` membership matrix."""
        X = np.zeros((self.m, n), dtype=bool)
        for u, b in enumerate(self.bundles):
            if b:
                idx = np.fromiter(b, dtype=np.int64, count=len(b))
                if idx.min() < 0 or idx.max() >= n:
                    raise IndexOutOfRange(f"bundle {u} has a product index outside [0, {n})")
                X[u, idx] = True
        return X

    def padded(self, n: int) -> np.ndarray:
        """``m x max|R_u|`` index matrix, short rows padded with ``n``.

        Index ``n`` is meant to address an extra all-zero relevance column.
        """
        width = max((len(b) for b in self.bundles), default=0)
        out = np.full((self.m, width), n, dtype=np.int64)
        for u, b in enumerate(self.bundles):
            if b:
                out[u, : len(b)] = sorted(b)
        if out.size and (out.min() < 0 or out[out != n].max(initial=0) >= n):
            raise IndexOutOfRange(f"allocation has a product index outside [0, {n})")
        return out

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        """Parallel (customer, product) index arrays over all grants."""
        sizes = self.sizes()
        rows = np.repeat(np.arange(self.m, dtype=np.int64), sizes)
        cols = np.fromiter(itertools.chain.from_iterable(self.bundles), dtype=np.int64, count=int(sizes.sum()))
        return rows, cols

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]


def validate_instance(inst: Instance | Sequence[Sequence[float]], cfg: RunConfig) -> tuple[Instance, RunConfig]:
    """Check the relevance scores and the regime ``1 <= k < n <= m*k``.

    Returns the ``(instance, config)`` pair unchanged when valid.
    """
    if not isinstance(inst, Instance):
        inst = Instance(np.asarray(inst, dtype=np.float64))
    else:
        _check_scores(inst.relevance)
    m, n, k = inst.m, inst.n, cfg.k
    if isinstance(k, bool) or int(k) != k or k < 1 or k >= n:
        raise KOutOfRange(f"k={k} must satisfy 1 <= k < n={n}")
    if n > m * k:
        raise TooFewSlots(f"n={n} exceeds m*k={m * k}; some producers could never be recommended")
    a = cfg.alpha
    if not isinstance(a, (int, float)) or math.isnan(a) or a < 0 or a > 1:
        raise AlphaOutOfRange(f"alpha={a} must lie in [0, 1]")
    return inst, cfg


def exposure_of(alloc: Allocation, n: int) -> np.ndarray:
    """Number of bundles containing each product, as an int64 vector of length ``n``."""
    exp = np.zeros(n, dtype=np.int64)
    for u, b in enumerate(alloc.bundles):
        for p in b:
            if p < 0 or p >= n:
                raise IndexOutOfRange(f"bundle {u} holds product {p}, outside [0, {n})")
            exp[p] += 1
    return exp


def utility_of(inst: Instance, u: int, bundle: Iterable[int], k: int) -> float:
    """Normalized utility of ``bundle`` for customer ``u``.

    The bundle's relevance sum divided by the sum of ``u``'s ``k`` best
    scores.  A customer whose ``k`` best scores sum to zero is indifferent
    and gets utility 1.
    """
    items = list(bundle)
    if len(items) > k:
        raise FairRecError(f"bundle of size {len(items)} exceeds k={k}")
    row = inst.relevance[u]
    for p in items:
        if p < 0 or p >= inst.n:
            raise IndexOutOfRange(f"product {p} outside [0, {inst.n})")
    num = float(desc_sum(row[items][None, :], k)[0])
    den = float(inst.topk_mass(k)[u])
    if den == 0.0:
        return 1.0
    return num / den
