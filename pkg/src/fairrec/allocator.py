"""Greedy round-robin allocation and the two-phase FairRec algorithm.

Index convention
----------------
The ordering ``sigma`` is a 0-based array of customer indices.  The
algorithm's resume marker ``x`` is kept in the 1-based form used by the
round-robin description: ``x`` is the position of the last served
customer, so ``sigma[x - 1]`` is that customer and ``sigma[x % m]`` is the
next one in line.  ``x`` starts at ``m`` and stays there when the very first
customer of a round finds nothing feasible.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from fairrec import rng as _rng
from fairrec.model import Allocation, FairRecError, Instance, RunConfig, TieBreak, validate_instance

log = logging.getLogger(__name__)


class InconsistentState(FairRecError):
    pass


class Termination(str, enum.Enum):
    EXHAUSTED_T = "ExhaustedT"
    NO_FEASIBLE_PRODUCT = "NoFeasibleProduct"


@dataclass
class AllocatorState:
    """Mutable bookkeeping shared by the two phases.

    ``S``: remaining copies per product; ``T``: grants still to make;
    ``F``: boolean ``m x n`` matrix, ``F[u, p]`` true while ``u`` may still
    receive ``p``; ``sigma``: customer ordering; ``x``: 1-based resume marker.
    """

    S: np.ndarray
    T: int
    F: np.ndarray
    sigma: np.ndarray
    x: int

    @classmethod
    def fresh(cls, m: int, n: int, copies: int, total: int, sigma: np.ndarray | None = None) -> AllocatorState:
        if sigma is None:
            sigma = np.arange(m, dtype=np.int64)
        return cls(
            S=np.full(n, copies, dtype=np.int64),
            T=int(total),
            F=np.ones((m, n), dtype=bool),
            sigma=np.asarray(sigma, dtype=np.int64).copy(),
            x=m,
        )

    def check(self, partial: Allocation | None = None) -> None:
        m, n = self.F.shape
        if self.S.shape != (n,) or (self.S < 0).any():
            raise InconsistentState("copy budget S must be a nonnegative length-n vector")
        if self.T < 0:
            raise InconsistentState(f"T={self.T} is negative")
        if sorted(self.sigma.tolist()) != list(range(m)):
            raise InconsistentState("sigma is not a permutation of the customers")
        if partial is not None:
            if partial.m != m:
                raise InconsistentState(f"partial allocation covers {partial.m} customers, state has {m}")
            rows, cols = partial.flat()
            if cols.size and (cols.min() < 0 or cols.max() >= n):
                raise InconsistentState("partial allocation names a product outside the instance")
            clash = self.F[rows, cols]
            if clash.any():
                u = int(rows[clash.argmax()])
                raise InconsistentState(f"customer {u} still lists a held product as feasible")


@dataclass(frozen=True)
class PhaseTrace:
    phase: int
    rounds_completed: int
    termination: Termination
    x_final: int
    grants: tuple[tuple[int, int], ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class FairRecTrace:
    copies: int
    sigma: tuple[int, ...]
    phase1: PhaseTrace
    phase2: PhaseTrace | None


def producer_mms_threshold(m: int, n: int, k: int) -> int:
    """Maximin share of exposure when ``m*k`` slots are split among ``n`` producers."""
    return (m * k) // n


def exposure_guarantee(m: int, n: int, k: int, alpha: float = 1.0) -> int:
    """``floor(alpha * m * k / n)``, computed exactly.

    ``alpha`` is read through its shortest decimal repr, so 0.7 means 7/10
    rather than the nearest binary double.
    """
    a = Fraction(repr(float(alpha)))
    return int((a * m * k) // n)


def greedy_round_robin(
    inst: Instance,
    state: AllocatorState,
    partial: Allocation | None = None,
    tie_break: TieBreak = TieBreak.LOWEST_INDEX,
    rng: np.random.Generator | None = None,
    phase: int = 1,
) -> tuple[Allocation, PhaseTrace]:
    """Serve customers cyclically in ``state.sigma`` order.

    Each served customer takes their highest-relevance product among those
    still feasible for them with copies left.  Stops after ``state.T``
    grants or when the current customer has no feasible product.  ``state``
    is updated in place (``S``, ``T``, ``F``, ``x``); the returned allocation
    holds only the products granted by this call.
    """
    state.check(partial)
    tie_break = TieBreak(tie_break)
    if tie_break is TieBreak.SEEDED_RANDOM and rng is None:
        raise FairRecError("seeded-random tie breaking needs a generator")

    V = inst.relevance
    m, n = V.shape
    sigma = state.sigma
    S = state.S
    F = state.F

    bundles: list[list[int]] = [[] for _ in range(m)]
    grants: list[tuple[int, int]] = []
    x = m
    r = 0

    if state.T == 0:
        state.x = x
        return Allocation.empty(m), PhaseTrace(phase, 0, Termination.EXHAUSTED_T, x)

    # -inf marks infeasible entries; real scores are finite so the sentinel is unambiguous.
    masked = np.where(F, V, -np.inf)
    exhausted = np.where(S > 0, 0.0, -np.inf)
    scores = np.empty(n)
    copies = S.tolist()  # plain ints are cheaper to update per grant
    T = state.T
    termination = None

    while termination is None:
        r += 1
        for i in range(m):
            u = int(sigma[i])
            np.add(masked[u], exhausted, out=scores)
            p = int(scores.argmax())
            best = scores[p]
            if best == -np.inf:
                if i != 0:
                    x = i
                else:
                    log.info("phase %d: first customer in order has no feasible product; x stays %d", phase, x)
                termination = Termination.NO_FEASIBLE_PRODUCT
                break
            if tie_break is TieBreak.SEEDED_RANDOM:
                tied = np.flatnonzero(scores == best)
                if tied.size > 1:
                    p = int(tied[rng.integers(tied.size)])
            bundles[u].append(p)
            grants.append((u, p))
            masked[u, p] = -np.inf
            F[u, p] = False
            copies[p] -= 1
            if copies[p] == 0:
                exhausted[p] = -np.inf
            T -= 1
            if T == 0:
                x = i + 1
                termination = Termination.EXHAUSTED_T
                break

    S[:] = copies
    state.T = T
    state.x = x
    delta = Allocation._trusted(tuple(frozenset(b) for b in bundles))
    return delta, PhaseTrace(phase, r, termination, x, tuple(grants))


def fairrec(inst: Instance, cfg: RunConfig) -> tuple[Allocation, FairRecTrace]:
    """Two-phase fair recommendation of exactly ``cfg.k`` products per customer.

    Phase 1 runs greedy round-robin with ``floor(alpha*m*k/n)`` copies of
    every product, which spreads exposure.  Phase 2 lifts the copy limit and
    tops every customer up to ``k``, resuming the round-robin right after the
    customer served last in phase 1.
    """
    inst, cfg = validate_instance(inst, cfg)
    m, n, k = inst.m, inst.n, cfg.k

    if cfg.ordering_seed is None:
        sigma = np.arange(m, dtype=np.int64)
    else:
        sigma = _rng.stream(cfg.ordering_seed, "ordering").permutation(m)
    tie_rng = _rng.stream(cfg.ordering_seed, "tie") if cfg.tie_break is TieBreak.SEEDED_RANDOM else None

    copies = exposure_guarantee(m, n, k, cfg.alpha)
    state = AllocatorState.fresh(m, n, copies, copies * n, sigma)
    A = Allocation.empty(m)
    B, trace1 = greedy_round_robin(inst, state, A, cfg.tie_break, tie_rng, phase=1)
    A = A.union(B)

    trace2 = None
    x = state.x
    held = len(A.bundles[state.sigma[x % m]])
    if held < k:
        state.S[:] = m
        state.T = 0
        if x < m:
            state.sigma = np.roll(state.sigma, -x)
            state.T = m - x
            held += 1
        state.T += m * (k - held)
        C, trace2 = greedy_round_robin(inst, state, A, cfg.tie_break, tie_rng, phase=2)
        A = A.union(C)

    return A, FairRecTrace(copies, tuple(int(s) for s in sigma), trace1, trace2)
