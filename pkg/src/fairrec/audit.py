"""Independent verification of allocations.

EF1 checks use raw relevance sums.  Normalized utility divides each
customer's scores by a positive constant, which cannot change any of
that customer's comparisons, so both readings agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fairrec.allocator import exposure_guarantee
from fairrec.metrics import cross_utilities, utilities
from fairrec.model import Allocation, FairRecError, Instance, RunConfig, exposure_of

EF1_ATOL = 1e-9

MMS_MAX_ITEMS = 10
MMS_MAX_AGENTS = 4


class TooLarge(FairRecError):
    pass


def check_ef1(
    inst: Instance, alloc: Allocation, atol: float = EF1_ATOL
) -> tuple[bool, tuple[int, int] | None]:
    """Whether every customer's envy vanishes after dropping one item.

    For each ordered pair ``(u, w)``: ``V_u(A_u) >= V_u(A_w) - max_{p in A_w} V_u(p) - atol``.
    Returns ``(True, None)`` or ``(False, (u, w))`` for the first violating
    pair in row-major order.
    """
    m, n = inst.m, inst.n
    # Extra zero column absorbs the padding of short bundles.
    V = np.concatenate([inst.relevance, np.zeros((m, 1))], axis=1)
    idx = alloc.padded(n)
    if idx.shape[1] == 0:
        return True, None
    own = np.take_along_axis(V, idx, axis=1).sum(axis=1)
    block = max(1, 4_000_000 // (m * idx.shape[1]))
    for start in range(0, m, block):
        stop = min(start + block, m)
        vals = V[start:stop][:, idx]  # (block, m, width)
        slack = own[start:stop, None] - (vals.sum(axis=2) - vals.max(axis=2))
        bad = np.argwhere(slack < -atol)
        if bad.size:
            u, w = bad[0]
            return False, (int(start + u), int(w))
    return True, None


def envy_matrix(inst: Instance, alloc: Allocation, k: int) -> np.ndarray:
    """``envy[u, w] = max(phi_u(R_w) - phi_u(R_u), 0)``; zero diagonal."""
    phi = cross_utilities(inst, alloc, k)
    own = utilities(inst, alloc, k)
    envy = np.maximum(phi - own[:, None], 0.0)
    np.fill_diagonal(envy, 0.0)
    return envy


def _partitions(n_items: int, n_blocks: int):
    """Restricted-growth strings: labelings of items into at most ``n_blocks`` blocks.

    Each set partition appears exactly once; partitions with fewer blocks
    stand for ones padded with empty bundles.
    """
    if n_items == 0:
        yield ()
        return
    labels = [0] * n_items

    def rec(i: int, used: int):
        if i == n_items:
            yield tuple(labels)
            return
        for b in range(min(used + 1, n_blocks)):
            labels[i] = b
            yield from rec(i + 1, max(used, b + 1))

    labels[0] = 0
    yield from rec(1, 1)


def brute_force_mms(valuations, items, agents: int) -> list[float]:
    """Maximin share of each agent by exhaustive partition enumeration.

    ``valuations[a][j]`` is agent ``a``'s value for ``items[j]``.  An agent's
    share is the best, over all splits of the items into ``agents`` bundles,
    of the worst bundle's value.
    """
    items = list(items)
    if agents < 1:
        raise FairRecError("need at least one agent")
    if len(items) > MMS_MAX_ITEMS or agents > MMS_MAX_AGENTS:
        raise TooLarge(
            f"{len(items)} items / {agents} agents exceeds the exhaustive limit "
            f"({MMS_MAX_ITEMS} items, {MMS_MAX_AGENTS} agents)"
        )
    vals = np.asarray(valuations, dtype=np.float64).reshape(-1, len(items))
    shares = []
    for row in vals:
        best = -np.inf
        for labels in _partitions(len(items), agents):
            totals = [0.0] * agents
            for j, b in enumerate(labels):
                totals[b] += row[j]
            best = max(best, min(totals))
        shares.append(float(best))
    return shares


@dataclass(frozen=True)
class AuditResult:
    ef1_holds: bool
    ef1_witness: tuple[int, int] | None
    exactly_k: bool
    mms_satisfied_count: int
    nonzero_exposure: bool
    guarantees_expected: bool
    exposure_threshold: int
    violations: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.violations


def audit_run(
    inst: Instance, cfg: RunConfig, alloc: Allocation, strategy: str = "fairrec", atol: float = EF1_ATOL
) -> AuditResult:
    """Check an allocation against the two-sided fairness contract.

    FairRec runs must be EF1, give everyone exactly ``k`` items, bring at
    least ``n - k`` producers up to ``floor(alpha*m*k/n)`` and, when that
    threshold is positive, give every producer some exposure.  Other
    strategies only get the descriptive flags.
    """
    m, n, k = inst.m, inst.n, cfg.k
    ef1, witness = check_ef1(inst, alloc, atol)
    sizes = alloc.sizes()
    exactly_k = bool((sizes == k).all())
    E = exposure_of(alloc, n)
    ell = exposure_guarantee(m, n, k, cfg.alpha)
    satisfied = int((E >= ell).sum())
    nonzero = bool((E > 0).all())

    expected = strategy == "fairrec"
    violations = []
    if expected:
        if not ef1:
            violations.append(f"EF1 violated: customer {witness[0]} envies customer {witness[1]}")
        if not exactly_k:
            violations.append(f"bundle sizes range {sizes.min()}..{sizes.max()}, expected exactly {k}")
        if satisfied < n - k:
            violations.append(f"{satisfied} producers reach exposure {ell}, expected at least {n - k}")
        if ell >= 1 and not nonzero:
            violations.append(f"{int((E == 0).sum())} producers have zero exposure")
    return AuditResult(ef1, witness, exactly_k, satisfied, nonzero, expected, ell, tuple(violations))
