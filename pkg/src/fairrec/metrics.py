"""Producer- and customer-side evaluation metrics.

Producer side: satisfied fraction ``H``, exposure entropy ``Z``, exposure
loss ``L`` against top-k.  Customer side: mean average envy ``Y`` and the
mean / standard deviation of normalized utilities.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from fairrec.allocator import exposure_guarantee
from fairrec.baselines import top_k
from fairrec.model import Allocation, FairRecError, Instance, desc_sum, exposure_of


class EmptyExposure(FairRecError):
    pass


class LengthMismatch(FairRecError):
    pass


REPORT_COLUMNS = ("strategy", "k", "alpha", "seed", "H", "Z", "L", "Y", "mu_phi", "std_phi")


@dataclass(frozen=True)
class FairnessReport:
    strategy: str
    k: int
    alpha: float
    seed: int | None
    H: float
    Z: float
    L: float
    Y: float
    mu_phi: float
    std_phi: float
    exposure_guarantee_used: int
    producers_satisfied: int
    y_normalization: str = "customers"

    def row(self) -> dict:
        d = asdict(self)
        return {c: d[c] for c in REPORT_COLUMNS}


def metric_H(exposures, e_bar: float) -> float:
    """Fraction of producers whose exposure reaches ``e_bar``."""
    E = np.asarray(exposures)
    return float((E >= e_bar).mean())


def metric_Z(exposures, m: int, k: int, n: int | None = None) -> float:
    """Base-``n`` entropy of the exposure shares ``E_p / (m*k)``.

    Producers with zero exposure contribute nothing (``0 log 0 = 0``).
    """
    E = np.asarray(exposures, dtype=np.float64)
    n = len(E) if n is None else n
    total = m * k
    if total <= 0 or E.sum() <= 0:
        raise EmptyExposure("exposure vector has no mass")
    if n < 2:
        raise FairRecError("Z needs at least two producers")
    share = E[E > 0] / total
    return float(-(share * np.log(share)).sum() / math.log(n))


def metric_L(exposures_method, exposures_topk) -> float:
    """Mean relative exposure lost with respect to top-k.

    Producers absent from every top-k list have nothing to lose and count 0.
    """
    Em = np.asarray(exposures_method, dtype=np.float64)
    Et = np.asarray(exposures_topk, dtype=np.float64)
    if Em.shape != Et.shape:
        raise LengthMismatch(f"exposure vectors have shapes {Em.shape} and {Et.shape}")
    loss = np.zeros_like(Et)
    pos = Et > 0
    loss[pos] = np.maximum((Et[pos] - Em[pos]) / Et[pos], 0.0)
    return float(loss.mean())


def utilities(inst: Instance, alloc: Allocation, k: int) -> np.ndarray:
    """Normalized utility of every customer for their own bundle."""
    V = np.concatenate([inst.relevance, np.zeros((inst.m, 1))], axis=1)
    num = desc_sum(np.take_along_axis(V, alloc.padded(inst.n), axis=1), k)
    den = inst.topk_mass(k)
    out = np.ones(inst.m)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out


def cross_utilities(
    inst: Instance, alloc: Allocation, k: int, rows: slice | None = None, X: np.ndarray | None = None
) -> np.ndarray:
    """``phi[u, w]`` = normalized utility of customer ``u`` for bundle ``w``.

    ``rows`` restricts ``u`` to a block, keeping memory at ``block x m``.
    Values are capped at 1, the exact upper bound for bundles of at most
    ``k`` items, so rounding never manufactures envy of a top-k bundle.
    """
    V = inst.relevance if rows is None else inst.relevance[rows]
    if X is None:
        X = alloc.to_matrix(inst.n).astype(np.float64)
    raw = V @ X.T
    den = inst.topk_mass(k) if rows is None else inst.topk_mass(k)[rows]
    out = np.ones_like(raw)
    nz = den > 0
    out[nz] = raw[nz] / den[nz, None]
    return np.minimum(out, 1.0)


def _envy_row_sums(inst: Instance, alloc: Allocation, k: int, block: int = 1024) -> np.ndarray:
    m = inst.m
    sums = np.zeros(m)
    own = utilities(inst, alloc, k)
    X = alloc.to_matrix(inst.n).astype(np.float64)
    for start in range(0, m, block):
        sl = slice(start, min(start + block, m))
        phi = cross_utilities(inst, alloc, k, sl, X)
        envy = np.maximum(phi - own[sl, None], 0.0)
        sums[sl] = envy.sum(axis=1)
    return sums


def metric_Y(inst: Instance, alloc: Allocation, k: int, normalization: str = "customers") -> float:
    """Mean average envy among customers.

    ``normalization="customers"`` averages with ``1/m`` and ``1/(m-1)``;
    ``"producers"`` uses ``1/n`` and ``1/(n-1)`` instead.  A single customer
    has no one to envy, so ``m == 1`` gives 0.
    """
    m = inst.m
    if m == 1:
        return 0.0
    if normalization == "customers":
        outer, inner = m, m - 1
    elif normalization == "producers":
        outer, inner = inst.n, inst.n - 1
    else:
        raise ValueError(f"unknown envy normalization {normalization!r}")
    return float(_envy_row_sums(inst, alloc, k).sum() / (outer * inner))


def utility_stats(inst: Instance, alloc: Allocation, k: int) -> tuple[float, float]:
    """Population mean and standard deviation of customer utilities."""
    phi = utilities(inst, alloc, k)
    return float(phi.mean()), float(phi.std())


def lorenz_series(exposures) -> list[tuple[float, float]]:
    """Lorenz curve of producer exposure, ``n + 1`` points from (0, 0) to (1, 1)."""
    E = np.sort(np.asarray(exposures, dtype=np.float64))
    total = E.sum()
    if total <= 0:
        raise EmptyExposure("exposure vector has no mass")
    n = len(E)
    xs = np.arange(n + 1) / n
    ys = np.concatenate([[0.0], np.cumsum(E) / total])
    ys[-1] = 1.0
    return list(zip(xs.tolist(), ys.tolist()))


def lorenz_at(exposures, fraction: float) -> float:
    """Cumulative exposure share held by the least exposed ``fraction`` of producers."""
    pts = lorenz_series(exposures)
    xs, ys = zip(*pts)
    return float(np.interp(fraction, xs, ys))


def utility_cdf_series(inst: Instance, alloc: Allocation, k: int) -> list[float]:
    return np.sort(utilities(inst, alloc, k)).tolist()


def evaluate(
    inst: Instance,
    alloc: Allocation,
    k: int,
    *,
    strategy: str,
    alpha: float = 1.0,
    seed: int | None = None,
    reference: Allocation | None = None,
    e_bar: int | None = None,
    normalization: str = "customers",
) -> FairnessReport:
    """All metrics for one run.

    ``reference`` is the top-k allocation used for ``L``; ``e_bar`` defaults
    to ``floor(alpha*m*k/n)``.
    """
    E = exposure_of(alloc, inst.n)
    if e_bar is None:
        e_bar = exposure_guarantee(inst.m, inst.n, k, alpha)
    if reference is None:
        reference = top_k(inst, k)
    E_ref = exposure_of(reference, inst.n)
    mu, sd = utility_stats(inst, alloc, k)
    return FairnessReport(
        strategy=strategy,
        k=k,
        alpha=alpha,
        seed=seed,
        H=metric_H(E, e_bar),
        Z=metric_Z(E, inst.m, k, inst.n),
        L=metric_L(E, E_ref),
        Y=metric_Y(inst, alloc, k, normalization),
        mu_phi=mu,
        std_phi=sd,
        exposure_guarantee_used=int(e_bar),
        producers_satisfied=int((E >= e_bar).sum()),
        y_normalization=normalization,
    )
