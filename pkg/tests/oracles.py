"""Reference implementations kept deliberately separate from the package.

Written in plain Python with the 1-based indexing of the original
pseudocode so that they can serve as trace interpreters for the
vectorized allocator.
"""

from __future__ import annotations

import itertools
import math


def grr_literal(m, n, S, T, V, sigma, F):
    """Greedy round robin, one pseudocode line at a time.

    ``S`` is a dict product->copies (1-based products), ``sigma`` a 1-based
    list indexed from 1 (element 0 unused), ``F`` a dict customer->set.
    Lowest product index wins ties.  Mutates S and F.
    """
    B = {i: [] for i in range(1, m + 1)}
    x = m
    r = 0
    log = []
    if T == 0:
        return B, F, x, log, T
    while True:
        r += 1
        for i in range(1, m + 1):
            u = sigma[i]
            best = None
            for p in range(1, n + 1):
                if p in F[u] and S[p] != 0:
                    if best is None or V[u][p] > V[u][best]:
                        best = p
            if best is None:
                if i != 1:
                    x = i - 1
                return B, F, x, log, T
            B[u].append(best)
            F[u].discard(best)
            S[best] -= 1
            T -= 1
            log.append((u, best))
            if T == 0:
                x = i
                return B, F, x, log, T


def fairrec_literal(V_rows, k):
    """Two-phase algorithm with identity ordering; returns 0-based bundles and grant log."""
    m, n = len(V_rows), len(V_rows[0])
    V = {u: {p: V_rows[u - 1][p - 1] for p in range(1, n + 1)} for u in range(1, m + 1)}
    A = {u: [] for u in range(1, m + 1)}
    sigma = [None] + list(range(1, m + 1))
    F = {u: set(range(1, n + 1)) for u in range(1, m + 1)}
    ell = (m * k) // n
    S = {p: ell for p in range(1, n + 1)}
    T = ell * n
    B, F, x, log1, _ = grr_literal(m, n, S, T, V, sigma, F)
    for u in A:
        A[u] += B[u]
    log2 = []
    lam = len(A[sigma[(x % m) + 1]])
    if lam < k:
        for p in S:
            S[p] = m
        T = 0
        if x < m:
            sigma = [None] + [sigma[((i + x - 1) % m) + 1] for i in range(1, m + 1)]
            T = m - x
            lam += 1
        T += m * (k - lam)
        C, F, x, log2, _ = grr_literal(m, n, S, T, V, sigma, F)
        for u in A:
            A[u] += C[u]
    bundles = [sorted(p - 1 for p in A[u]) for u in range(1, m + 1)]
    grants = [(u - 1, p - 1) for u, p in log1 + log2]
    return bundles, grants


def ef1_by_removal(V_rows, bundles) -> bool:
    """EF1 via explicit set removal: some item of the other bundle kills the envy."""
    for u, own in enumerate(bundles):
        mine = sum(V_rows[u][p] for p in own)
        for w, other in enumerate(bundles):
            if u == w or not other:
                continue
            if mine >= sum(V_rows[u][p] for p in other):
                continue
            if not any(mine >= sum(V_rows[u][q] for q in other if q != p) for p in other):
                return False
    return True


def mms_slots(m, n, k):
    """Exposure MMS by enumerating how m*k unit slots fall into n bundles.

    Independent of set-partition code: only bundle sizes matter for unit
    values, so enumerate compositions of m*k into n nonnegative parts.
    """
    total = m * k
    best = 0
    for cut in itertools.combinations_with_replacement(range(total + 1), n - 1):
        parts = [b - a for a, b in zip((0,) + cut, cut + (total,))]
        best = max(best, min(parts))
    return best


def z_mp(exposures, m, k):
    """Entropy measure evaluated in 50-digit arithmetic."""
    import mpmath

    mpmath.mp.dps = 50
    n = len(exposures)
    tot = mpmath.mpf(m * k)
    acc = mpmath.mpf(0)
    for e in exposures:
        if e:
            s = mpmath.mpf(e) / tot
            acc -= s * mpmath.log(s) / mpmath.log(n)
    return float(acc)


def top_sum(row, k):
    return sum(sorted(row, reverse=True)[:k])


def phi(row, bundle, k):
    den = top_sum(row, k)
    if den == 0:
        return 1.0
    return sum(row[p] for p in bundle) / den


def y_pairwise(V_rows, bundles, k):
    m = len(bundles)
    if m == 1:
        return 0.0
    tot = 0.0
    for u in range(m):
        for w in range(m):
            if u != w:
                tot += max(phi(V_rows[u], bundles[w], k) - phi(V_rows[u], bundles[u], k), 0.0)
    return tot / (m * (m - 1))


def lorenz_cumsum(exposures):
    E = sorted(exposures)
    tot = sum(E)
    pts = [(0.0, 0.0)]
    run = 0
    for i, e in enumerate(E, 1):
        run += e
        pts.append((i / len(E), run / tot))
    return pts


def isclose(a, b, tol=1e-12):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
