"""Exact capacitated assignment of users to deployed UAVs: the f(S) oracle.

f(S) is the maximum total data rate over assignments where each user is
served at most once, each site serves at most C users, and every served pair
is eligible (in range and above the user's minimum rate). The reference
semantics is maximum weighted matching in the bipartite graph with C virtual
copies of every site; here the matching is solved without materializing
copies when capacity cannot bind, and through a rectangular assignment solve
(scipy) otherwise. Both routes return exact optima.

Because rate-table entries are exact multiples of RATE_QUANTUM, every
throughput value computed here is an exact float and f is exactly monotone
and submodular (no summation noise).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import RateTable

_FORBIDDEN = 1e18  # cost of an ineligible cell; dummy columns keep it unused


@dataclass(frozen=True)
class AssignmentResult:
    pairs: tuple[tuple[int, int], ...]   # (user id, site id), sorted by user
    throughput: float                    # bit/s
    served_per_site: dict[int, int]


@dataclass
class OracleCache:
    """Memo of f values keyed by (table fingerprint, capacity, site set).

    Also caches the all-singleton value vector, which doubles as the
    optimistic marginal-gain bound used by the lazy greedy routines
    (f(S + v) - f(S) <= f({v}) by submodularity). Not shared across
    processes; instantiate one per worker.
    """

    memo: dict = field(default_factory=dict)
    hits: int = 0
    misses: int = 0
    _singletons: dict = field(default_factory=dict)

    def singleton_values(self, rt: RateTable, capacity_c: int) -> np.ndarray:
        key = (rt.fingerprint, capacity_c)
        vals = self._singletons.get(key)
        if vals is None:
            vals = _all_singleton_values(rt, capacity_c)
            self._singletons[key] = vals
            for j in range(rt.m_sites):
                self.memo[(rt.fingerprint, capacity_c, (j,))] = float(vals[j])
        return vals


def _all_singleton_values(rt: RateTable, capacity_c: int) -> np.ndarray:
    """f({j}) for every site j: sum of its top-C eligible rates."""
    m = rt.m_sites
    out = np.zeros(m)
    counts = rt.eligible.sum(axis=0)
    for j in range(m):
        cnt = int(counts[j])
        if cnt == 0:
            continue
        col = rt.rates[rt.eligible[:, j], j]
        if cnt <= capacity_c:
            out[j] = col.sum()
        else:
            out[j] = np.partition(col, cnt - capacity_c)[cnt - capacity_c:].sum()
    return out


def max_assignment(s_sites, rt: RateTable, capacity_c: int) -> AssignmentResult:
    """Optimal assignment of users to the UAVs deployed at `s_sites`."""
    cols = sorted(set(int(j) for j in s_sites))
    if not cols:
        raise ValueError("s_sites must be a nonempty set of site ids")
    if cols[0] < 0 or cols[-1] >= rt.m_sites:
        raise ValueError(f"site ids out of range: {cols}")
    if capacity_c < 1:
        raise ValueError("capacity_c must be >= 1")

    elig = rt.eligible[:, cols]
    rows = np.flatnonzero(elig.any(axis=1))
    if rows.size == 0:
        return AssignmentResult(pairs=(), throughput=0.0, served_per_site={})
    elig = elig[rows]
    rates = rt.rates[np.ix_(rows, np.array(cols))]

    # Fast path: if every user can take its best eligible site without any
    # site exceeding C, that greedy choice meets the unconstrained upper
    # bound and is therefore optimal.
    masked = np.where(elig, rates, -1.0)
    best = np.argmax(masked, axis=1)
    loads = np.bincount(best, minlength=len(cols))
    if loads.max() <= capacity_c:
        chosen = best
    else:
        chosen = _matching_assignment(rates, elig, capacity_c)

    pairs = []
    total = 0.0
    served: dict[int, int] = {}
    for r, c in enumerate(chosen):
        if c < 0:
            continue
        u, j = int(rows[r]), cols[c]
        pairs.append((u, j))
        total += rates[r, c]
        served[j] = served.get(j, 0) + 1
    return AssignmentResult(pairs=tuple(pairs), throughput=float(total),
                            served_per_site=served)


def _matching_assignment(rates: np.ndarray, elig: np.ndarray,
                         capacity_c: int) -> np.ndarray:
    """Capacity-binding case: rectangular assignment over site copies.

    Each site contributes min(C, #eligible users) identical columns; n dummy
    zero-cost columns let any user stay unserved, which makes the minimum-cost
    assignment equal to the maximum-weight matching.
    """
    n, k = rates.shape
    c_eff = np.minimum(elig.sum(axis=0), capacity_c).astype(int)
    neg = np.where(elig, -rates, _FORBIDDEN)
    cost = np.concatenate([np.repeat(neg, c_eff, axis=1), np.zeros((n, n))],
                          axis=1)
    col_site = np.repeat(np.arange(k), c_eff)
    n_real = col_site.size

    # rows come back in ascending order, columns are the assignment
    _row, col = linear_sum_assignment(cost)
    chosen = np.full(n, -1, dtype=int)
    for r in range(n):
        c = col[r]
        if c < n_real:
            site_idx = int(col_site[c])
            assert elig[r, site_idx], "matching used a forbidden edge"
            chosen[r] = site_idx
    return chosen


def f_value(s_sites, rt: RateTable, capacity_c: int,
            cache: OracleCache | None = None) -> float:
    """The f(S) oracle value; f of the empty set is 0. Memoized if a cache
    is supplied."""
    key_sites = tuple(sorted(set(int(j) for j in s_sites)))
    if not key_sites:
        return 0.0
    if cache is None:
        return max_assignment(key_sites, rt, capacity_c).throughput
    key = (rt.fingerprint, capacity_c, key_sites)
    val = cache.memo.get(key)
    if val is not None:
        cache.hits += 1
        return val
    cache.misses += 1
    val = max_assignment(key_sites, rt, capacity_c).throughput
    cache.memo[key] = val
    return val
