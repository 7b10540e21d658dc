"""Monotone-submodular maximization under a knapsack budget, plus the
connectivity-preserving greedy augmentation step.

The default solver is partial enumeration: the best feasible set of size
<= 2 is found exhaustively, and every feasible size-3 seed is extended by
cost-benefit greedy; the best candidate wins. For a monotone submodular
oracle this is a (1 - 1/e)-approximation. The `fast_greedy` mode, intended
for large sweeps, returns the best of three cheap candidates: the
cost-benefit greedy, a pure-gain greedy under the same budget, and the best
singleton (the classic (1 - 1/e)/2 guarantee already follows from the first
and last).

All greedy loops use lazy (priority-queue) marginal-gain evaluation, which is
behaviorally identical to eager re-evaluation for submodular oracles; callers
may seed the queue with per-element optimistic bounds (e.g. singleton values
of the underlying oracle) to avoid a full first pass. Exact identity with
the eager greedy relies on marginal gains never growing as the set expands,
which holds exactly when oracle values are computed without rounding noise
(the rate tables quantize rates so that every throughput sum is exact).
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

Oracle = Callable[[frozenset], float]


@dataclass(frozen=True)
class KnapsackInstance:
    ground: tuple[int, ...]
    cost: Mapping[int, int]          # per-element cost, integers >= 1
    budget: int
    oracle: Oracle                   # monotone submodular (caller's contract)
    upper_bounds: Mapping[int, float] | None = None  # optimistic gain bounds

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        for e in self.ground:
            if self.cost[e] < 1:
                raise ValueError(f"element {e} has cost {self.cost[e]} < 1; "
                                 "exclude unusable elements up front")


class _LazyGains:
    """Lazy argmax over marginal gains, keyed by (priority, element id).

    Stored priorities are upper bounds on the true current priority (valid
    under submodularity since gains only shrink); `pop_best` refreshes
    entries until the top is exact for the current context tag. Equal
    priorities resolve to the smallest element id.
    """

    def __init__(self):
        self._heap: list[tuple[float, int]] = []
        self._bound: dict[int, float] = {}
        self._fresh: dict[int, object] = {}

    def push(self, el: int, bound: float, fresh_tag=None):
        self._bound[el] = bound
        self._fresh[el] = fresh_tag
        heapq.heappush(self._heap, (-bound, el))

    def discard(self, el: int):
        self._bound.pop(el, None)
        self._fresh.pop(el, None)

    def pop_best(self, tag, priority_of: Callable[[int], float]):
        """Return (priority, element) with the maximum exact priority, or
        None when empty. `priority_of` computes the exact current priority."""
        heap = self._heap
        while heap:
            negb, el = heap[0]
            cur = self._bound.get(el)
            if cur is None or -negb != cur:
                heapq.heappop(heap)          # stale duplicate or removed
                continue
            if self._fresh.get(el) == tag:
                heapq.heappop(heap)
                self.discard(el)
                return (cur, el)
            exact = priority_of(el)
            self._fresh[el] = tag
            self._bound[el] = exact
            heapq.heapreplace(heap, (-exact, el))
        return None


def _budgeted_greedy(inst: KnapsackInstance, seed: frozenset,
                     seed_value: float, value_of: Oracle,
                     per_cost: bool = True):
    """Extend `seed` by max marginal gain (per unit cost when `per_cost`)
    among elements that still fit; stops when nothing fits or no gain is
    strictly positive."""
    cur = set(seed)
    cur_val = seed_value
    spent = sum(inst.cost[e] for e in cur)
    ub = inst.upper_bounds
    lazy = _LazyGains()
    for e in inst.ground:
        if e in cur or inst.cost[e] > inst.budget - spent:
            continue
        div = inst.cost[e] if per_cost else 1
        bound = float("inf") if ub is None else ub[e] / div
        lazy.push(e, bound)

    while True:
        remaining = inst.budget - spent

        def priority(e, _cur=frozenset(cur), _val=cur_val):
            if inst.cost[e] > remaining:
                return float("-inf")       # dead: budgets only shrink
            gain = value_of(_cur | {e}) - _val
            return gain / inst.cost[e] if per_cost else gain

        top = lazy.pop_best(len(cur), priority)
        if top is None or top[0] <= 0.0:
            break
        _, e = top
        cur.add(e)
        cur_val = value_of(frozenset(cur))
        spent += inst.cost[e]
    return cur, cur_val


def knapsack_submodular_max(inst: KnapsackInstance,
                            fast_greedy: bool = False) -> set[int]:
    """Feasible set with value >= (1 - 1/e) x optimum (monotone submodular
    oracle assumed); `fast_greedy` weakens the ratio to (1 - 1/e)/2."""
    ground = tuple(sorted(e for e in inst.ground if inst.cost[e] <= inst.budget))
    if inst.budget == 0 or not ground:
        return set()
    inst = KnapsackInstance(ground=ground, cost=inst.cost, budget=inst.budget,
                            oracle=inst.oracle, upper_bounds=inst.upper_bounds)

    def value_of(X: frozenset) -> float:
        return inst.oracle(X)

    empty_val = value_of(frozenset())

    if fast_greedy:
        # max over three cheap candidates: cost-benefit greedy, pure-gain
        # greedy under the same budget, and the best singleton. The ratio
        # guarantee needs only the first and last.
        best_set, best_val = _budgeted_greedy(inst, frozenset(), empty_val,
                                              value_of)
        gain_set, gain_val = _budgeted_greedy(inst, frozenset(), empty_val,
                                              value_of, per_cost=False)
        if gain_val > best_val:
            best_set, best_val = gain_set, gain_val
        best_single = _best_singleton(inst, empty_val, value_of)
        if best_single is not None and best_single[0] > best_val:
            return {best_single[1]}
        return best_set

    # Partial enumeration: exhaustive over sizes <= 2, greedy-extended size-3
    # seeds, best candidate wins (first found kept on ties).
    best_set: set[int] = set()
    best_val = empty_val
    for size in (1, 2):
        for combo in itertools.combinations(ground, size):
            if sum(inst.cost[e] for e in combo) > inst.budget:
                continue
            v = value_of(frozenset(combo))
            if v > best_val:
                best_val, best_set = v, set(combo)
    for combo in itertools.combinations(ground, 3):
        if sum(inst.cost[e] for e in combo) > inst.budget:
            continue
        seed = frozenset(combo)
        cur, cur_val = _budgeted_greedy(inst, seed, value_of(seed), value_of)
        if cur_val > best_val:
            best_val, best_set = cur_val, cur
    return best_set


def _best_singleton(inst: KnapsackInstance, empty_val: float,
                    value_of: Oracle):
    """(value, element) of the best feasible singleton, found lazily."""
    ub = inst.upper_bounds
    lazy = _LazyGains()
    for e in inst.ground:
        lazy.push(e, float("inf") if ub is None else ub[e])
    top = lazy.pop_best("single",
                        lambda e: value_of(frozenset((e,))) - empty_val)
    if top is None:
        return None
    return (top[0] + empty_val, top[1])


def greedy_augment(start, k: int, g, f: Oracle,
                   gain_bounds=None) -> set[int]:
    """Grow `start` to at most `k` sites by repeatedly adding the adjacent
    site with the largest strictly positive marginal f-gain.

    The induced subgraph stays connected; stops early once every neighbor has
    zero (or negative) marginal gain. `gain_bounds` may give optimistic
    per-site marginal bounds (singleton f values).
    """
    cur = set(int(v) for v in start)
    if len(cur) > k:
        raise ValueError(f"|start|={len(cur)} exceeds target size {k}")
    if not g.connected(cur):
        raise ValueError("start set must induce a connected subgraph")
    if len(cur) == k:
        return cur

    cur_val = f(frozenset(cur))
    lazy = _LazyGains()

    def push_neighbors(v):
        for w in g.neighbors(v):
            if w not in cur and w not in lazy._bound:
                bound = float("inf") if gain_bounds is None else float(gain_bounds[w])
                lazy.push(w, bound)

    for v in sorted(cur):
        push_neighbors(v)

    while len(cur) < k:
        frozen = frozenset(cur)
        val = cur_val
        top = lazy.pop_best(len(cur), lambda e: f(frozen | {e}) - val)
        if top is None or top[0] <= 0.0:
            break
        gain, v = top
        cur.add(v)
        cur_val += gain
        push_neighbors(v)
    return cur
