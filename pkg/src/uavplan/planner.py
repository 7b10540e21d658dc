"""End-to-end placement algorithms for the connected maximum throughput
problem: the approximation algorithm, two reconstructed comparison baselines,
an exact brute-force solver for tiny instances, the feasibility validator,
and spectrum coloring.

The approximation algorithm, per root site v_j: BFS hop distances, a
knapsack-constrained submodular maximization over the remaining sites with
hop-distance costs and budget K-1, an MST over the chosen nodes in the
hop-metric graph whose tree edges are expanded into shortest paths (yielding
a connected set of at most K sites), and greedy augmentation up to K. The
best root wins. Its value is within (1-1/e)/floor(sqrt(K)) of the optimum.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .assignment import AssignmentResult, OracleCache, f_value, max_assignment
from .channel import RateTable
from .netgraph import NetGraph
from .scenario import Scenario
from .submodular import (KnapsackInstance, _LazyGains, greedy_augment,
                         knapsack_submodular_max)


class InfeasibleError(RuntimeError):
    """A required connection cannot be realized in the site graph."""


@dataclass(frozen=True)
class Plan:
    sites: tuple[int, ...]
    assignment: AssignmentResult
    throughput: float
    colors: dict
    algo: str
    wall_time: float | None = None


@dataclass(frozen=True)
class MetricTree:
    """An MST in the hop-metric graph over one root's chosen node set."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]   # (a, b, hop weight)
    total_weight: int


def _oracle(rt: RateTable, capacity_c: int, cache: OracleCache):
    def f(sites: frozenset) -> float:
        return f_value(sites, rt, capacity_c, cache)
    return f


def _finalize(sites, s: Scenario, rt: RateTable, algo: str) -> Plan:
    sites = tuple(sorted(set(int(j) for j in sites)))
    assignment = max_assignment(sites, rt, s.capacity_c)
    colors = spectrum_coloring(sites, s)
    return Plan(sites=sites, assignment=assignment,
                throughput=assignment.throughput, colors=colors, algo=algo)


def compute_d_bound(k: int) -> int:
    """max(2 floor(sqrt(K-1)), largest odd <= floor(sqrt(4K-3))).

    Analysis scaffolding only (it bounds the subtree size in the ratio
    proof); the running algorithm never consumes it.
    """
    if k < 2:
        raise ValueError(f"compute_d_bound requires k >= 2, got {k}")
    even_part = 2 * math.isqrt(k - 1)
    odd_cap = math.isqrt(4 * k - 3)
    odd_part = odd_cap if odd_cap % 2 == 1 else odd_cap - 1
    return max(even_part, odd_part)


def constrained_max_throughput(root: int, g: NetGraph, f, k: int, *,
                               fast_greedy: bool = False,
                               gain_bounds=None) -> set[int]:
    """Near-optimal site set V_j around `root`: maximize f(V_j + root)
    subject to sum of hop distances to the root <= K-1."""
    budget = k - 1
    if budget <= 0:
        return set()
    hf = g.hop_distances(root)
    ground = []
    cost: dict[int, int] = {}
    for v in range(g.m):
        d = hf.dist[v]
        if v == root or not np.isfinite(d) or d > budget:
            continue
        ground.append(v)
        cost[v] = int(d)
    if not ground:
        return set()

    def oracle(x: frozenset) -> float:
        return f(x | {root})

    bounds = None
    if gain_bounds is not None:
        bounds = {v: float(gain_bounds[v]) for v in ground}
    inst = KnapsackInstance(ground=tuple(ground), cost=cost, budget=budget,
                            oracle=oracle, upper_bounds=bounds)
    return knapsack_submodular_max(inst, fast_greedy=fast_greedy)


def _metric_mst(v_prime, g: NetGraph) -> tuple[MetricTree, set[int]]:
    """MST of the complete hop-weighted graph over v_prime, plus the node set
    of the union of shortest paths realizing its edges."""
    nodes = sorted(set(int(v) for v in v_prime))
    if len(nodes) <= 1:
        return MetricTree(nodes=tuple(nodes), edges=(), total_weight=0), set(nodes)

    cand = []
    for a, b in itertools.combinations(nodes, 2):
        d = g.hop_distances(a).dist[b]
        if not np.isfinite(d):
            raise InfeasibleError(f"sites {a} and {b} are mutually unreachable")
        cand.append((int(d), a, b))
    cand.sort()

    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree_edges = []
    for w, a, b in cand:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree_edges.append((a, b, w))
            if len(tree_edges) == len(nodes) - 1:
                break

    span = set()
    for a, b, _w in tree_edges:
        span.update(g.shortest_path(a, b))
    tree = MetricTree(nodes=tuple(nodes), edges=tuple(tree_edges),
                      total_weight=sum(w for _a, _b, w in tree_edges))
    return tree, span


def connect_via_mst(v_prime, g: NetGraph) -> set[int]:
    """Connected superset S_j of v_prime via MST-guided shortest paths."""
    _tree, span = _metric_mst(v_prime, g)
    return span


def appro_alg(s: Scenario, rt: RateTable, g: NetGraph, *,
              fast_greedy: bool = False, cache: OracleCache | None = None,
              tree_log: list | None = None) -> Plan:
    """The approximation algorithm for the connected maximum throughput
    problem. `fast_greedy` switches the knapsack subroutine to the cheaper
    (1-1/e)/2 variant for large sweeps; `tree_log` collects the per-root
    MetricTrees for diagnostics."""
    cache = cache if cache is not None else OracleCache()
    k = s.k_uavs
    algo = "appro-fast" if fast_greedy else "appro"
    f = _oracle(rt, s.capacity_c, cache)
    singles = cache.singleton_values(rt, s.capacity_c)

    if k == 1 or s.m_sites == 1:
        return _finalize((int(np.argmax(singles)),), s, rt, algo)

    best_sites: tuple[int, ...] | None = None
    best_val = -1.0
    for root in range(s.m_sites):
        v_j = constrained_max_throughput(root, g, f, k,
                                         fast_greedy=fast_greedy,
                                         gain_bounds=singles)
        tree, span = _metric_mst(v_j | {root}, g)
        if tree.total_weight > k - 1 or len(span) > k:
            raise AssertionError(
                f"root {root}: MST weight {tree.total_weight} or |S_j| "
                f"{len(span)} violates the K-1 budget (K={k})")
        if tree_log is not None:
            tree_log.append(tree)
        grown = greedy_augment(span, k, g, f, gain_bounds=singles)
        val = f(frozenset(grown))
        if val > best_val:
            best_val = val
            best_sites = tuple(sorted(grown))
    if best_val <= 0.0:
        return _finalize((0,), s, rt, algo)
    return _finalize(best_sites, s, rt, algo)


def brute_force_opt(s: Scenario, rt: RateTable, g: NetGraph, *,
                    cache: OracleCache | None = None) -> Plan:
    """Exact optimum by enumerating all connected site subsets of size <= K.

    Test oracle only; refuses instances beyond m=15 or K=5.
    """
    m, k = s.m_sites, s.k_uavs
    if m > 15 or k > 5:
        raise ValueError(
            f"brute_force_opt is limited to m <= 15 and K <= 5, "
            f"got m={m}, K={k}")
    cache = cache if cache is not None else OracleCache()
    f = _oracle(rt, s.capacity_c, cache)
    best_sites: tuple[int, ...] = (0,)
    best_val = 0.0
    for size in range(1, min(k, m) + 1):
        for combo in itertools.combinations(range(m), size):
            if not g.connected(combo):
                continue
            val = f(frozenset(combo))
            if val > best_val:
                best_val = val
                best_sites = combo
    return _finalize(best_sites, s, rt, "brute-force")


def spectrum_coloring(sites, s: Scenario) -> dict[int, int]:
    """Greedy proper coloring (largest degree first) of the spectrum conflict
    graph: two deployed sites conflict iff their distance is <= 2 R_user."""
    nodes = sorted(set(int(j) for j in sites))
    if not nodes:
        raise ValueError("sites must be nonempty")
    limit = 2.0 * s.rf.r_user
    adj = {v: set() for v in nodes}
    for a, b in itertools.combinations(nodes, 2):
        sa, sb = s.sites[a], s.sites[b]
        if math.hypot(sa.x - sb.x, sa.y - sb.y) <= limit:
            adj[a].add(b)
            adj[b].add(a)
    order = sorted(nodes, key=lambda v: (-len(adj[v]), v))
    colors: dict[int, int] = {}
    for v in order:
        used = {colors[w] for w in adj[v] if w in colors}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def validate_plan(p: Plan, s: Scenario, rt: RateTable,
                  g: NetGraph) -> list[str]:
    """All violations of the problem constraints (empty list = feasible).

    Constraint numbers follow the integer program: (7) capacity, (8)
    connectivity, (9) fleet size, (10) minimum rate, (11) single
    association, (12) association range.
    """
    out: list[str] = []
    k, c = s.k_uavs, s.capacity_c
    siteset = set(p.sites)

    if len(p.sites) != len(siteset):
        out.append("plan consistency: duplicate site ids in plan")
    if len(siteset) > k:
        out.append(f"constraint (9): {len(siteset)} sites deployed exceeds "
                   f"fleet size K={k}")
    if siteset and not g.connected(siteset):
        out.append(f"constraint (8): deployed sites {sorted(siteset)} do not "
                   "induce a connected subgraph")

    served: dict[int, int] = {}
    seen_users: set[int] = set()
    total = 0.0
    for u, j in p.assignment.pairs:
        if not (0 <= u < s.n_users) or not (0 <= j < s.m_sites):
            out.append(f"plan consistency: pair ({u},{j}) references an "
                       "unknown user or site")
            continue
        if j not in siteset:
            out.append(f"plan consistency: pair ({u},{j}) uses a site "
                       "outside the plan")
        if u in seen_users:
            out.append(f"constraint (11): user {u} served by more than one UAV")
        seen_users.add(u)
        served[j] = served.get(j, 0) + 1
        total += rt.rates[u, j]
        if not rt.eligible[u, j]:
            user, site = s.users[u], s.sites[j]
            d = math.sqrt((user.x - site.x) ** 2 + (user.y - site.y) ** 2
                          + site.h ** 2)
            if d > s.rf.r_user:
                out.append(f"constraint (12): user {u} is {d:.1f} m from "
                           f"site {j}, beyond R_user={s.rf.r_user}")
            else:
                out.append(f"constraint (10): user {u} rate "
                           f"{rt.rates[u, j]:.1f} bit/s below its minimum "
                           f"{user.b_min:.1f}")
    for j, cnt in sorted(served.items()):
        if cnt > c:
            out.append(f"constraint (7): site {j} serves {cnt} users "
                       f"exceeding capacity C={c}")
    if total != p.throughput:
        out.append(f"plan consistency: throughput field {p.throughput!r} "
                   f"differs from pair sum {total!r}")

    limit = 2.0 * s.rf.r_user
    for a, b in itertools.combinations(sorted(siteset), 2):
        sa, sb = s.sites[a], s.sites[b]
        if math.hypot(sa.x - sb.x, sa.y - sb.y) <= limit:
            ca, cb = p.colors.get(a), p.colors.get(b)
            if ca is None or cb is None or ca == cb:
                out.append(f"spectrum: conflicting sites {a} and {b} share a "
                           "color (or lack one)")
    return out


def greedy_label_baseline(s: Scenario, rt: RateTable, g: NetGraph, *,
                          cache: OracleCache | None = None) -> Plan:
    """Reconstructed comparison baseline: each site gets a greedy
    marginal-profit label (its gain at the step the capacity-aware greedy
    would pick it), then the best-labeled connected K-subgraph is grown
    greedily by label sum."""
    cache = cache if cache is not None else OracleCache()
    k = s.k_uavs
    f = _oracle(rt, s.capacity_c, cache)
    singles = cache.singleton_values(rt, s.capacity_c)
    if k == 1 or s.m_sites == 1:
        return _finalize((int(np.argmax(singles)),), s, rt, "greedy-label")

    labels = np.zeros(s.m_sites)
    cur: set[int] = set()
    cur_val = 0.0
    lazy = _LazyGains()
    for v in range(s.m_sites):
        lazy.push(v, float(singles[v]))
    while True:
        frozen, val = frozenset(cur), cur_val
        top = lazy.pop_best(len(cur), lambda e: f(frozen | {e}) - val)
        if top is None or top[0] <= 0.0:
            break
        gain, v = top
        labels[v] = gain
        cur.add(v)
        cur_val += gain
    if cur_val <= 0.0:
        return _finalize((0,), s, rt, "greedy-label")

    grown = {int(np.argmax(labels))}
    while len(grown) < k:
        frontier = sorted({w for v in grown for w in g.neighbors(v)} - grown)
        if not frontier:
            break
        grown.add(max(frontier, key=lambda w: (labels[w], -w)))
    return _finalize(grown, s, rt, "greedy-label")


def mcs_baseline(s: Scenario, rt: RateTable, g: NetGraph, *,
                 cache: OracleCache | None = None) -> Plan:
    """Reconstructed comparison baseline: per root, greedily pick
    floor(sqrt(K)) sites by marginal f-gain within hop radius
    floor(sqrt(K))-1, connect them to the root via shortest paths, augment
    to K, and keep the best root."""
    cache = cache if cache is not None else OracleCache()
    k = s.k_uavs
    f = _oracle(rt, s.capacity_c, cache)
    singles = cache.singleton_values(rt, s.capacity_c)
    if k == 1 or s.m_sites == 1:
        return _finalize((int(np.argmax(singles)),), s, rt, "mcs")

    r = math.isqrt(k)
    radius = r - 1
    best_sites: tuple[int, ...] | None = None
    best_val = -1.0
    for root in range(s.m_sites):
        hf = g.hop_distances(root)
        ball = [v for v in range(s.m_sites)
                if v != root and hf.dist[v] <= radius]
        picked = {root}
        picked_val = f(frozenset(picked))
        lazy = _LazyGains()
        for v in ball:
            lazy.push(v, float(singles[v]))
        while len(picked) < r:
            frozen, val = frozenset(picked), picked_val
            top = lazy.pop_best(len(picked), lambda e: f(frozen | {e}) - val)
            if top is None or top[0] <= 0.0:
                break
            gain, v = top
            picked.add(v)
            picked_val += gain
        span: set[int] = set()
        for v in sorted(picked):
            span.update(g.shortest_path(root, v))
        grown = greedy_augment(span, k, g, f, gain_bounds=singles)
        val = f(frozenset(grown))
        if val > best_val:
            best_val = val
            best_sites = tuple(sorted(grown))
    if best_val <= 0.0:
        return _finalize((0,), s, rt, "mcs")
    return _finalize(best_sites, s, rt, "mcs")


ALGORITHMS = {
    "appro": appro_alg,
    "greedy-label": greedy_label_baseline,
    "mcs": mcs_baseline,
    "brute-force": brute_force_opt,
}


def run_algorithm(name: str, s: Scenario, rt: RateTable, g: NetGraph, *,
                  fast_greedy: bool = False,
                  cache: OracleCache | None = None) -> Plan:
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm '{name}'; "
                         f"choose from {sorted(ALGORITHMS)}")
    if name == "appro":
        return appro_alg(s, rt, g, fast_greedy=fast_greedy, cache=cache)
    return ALGORITHMS[name](s, rt, g, cache=cache)


# ---------------------------------------------------------------------------
# Plan files (JSON)

def save_plan(p: Plan, path) -> None:
    doc = {
        "algo": p.algo,
        "sites": list(p.sites),
        "assignment": [[u, j] for u, j in p.assignment.pairs],
        "served_per_site": {str(j): c
                            for j, c in sorted(p.assignment.served_per_site.items())},
        "throughput_bps": p.throughput,
        "colors": {str(j): c for j, c in sorted(p.colors.items())},
        "wall_time_s": p.wall_time,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path) -> Plan:
    with open(path) as fh:
        doc = json.load(fh)
    pairs = tuple((int(u), int(j)) for u, j in doc["assignment"])
    served = {int(j): int(c) for j, c in doc["served_per_site"].items()}
    assignment = AssignmentResult(pairs=pairs,
                                  throughput=float(doc["throughput_bps"]),
                                  served_per_site=served)
    return Plan(sites=tuple(int(j) for j in doc["sites"]),
                assignment=assignment,
                throughput=float(doc["throughput_bps"]),
                colors={int(j): int(c) for j, c in doc["colors"].items()},
                algo=str(doc["algo"]),
                wall_time=doc.get("wall_time_s"))
