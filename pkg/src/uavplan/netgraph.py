"""The UAV network graph G = (U u V, E) and hop-distance machinery.

Site-site edges exist iff the inter-site distance is <= R_uav (all UAVs share
one altitude, so this is the horizontal distance); user-site edges mirror the
rate-table eligibility. Users never relay, so hop distances and shortest
paths run over the site-to-site subgraph only.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .channel import RateTable
from .scenario import Scenario


class NoPathError(RuntimeError):
    """Requested a path between sites in different components."""


@dataclass
class HopField:
    """BFS result from one root site over the site graph."""

    root: int
    dist: np.ndarray    # (m,) float64 hop counts, inf where unreachable
    parent: np.ndarray  # (m,) int64 predecessor site, -1 for root/unreachable


class NetGraph:
    """Immutable site adjacency plus eligible user edges, with a BFS cache."""

    def __init__(self, site_adj: list[tuple[int, ...]], eligible: np.ndarray,
                 site_xy: np.ndarray):
        self.site_adj = tuple(site_adj)
        self.eligible = eligible      # (n, m) bool, mirrored from RateTable
        self.site_xy = site_xy        # (m, 2) site center coordinates
        self.m = len(site_adj)
        self.n = eligible.shape[0]
        self._hops: dict[int, HopField] = {}

    def neighbors(self, j: int) -> tuple[int, ...]:
        return self.site_adj[j]

    def degree(self, j: int) -> int:
        return len(self.site_adj[j])

    def user_edges(self):
        """Eligible (user, site) pairs."""
        ii, jj = np.nonzero(self.eligible)
        return list(zip(ii.tolist(), jj.tolist()))

    def hop_distances(self, root: int) -> HopField:
        """Minimum hop counts from `root` to every site (BFS, cached).

        Neighbors are explored in ascending site id, so parents and the
        extracted paths are deterministic.
        """
        if not (0 <= root < self.m):
            raise ValueError(f"root {root} is not a valid site id")
        hf = self._hops.get(root)
        if hf is not None:
            return hf
        dist = np.full(self.m, np.inf)
        parent = np.full(self.m, -1, dtype=np.int64)
        dist[root] = 0.0
        q = deque([root])
        while q:
            v = q.popleft()
            for w in self.site_adj[v]:
                if dist[w] == np.inf:
                    dist[w] = dist[v] + 1.0
                    parent[w] = v
                    q.append(w)
        hf = HopField(root=root, dist=dist, parent=parent)
        self._hops[root] = hf
        return hf

    def shortest_path(self, src: int, dst: int) -> list[int]:
        """A minimum-hop site path from src to dst (inclusive, deterministic)."""
        if src == dst:
            return [src]
        hf = self.hop_distances(src)
        if not np.isfinite(hf.dist[dst]):
            raise NoPathError(f"no site-to-site path between {src} and {dst}")
        path = [dst]
        v = dst
        while v != src:
            v = int(hf.parent[v])
            path.append(v)
        path.reverse()
        return path

    def connected(self, sites) -> bool:
        """True iff the induced site subgraph over `sites` is connected."""
        nodes = sorted(set(sites))
        if len(nodes) <= 1:
            return True
        inset = set(nodes)
        seen = {nodes[0]}
        q = deque([nodes[0]])
        while q:
            v = q.popleft()
            for w in self.site_adj[v]:
                if w in inset and w not in seen:
                    seen.add(w)
                    q.append(w)
        return len(seen) == len(nodes)

    def to_dot(self) -> str:
        """DOT export of the site graph (documentation aid)."""
        lines = ["graph sites {"]
        for j in range(self.m):
            x, y = self.site_xy[j]
            lines.append(f'  v{j} [pos="{x},{y}!"];')
        for j in range(self.m):
            for k in self.site_adj[j]:
                if j < k:
                    lines.append(f"  v{j} -- v{k};")
        lines.append("}")
        return "\n".join(lines)


def build_graph(s: Scenario, rt: RateTable) -> NetGraph:
    """Build G from a scenario: site edges by R_uav, user edges by eligibility."""
    xy = np.array([[v.x, v.y] for v in s.sites])
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    adj_mat = (dist <= s.rf.r_uav)
    np.fill_diagonal(adj_mat, False)
    site_adj = [tuple(np.nonzero(adj_mat[j])[0].tolist()) for j in range(len(s.sites))]
    return NetGraph(site_adj=site_adj, eligible=rt.eligible, site_xy=xy)
