"""World model: disaster area, hovering grid, ground users, RF parameters.

Distances are in meters, rates in bit/s, powers/gains in dB. All types are
immutable after construction and safe to share across parallel workers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict, replace

import numpy as np


class ScenarioError(ValueError):
    """Invalid scenario arguments or scenario file contents."""


@dataclass(frozen=True)
class RfParams:
    """Radio parameters. Defaults are the urban-environment values."""

    p_t: float = -6.0         # transmit power (dB)
    g_t: float = 5.0          # antenna gain (dB)
    p_n: float = -105.0       # noise power (dB)
    b_w: float = 180e3        # per-user bandwidth (Hz)
    f_c: float = 2.5e9        # carrier frequency (Hz)
    c_light: float = 3e8      # speed of light (m/s)
    eta_los: float = 1.0      # LoS shadow fading (dB)
    eta_nlos: float = 20.0    # NLoS shadow fading (dB)
    a_env: float = 9.611725   # LoS-probability parameter a (degree-based fit)
    b_env: float = 0.158062   # LoS-probability parameter b (1/degree)
    r_uav: float = 600.0      # UAV-to-UAV range (m)
    r_user: float = 500.0     # UAV-to-user range (m)

    def __post_init__(self):
        if self.r_uav <= 0 or self.r_user <= 0:
            raise ScenarioError("communication ranges must be positive")
        if self.b_w <= 0:
            raise ScenarioError("bandwidth b_w must be positive")
        if self.f_c <= 0:
            raise ScenarioError("carrier frequency f_c must be positive")
        if self.c_light <= 0:
            raise ScenarioError("speed of light must be positive")
        if self.eta_nlos < self.eta_los:
            raise ScenarioError("eta_nlos must be >= eta_los")


@dataclass(frozen=True)
class UserNode:
    id: int
    x: float       # ground coordinate (m), z = 0
    y: float
    b_min: float   # minimum data rate (bit/s)

    def __post_init__(self):
        if self.b_min < 0:
            raise ScenarioError(f"user {self.id}: b_min must be >= 0")


@dataclass(frozen=True)
class HoverSite:
    id: int
    gx: int        # grid column index
    gy: int        # grid row index
    x: float       # grid-center coordinate (m)
    y: float
    h: float       # hover altitude (m)


@dataclass(frozen=True)
class Scenario:
    length_l: float
    width_w: float
    height_h: float
    delta: float          # grid side length (m)
    altitude_h: float     # hover altitude (m)
    users: tuple[UserNode, ...]
    sites: tuple[HoverSite, ...]
    rf: RfParams
    k_uavs: int
    capacity_c: int
    seed: int

    def __post_init__(self):
        if self.k_uavs < 1:
            raise ScenarioError("k_uavs must be >= 1")
        if self.capacity_c < 1:
            raise ScenarioError("capacity_c must be >= 1")
        nx = _exact_div(self.length_l, self.delta, "length_l")
        ny = _exact_div(self.width_w, self.delta, "width_w")
        if len(self.sites) != nx * ny:
            raise ScenarioError(
                f"expected {nx * ny} grid sites, got {len(self.sites)}")
        cells = set()
        for v in self.sites:
            if (v.gx, v.gy) in cells:
                raise ScenarioError(f"two sites share grid cell ({v.gx},{v.gy})")
            cells.add((v.gx, v.gy))
        for u in self.users:
            if not (0.0 <= u.x <= self.length_l and 0.0 <= u.y <= self.width_w):
                raise ScenarioError(f"user {u.id} at ({u.x},{u.y}) outside area")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def m_sites(self) -> int:
        return len(self.sites)


def _exact_div(total: float, delta: float, name: str) -> int:
    """Number of grid cells along one dimension; errors if not divisible."""
    if delta <= 0:
        raise ScenarioError("delta must be positive")
    k = round(total / delta)
    if k < 1 or abs(total - k * delta) > 1e-6:
        raise ScenarioError(f"{name}={total} is not divisible by delta={delta}")
    return k


def build_grid(length_l: float, width_w: float, delta: float,
               altitude_h: float) -> list[HoverSite]:
    """Hovering sites at the centers of an (L/delta) x (W/delta) grid.

    Ids are row-major: id = gy * (L/delta) + gx.
    """
    if altitude_h <= 0:
        raise ScenarioError("altitude_h must be positive")
    nx = _exact_div(length_l, delta, "length_l")
    ny = _exact_div(width_w, delta, "width_w")
    sites = []
    for gy in range(ny):
        for gx in range(nx):
            sites.append(HoverSite(
                id=gy * nx + gx, gx=gx, gy=gy,
                x=(gx + 0.5) * delta, y=(gy + 0.5) * delta, h=altitude_h))
    return sites


def generate_users(n: int, hotspots: int, pareto_alpha: float,
                   spread_sigma: float, background_frac: float, seed: int,
                   length_l: float, width_w: float,
                   b_min: float = 2000.0) -> list[UserNode]:
    """Fat-tailed synthetic user placement, deterministic in the seed.

    (1 - background_frac) * n users are clustered as 2-D Gaussians
    (std spread_sigma) around hotspot centers whose relative sizes follow a
    Pareto(pareto_alpha) draw; the rest are uniform over the area. All
    coordinates are clamped into [0, L] x [0, W].
    """
    if n < 1:
        raise ScenarioError("n must be >= 1")
    if hotspots < 1:
        raise ScenarioError("hotspots must be >= 1")
    if not (0.0 <= background_frac <= 1.0):
        raise ScenarioError("background_frac must be in [0, 1]")
    if spread_sigma < 0 or pareto_alpha <= 0:
        raise ScenarioError("spread_sigma must be >= 0 and pareto_alpha > 0")

    rng = np.random.default_rng(seed)
    centers = rng.uniform([0.0, 0.0], [length_l, width_w], size=(hotspots, 2))
    weights = 1.0 + rng.pareto(pareto_alpha, size=hotspots)
    weights = weights / weights.sum()

    n_bg = int(round(background_frac * n))
    n_cl = n - n_bg
    counts = _apportion(n_cl, weights)

    xs, ys = [], []
    for c, cnt in zip(centers, counts):
        if cnt == 0:
            continue
        pts = rng.normal(loc=c, scale=spread_sigma, size=(cnt, 2))
        xs.append(pts[:, 0])
        ys.append(pts[:, 1])
    if n_bg > 0:
        bg = rng.uniform([0.0, 0.0], [length_l, width_w], size=(n_bg, 2))
        xs.append(bg[:, 0])
        ys.append(bg[:, 1])
    x = np.clip(np.concatenate(xs), 0.0, length_l)
    y = np.clip(np.concatenate(ys), 0.0, width_w)
    return [UserNode(id=i, x=float(x[i]), y=float(y[i]), b_min=b_min)
            for i in range(n)]


def _apportion(total: int, weights: np.ndarray) -> list[int]:
    """Largest-remainder apportionment of `total` items by weight."""
    quotas = weights * total
    counts = np.floor(quotas).astype(int)
    rem = total - int(counts.sum())
    if rem > 0:
        # stable order: biggest fractional part first, index breaks ties
        frac = quotas - counts
        order = sorted(range(len(weights)), key=lambda i: (-frac[i], i))
        for i in order[:rem]:
            counts[i] += 1
    return counts.tolist()


def make_scenario(length_l: float = 1000.0, width_w: float = 1000.0,
                  height_h: float = 500.0, delta: float = 100.0,
                  altitude_h: float = 300.0, n_users: int = 300,
                  hotspots: int = 5, pareto_alpha: float = 1.5,
                  spread_sigma: float = 150.0, background_frac: float = 0.1,
                  k_uavs: int = 10, capacity_c: int = 100,
                  b_min: float = 2000.0, rf: RfParams | None = None,
                  seed: int = 0) -> Scenario:
    """Generate a full synthetic scenario (desk-scale defaults)."""
    rf = rf if rf is not None else RfParams()
    sites = build_grid(length_l, width_w, delta, altitude_h)
    users = generate_users(n_users, hotspots, pareto_alpha, spread_sigma,
                           background_frac, seed, length_l, width_w, b_min)
    return Scenario(length_l=length_l, width_w=width_w, height_h=height_h,
                    delta=delta, altitude_h=altitude_h, users=tuple(users),
                    sites=tuple(sites), rf=rf, k_uavs=k_uavs,
                    capacity_c=capacity_c, seed=seed)


# ---------------------------------------------------------------------------
# Scenario file format (JSON): top-level keys area / grid / rf / fleet / users.

def save_scenario(s: Scenario, path) -> None:
    doc = {
        "area": {"length_m": s.length_l, "width_m": s.width_w,
                 "height_m": s.height_h},
        "grid": {"delta_m": s.delta, "altitude_m": s.altitude_h},
        "rf": asdict(s.rf),
        "fleet": {"k_uavs": s.k_uavs, "capacity_c": s.capacity_c},
        "users": [{"id": u.id, "x_m": u.x, "y_m": u.y, "b_min_bps": u.b_min}
                  for u in s.users],
        "seed": s.seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ScenarioError(f"scenario file: missing key '{key}' in {where}")
    return doc[key]


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"scenario file: invalid JSON at line {e.lineno}, "
                            f"column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ScenarioError("scenario file: top level must be an object")
    area = _require(doc, "area", "top level")
    grid = _require(doc, "grid", "top level")
    rf_doc = _require(doc, "rf", "top level")
    fleet = _require(doc, "fleet", "top level")
    users_doc = _require(doc, "users", "top level")

    try:
        rf = RfParams(**rf_doc)
    except TypeError as e:
        raise ScenarioError(f"scenario file: bad 'rf' block: {e}") from e
    users = [UserNode(id=int(_require(u, "id", f"users[{i}]")),
                      x=float(_require(u, "x_m", f"users[{i}]")),
                      y=float(_require(u, "y_m", f"users[{i}]")),
                      b_min=float(_require(u, "b_min_bps", f"users[{i}]")))
             for i, u in enumerate(users_doc)]
    if len({u.id for u in users}) != len(users):
        raise ScenarioError("scenario file: duplicate user ids")
    delta = float(_require(grid, "delta_m", "grid"))
    altitude = float(_require(grid, "altitude_m", "grid"))
    length_l = float(_require(area, "length_m", "area"))
    width_w = float(_require(area, "width_m", "area"))
    sites = build_grid(length_l, width_w, delta, altitude)
    return Scenario(
        length_l=length_l, width_w=width_w,
        height_h=float(_require(area, "height_m", "area")),
        delta=delta, altitude_h=altitude,
        users=tuple(users), sites=tuple(sites), rf=rf,
        k_uavs=int(_require(fleet, "k_uavs", "fleet")),
        capacity_c=int(_require(fleet, "capacity_c", "fleet")),
        seed=int(doc.get("seed", 0)))


def with_users(s: Scenario, users) -> Scenario:
    """Copy of `s` with a replaced user list (mobility support)."""
    return replace(s, users=tuple(users))
