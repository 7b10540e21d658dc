"""Experiment harness and command line: scenario generation, single planner
runs, parameter sweeps with CSV + figure reports, mobility/redeployment
simulation, and plan validation.

Subcommands: gen, plan, sweep, mobility, validate. Outputs are deterministic
for identical inputs; wall-clock timings are only embedded when --timing is
given (they are the one non-reproducible quantity).
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .assignment import OracleCache, max_assignment
from .channel import build_rate_table
from .netgraph import build_graph
from .planner import (ALGORITHMS, Plan, run_algorithm, save_plan, load_plan,
                      validate_plan)
from .scenario import (RfParams, Scenario, ScenarioError, UserNode,
                       load_scenario, make_scenario, save_scenario,
                       with_users)

SWEEP_AXES = ("n_users", "k_uavs", "capacity_c", "r_uav")
CSV_HEADER = ("axis", "value", "seed", "algo", "throughput_bps", "served",
              "energy_j", "runtime_s")
DEFAULT_ENERGY_PER_METER = 200.0  # J/m, linear flight-energy coefficient
THREADS_ENV = "UAVPLAN_THREADS"


@dataclass(frozen=True)
class Metrics:
    throughput: float        # bit/s
    served_users: int
    fly_energy_per_uav: float  # J
    runtime: float           # s (0.0 unless timing was requested)
    algo: str
    seed: int

    def __post_init__(self):
        if (self.throughput < 0 or self.served_users < 0
                or self.fly_energy_per_uav < 0 or self.runtime < 0):
            raise ValueError("metrics must be nonnegative")


@dataclass(frozen=True)
class MobilityConfig:
    slots: int = 20
    slot_seconds: float = 120.0
    speed_min: float = 0.5     # m/s, random-waypoint speed range
    speed_max: float = 2.0
    redeploy_threshold: float = 0.05

    def __post_init__(self):
        if self.slot_seconds <= 0:
            raise ValueError("slot_seconds must be positive")
        if not (0.0 < self.redeploy_threshold < 1.0):
            raise ValueError("redeploy_threshold must be in (0, 1)")
        if self.slots < 1:
            raise ValueError("slots must be >= 1")
        if self.speed_min < 0 or self.speed_max < self.speed_min:
            raise ValueError("need 0 <= speed_min <= speed_max")


@dataclass(frozen=True)
class SweepConfig:
    template: dict              # make_scenario kwargs (minus seed)
    axis: str                   # one of SWEEP_AXES
    values: tuple               # nonempty, sorted ascending
    seeds: tuple                # nonempty
    algorithms: tuple = ("appro", "greedy-label", "mcs")
    output: str = "sweep.csv"
    fast_greedy: bool = False
    threads: int = 1
    timing: bool = False
    plots: bool = True
    energy_per_meter: float = DEFAULT_ENERGY_PER_METER
    service_center: tuple | None = None   # (x, y); default: area center

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"axis must be one of {SWEEP_AXES}")
        if not self.values or list(self.values) != sorted(self.values):
            raise ValueError("values must be nonempty and sorted ascending")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")


def fly_energy(p: Plan, service_center, energy_per_meter: float,
               s: Scenario) -> float:
    """Mean flying energy per deployed UAV: straight-line distance in the
    hover plane from above the service center to each hovering site, times
    J/m (the common climb to altitude is excluded). With a common launch
    point the UAV-to-site pairing does not change the mean."""
    if not p.sites:
        raise ValueError("plan has no sites")
    cx, cy = service_center
    total = 0.0
    for j in p.sites:
        v = s.sites[j]
        total += math.hypot(v.x - cx, v.y - cy)
    return energy_per_meter * total / len(p.sites)


def _scenario_for(template: dict, axis: str, value, seed: int) -> Scenario:
    params = dict(template)
    if axis == "r_uav":
        rf = params.get("rf") or RfParams()
        params["rf"] = replace(rf, r_uav=float(value))
    else:
        params[axis] = int(value)
    return make_scenario(seed=seed, **params)


def _sweep_cell(job) -> list[dict]:
    """One (axis value, seed) cell: run every algorithm, validate, measure."""
    (template, axis, value, seed, algorithms, fast_greedy, timing,
     energy_per_meter, center) = job
    s = _scenario_for(template, axis, value, seed)
    rt = build_rate_table(s)
    g = build_graph(s, rt)
    cache = OracleCache()
    if center is None:
        center = (s.length_l / 2.0, s.width_w / 2.0)
    rows = []
    for algo in algorithms:
        t0 = time.perf_counter()
        plan = run_algorithm(algo, s, rt, g, fast_greedy=fast_greedy,
                             cache=cache)
        dt = time.perf_counter() - t0
        violations = validate_plan(plan, s, rt, g)
        if violations:
            raise RuntimeError(
                f"{algo} produced an infeasible plan at {axis}={value} "
                f"seed={seed}:\n  " + "\n  ".join(violations))
        m = Metrics(throughput=plan.throughput,
                    served_users=len(plan.assignment.pairs),
                    fly_energy_per_uav=fly_energy(plan, center,
                                                  energy_per_meter, s),
                    runtime=dt if timing else 0.0,
                    algo=plan.algo, seed=seed)
        rows.append({
            "axis": axis, "value": value, "seed": m.seed, "algo": m.algo,
            "throughput_bps": m.throughput, "served": m.served_users,
            "energy_j": m.fly_energy_per_uav, "runtime_s": m.runtime,
        })
    return rows


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """Run the sweep, write CSV (+ figures), return the data rows.

    Any validate_plan violation aborts the whole run. Cells run in parallel
    across processes; rows are gathered and written in deterministic order.
    """
    jobs = [(cfg.template, cfg.axis, value, seed, cfg.algorithms,
             cfg.fast_greedy, cfg.timing, cfg.energy_per_meter,
             cfg.service_center)
            for value in cfg.values for seed in cfg.seeds]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(_sweep_cell, jobs))
    else:
        chunks = [_sweep_cell(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["value"], r["seed"], r["algo"]))

    summary = []
    for value in cfg.values:
        for algo in sorted({r["algo"] for r in rows}):
            pts = [r for r in rows
                   if r["value"] == value and r["algo"] == algo]
            if not pts:
                continue
            for stat, fn in (("mean", np.mean), ("std", np.std)):
                summary.append({
                    "axis": cfg.axis, "value": value, "seed": stat,
                    "algo": algo,
                    "throughput_bps": float(fn([p["throughput_bps"] for p in pts])),
                    "served": float(fn([p["served"] for p in pts])),
                    "energy_j": float(fn([p["energy_j"] for p in pts])),
                    "runtime_s": float(fn([p["runtime_s"] for p in pts])),
                })

    with open(cfg.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in rows + summary:
            w.writerow([r[k] if not isinstance(r[k], float) else repr(r[k])
                        for k in CSV_HEADER])
    if cfg.plots:
        from .plots import render_sweep_figures
        base = os.path.splitext(str(cfg.output))[0]
        render_sweep_figures(rows, cfg.axis, base)
    return rows


def mobility_sim(s: Scenario, cfg: MobilityConfig, seed: int, *,
                 algo: str = "appro", fast_greedy: bool = True) -> list[dict]:
    """Random-waypoint user mobility with threshold-based redeployment.

    Each slot: move users, plan a candidate deployment for the new
    positions, reassign users to the previous site set, and redeploy only
    when the retained throughput falls more than `redeploy_threshold` below
    the candidate's. Slot records report the served throughput, the
    candidate throughput, and redeployment counters (the slot-1 initial
    deployment is not counted as a redeployment).
    """
    rng = np.random.default_rng(seed)
    n = s.n_users
    pos = np.array([[u.x, u.y] for u in s.users])
    waypoint = rng.uniform([0.0, 0.0], [s.length_l, s.width_w], size=(n, 2))
    speed = rng.uniform(cfg.speed_min, cfg.speed_max, size=n)

    prev_sites = None
    redeploys = 0
    records = []
    for slot in range(1, cfg.slots + 1):
        for i in range(n):
            step = speed[i] * cfg.slot_seconds
            vec = waypoint[i] - pos[i]
            dist = math.hypot(vec[0], vec[1])
            if step >= dist:
                pos[i] = waypoint[i]
                waypoint[i] = rng.uniform([0.0, 0.0],
                                          [s.length_l, s.width_w])
                speed[i] = rng.uniform(cfg.speed_min, cfg.speed_max)
            elif dist > 0:
                pos[i] += vec * (step / dist)
        users_t = [UserNode(id=u.id, x=float(pos[i][0]), y=float(pos[i][1]),
                            b_min=u.b_min) for i, u in enumerate(s.users)]
        s_t = with_users(s, users_t)
        rt_t = build_rate_table(s_t)
        g_t = build_graph(s_t, rt_t)
        cand = run_algorithm(algo, s_t, rt_t, g_t, fast_greedy=fast_greedy,
                             cache=OracleCache())
        if prev_sites is None:
            cur_sites, cur_thr, redeployed = cand.sites, cand.throughput, False
        else:
            old_thr = max_assignment(prev_sites, rt_t, s.capacity_c).throughput
            if old_thr < (1.0 - cfg.redeploy_threshold) * cand.throughput:
                redeployed = True
                redeploys += 1
                cur_sites, cur_thr = cand.sites, cand.throughput
            else:
                redeployed = False
                cur_sites, cur_thr = prev_sites, old_thr
        prev_sites = cur_sites
        records.append({"slot": slot, "throughput_bps": cur_thr,
                        "candidate_bps": cand.throughput,
                        "redeployed": redeployed,
                        "total_redeploys": redeploys,
                        "positions": pos.copy()})  # not written to CSV
    return records


# ---------------------------------------------------------------------------
# CLI

def _add_scenario_args(p: argparse.ArgumentParser):
    p.add_argument("--length", type=float, default=1000.0, help="area length L (m)")
    p.add_argument("--width", type=float, default=1000.0, help="area width W (m)")
    p.add_argument("--height", type=float, default=500.0, help="area height H (m)")
    p.add_argument("--delta", type=float, default=100.0, help="grid side (m)")
    p.add_argument("--altitude", type=float, default=300.0, help="hover altitude h (m)")
    p.add_argument("--n", type=int, default=300, help="number of users")
    p.add_argument("--hotspots", type=int, default=5)
    p.add_argument("--pareto-alpha", type=float, default=1.5)
    p.add_argument("--sigma", type=float, default=150.0, help="hotspot spread (m)")
    p.add_argument("--background-frac", type=float, default=0.1)
    p.add_argument("--k", type=int, default=10, help="fleet size K")
    p.add_argument("--c", type=int, default=100, help="service capacity C")
    p.add_argument("--b-min", type=float, default=2000.0, help="min rate (bit/s)")
    p.add_argument("--r-uav", type=float, default=600.0, help="UAV-UAV range (m)")
    p.add_argument("--r-user", type=float, default=500.0, help="UAV-user range (m)")
    p.add_argument("--seed", type=int, default=0)


def _template_from(args) -> dict:
    rf = RfParams(r_uav=args.r_uav, r_user=args.r_user)
    return dict(length_l=args.length, width_w=args.width, height_h=args.height,
                delta=args.delta, altitude_h=args.altitude, n_users=args.n,
                hotspots=args.hotspots, pareto_alpha=args.pareto_alpha,
                spread_sigma=args.sigma, background_frac=args.background_frac,
                k_uavs=args.k, capacity_c=args.c, b_min=args.b_min, rf=rf)


def _parse_values(text: str, axis: str) -> tuple:
    vals = []
    for tok in text.split(","):
        v = float(tok)
        vals.append(v if axis == "r_uav" else int(v))
    return tuple(vals)


def _parse_seeds(text: str) -> tuple:
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    return tuple(range(int(text)))


def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="uavplan",
        description="Plan connected placements of capacity-limited aerial "
                    "base stations and run desk-scale experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a synthetic scenario file")
    _add_scenario_args(g)
    g.add_argument("--out", required=True)

    pl = sub.add_parser("plan", help="run one placement algorithm")
    pl.add_argument("--scenario", required=True)
    pl.add_argument("--algo", choices=sorted(ALGORITHMS), default="appro")
    pl.add_argument("--out", required=True)
    pl.add_argument("--fast-greedy", action="store_true",
                    help="use the cheaper (1-1/e)/2 knapsack subroutine")
    pl.add_argument("--timing", action="store_true",
                    help="embed wall time in the plan file (breaks "
                         "byte-identical reruns)")
    pl.add_argument("--plot", help="also render a deployment map PNG")

    sw = sub.add_parser("sweep", help="parameter sweep with CSV + figures")
    _add_scenario_args(sw)
    sw.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sw.add_argument("--values", required=True,
                    help="comma-separated axis values, ascending")
    sw.add_argument("--seeds", default="5",
                    help="seed count N (seeds 0..N-1) or comma-separated list")
    sw.add_argument("--algos", default="appro,greedy-label,mcs")
    sw.add_argument("--out", required=True)
    sw.add_argument("--fast-greedy", action="store_true")
    sw.add_argument("--threads", type=int, default=None)
    sw.add_argument("--timing", action="store_true")
    sw.add_argument("--no-plots", action="store_true")

    mo = sub.add_parser("mobility", help="mobility/redeployment simulation")
    mo.add_argument("--scenario", required=True)
    mo.add_argument("--slots", type=int, default=20)
    mo.add_argument("--slot-seconds", type=float, default=120.0)
    mo.add_argument("--speed", default="0.5,2.0",
                    help="waypoint speed range MIN,MAX (m/s)")
    mo.add_argument("--threshold", type=float, default=0.05)
    mo.add_argument("--algo", choices=sorted(ALGORITHMS), default="appro")
    mo.add_argument("--fast-greedy", action="store_true")
    mo.add_argument("--seed", type=int, default=0)
    mo.add_argument("--out", required=True)
    mo.add_argument("--no-plots", action="store_true")

    va = sub.add_parser("validate", help="validate a plan file")
    va.add_argument("--scenario", required=True)
    va.add_argument("--plan", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ScenarioError, ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.cmd == "gen":
        t = _template_from(args)
        s = make_scenario(seed=args.seed, **t)
        save_scenario(s, args.out)
        print(f"wrote scenario with {s.n_users} users, {s.m_sites} sites "
              f"to {args.out}")
        return 0

    if args.cmd == "plan":
        s = load_scenario(args.scenario)
        rt = build_rate_table(s)
        g = build_graph(s, rt)
        t0 = time.perf_counter()
        plan = run_algorithm(args.algo, s, rt, g,
                             fast_greedy=args.fast_greedy)
        dt = time.perf_counter() - t0
        violations = validate_plan(plan, s, rt, g)
        if violations:
            print("infeasible plan:", file=sys.stderr)
            for v in violations:
                print(f"  {v}", file=sys.stderr)
            return 1
        if args.timing:
            plan = Plan(sites=plan.sites, assignment=plan.assignment,
                        throughput=plan.throughput, colors=plan.colors,
                        algo=plan.algo, wall_time=dt)
        save_plan(plan, args.out)
        if args.plot:
            from .plots import render_plan_map
            render_plan_map(plan, s, args.plot)
        print(f"algo={plan.algo} sites={len(plan.sites)} "
              f"served={len(plan.assignment.pairs)} "
              f"throughput_bps={plan.throughput!r}")
        print(f"planning took {dt:.2f} s", file=sys.stderr)
        return 0

    if args.cmd == "sweep":
        cfg = SweepConfig(
            template=_template_from(args), axis=args.axis,
            values=_parse_values(args.values, args.axis),
            seeds=_parse_seeds(args.seeds),
            algorithms=tuple(args.algos.split(",")),
            output=args.out, fast_greedy=args.fast_greedy,
            threads=args.threads if args.threads else _default_threads(),
            timing=args.timing, plots=not args.no_plots)
        rows = run_sweep(cfg)
        print(f"wrote {len(rows)} result rows to {cfg.output}")
        return 0

    if args.cmd == "mobility":
        s = load_scenario(args.scenario)
        lo, hi = (float(x) for x in args.speed.split(","))
        cfg = MobilityConfig(slots=args.slots, slot_seconds=args.slot_seconds,
                             speed_min=lo, speed_max=hi,
                             redeploy_threshold=args.threshold)
        records = mobility_sim(s, cfg, args.seed, algo=args.algo,
                               fast_greedy=args.fast_greedy)
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "throughput_bps", "candidate_bps",
                        "redeployed", "total_redeploys"])
            for r in records:
                w.writerow([r["slot"], repr(r["throughput_bps"]),
                            repr(r["candidate_bps"]),
                            int(r["redeployed"]), r["total_redeploys"]])
        if not args.no_plots:
            from .plots import render_mobility_figure
            render_mobility_figure(records,
                                   os.path.splitext(str(args.out))[0])
        print(f"{len(records)} slots, "
              f"{records[-1]['total_redeploys']} redeployments")
        return 0

    if args.cmd == "validate":
        s = load_scenario(args.scenario)
        rt = build_rate_table(s)
        g = build_graph(s, rt)
        plan = load_plan(args.plan)
        violations = validate_plan(plan, s, rt, g)
        if violations:
            print("plan is infeasible:")
            for v in violations:
                print(f"  {v}")
            return 1
        print("plan is feasible")
        return 0

    raise ValueError(f"unknown command {args.cmd}")


if __name__ == "__main__":
    sys.exit(main())
