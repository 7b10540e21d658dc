"""Figure rendering for the report paths: PNG files written next to the
delimited output. Everything is deterministic (fixed sizes, no timestamps),
so re-running a command reproduces the files byte for byte."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_ALGO_STYLE = {
    "appro": ("tab:blue", "o"),
    "appro-fast": ("tab:blue", "o"),
    "greedy-label": ("tab:orange", "s"),
    "mcs": ("tab:green", "^"),
    "brute-force": ("tab:red", "d"),
}

_AXIS_LABEL = {
    "n_users": "number of users n",
    "k_uavs": "number of UAVs K",
    "capacity_c": "service capacity C (users)",
    "r_uav": "UAV-to-UAV range R_uav (m)",
}


def _style(algo):
    return _ALGO_STYLE.get(algo, ("tab:gray", "x"))


def _sweep_series(rows, field):
    """mean/std of `field` per (algo, axis value), sorted."""
    series = {}
    algos = sorted({r["algo"] for r in rows})
    for algo in algos:
        vals = sorted({r["value"] for r in rows if r["algo"] == algo})
        mean, std = [], []
        for v in vals:
            pts = np.array([r[field] for r in rows
                            if r["algo"] == algo and r["value"] == v])
            mean.append(pts.mean())
            std.append(pts.std())
        series[algo] = (vals, mean, std)
    return series


def render_sweep_figures(rows, axis: str, out_base) -> list[str]:
    """Throughput and flying-energy trend figures for one sweep."""
    out_base = str(out_base)
    written = []
    for field, ylabel, suffix in (
            ("throughput_bps", "mean network throughput (bit/s)", "throughput"),
            ("energy_j", "mean flying energy per UAV (J)", "energy")):
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
        for algo, (vals, mean, std) in _sweep_series(rows, field).items():
            color, marker = _style(algo)
            ax.errorbar(vals, mean, yerr=std, color=color, marker=marker,
                        capsize=3, label=algo)
        ax.set_xlabel(_AXIS_LABEL.get(axis, axis))
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        path = f"{out_base}_{suffix}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def render_mobility_figure(records, out_base) -> str:
    """Per-slot served and candidate throughput, with redeployments marked."""
    slots = [r["slot"] for r in records]
    served = [r["throughput_bps"] for r in records]
    cand = [r["candidate_bps"] for r in records]
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    ax.plot(slots, served, color="tab:blue", marker="o", label="served")
    ax.plot(slots, cand, color="tab:gray", linestyle="--", marker=".",
            label="candidate plan")
    redeploy_slots = [r["slot"] for r in records if r["redeployed"]]
    for i, t in enumerate(redeploy_slots):
        ax.axvline(t, color="tab:red", alpha=0.3,
                   label="redeploy" if i == 0 else None)
    ax.set_xlabel("time slot")
    ax.set_ylabel("throughput (bit/s)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    path = f"{out_base}_throughput.png"
    fig.savefig(path)
    plt.close(fig)
    return path


def render_plan_map(plan, s, path) -> str:
    """Deployment map: users, grid sites, selected sites with spectrum
    colors, UAV-to-UAV links, and user associations."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0 * s.width_w / s.length_l),
                           dpi=120)
    ux = [u.x for u in s.users]
    uy = [u.y for u in s.users]
    ax.scatter(ux, uy, s=6, color="0.6", label="users")
    ax.scatter([v.x for v in s.sites], [v.y for v in s.sites], s=8,
               marker="+", color="0.8")

    served_site = {u: j for u, j in plan.assignment.pairs}
    for u, j in plan.assignment.pairs:
        ax.plot([s.users[u].x, s.sites[j].x], [s.users[u].y, s.sites[j].y],
                color="tab:blue", alpha=0.15, linewidth=0.5)
    chosen = sorted(plan.sites)
    for a in chosen:
        for b in chosen:
            if a < b:
                da = s.sites[a]
                db = s.sites[b]
                if np.hypot(da.x - db.x, da.y - db.y) <= s.rf.r_uav:
                    ax.plot([da.x, db.x], [da.y, db.y], color="k",
                            linewidth=1.0, alpha=0.6)
    cmap = matplotlib.colormaps["tab10"]
    for j in chosen:
        v = s.sites[j]
        ax.scatter([v.x], [v.y], s=90, marker="^",
                   color=cmap(plan.colors.get(j, 0) % 10),
                   edgecolors="k", zorder=5)
        ax.annotate(str(j), (v.x, v.y), textcoords="offset points",
                    xytext=(4, 4), fontsize=7)
    ax.set_xlim(0, s.length_l)
    ax.set_ylim(0, s.width_w)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"{plan.algo}: {plan.throughput / 1e6:.2f} Mbit/s, "
                 f"{len(served_site)} users served")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)
