"""Air-to-ground channel model: probabilistic LoS/NLoS pathloss and rates.

The expected user data rate mixes the LoS and NLoS Shannon rates by the
elevation-angle LoS probability:

    PL      = 20 log10(4 pi f_c d / c) + eta          [dB]
    SNR     = 10^((P_t + g_t - PL - P_N) / 10)        [linear]
    p_los   = 1 / (1 + a exp(-b (theta - a)))         [theta in DEGREES]
    rate    = p_los B_w log2(1 + SNR_los) + (1 - p_los) B_w log2(1 + SNR_nlos)

The fitted constants a, b are degree-based, so theta is measured in degrees
throughout. All distances are 3-D (user at z=0, UAV at altitude h).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .scenario import HoverSite, RfParams, Scenario, UserNode

# Rate-table entries are snapped to multiples of RATE_QUANTUM (bit/s) so that
# throughput sums of any realistic size are exact in float64: every partial
# sum is an integer multiple of 2^-10 below 2^53 * 2^-10 ~ 8.8 Tbit/s.
RATE_QUANTUM = 2.0 ** -10
# Absolute tolerance for rate comparisons (bit/s).
RATE_TOL = 1e-9


@dataclass(frozen=True)
class LinkBudget:
    """All intermediate channel quantities for one (user, site) pair."""

    d_3d: float        # Euclidean UAV-user distance (m)
    theta_deg: float   # elevation angle (degrees)
    pl_los: float      # LoS pathloss (dB)
    pl_nlos: float     # NLoS pathloss (dB)
    p_los: float       # LoS probability
    snr_los: float     # linear SNR on the LoS link
    snr_nlos: float    # linear SNR on the NLoS link
    rate: float        # expected data rate (bit/s)


def pathloss(d_3d: float, los: bool, rf: RfParams) -> float:
    """Average pathloss in dB of a LoS or NLoS link at 3-D distance d_3d."""
    if d_3d <= 0:
        raise ValueError(f"d_3d must be positive, got {d_3d}")
    eta = rf.eta_los if los else rf.eta_nlos
    return 20.0 * math.log10(4.0 * math.pi * rf.f_c * d_3d / rf.c_light) + eta


def p_los(theta_deg: float, rf: RfParams) -> float:
    """LoS probability at elevation angle theta (degrees, in (0, 90])."""
    if not (0.0 < theta_deg <= 90.0):
        raise ValueError(f"theta_deg must be in (0, 90], got {theta_deg}")
    a, b = rf.a_env, rf.b_env
    return 1.0 / (1.0 + a * math.exp(-b * (theta_deg - a)))


def _snr(pl: float, rf: RfParams) -> float:
    return 10.0 ** ((rf.p_t + rf.g_t - pl - rf.p_n) / 10.0)


def link_budget(user: UserNode, site: HoverSite, rf: RfParams) -> LinkBudget:
    """Full link budget for one user-site pair."""
    dx, dy = user.x - site.x, user.y - site.y
    horiz = math.hypot(dx, dy)
    d_3d = math.sqrt(horiz * horiz + site.h * site.h)
    theta = math.degrees(math.atan2(site.h, horiz))
    pl_l = pathloss(d_3d, True, rf)
    pl_n = pathloss(d_3d, False, rf)
    p = p_los(theta, rf)
    snr_l = _snr(pl_l, rf)
    snr_n = _snr(pl_n, rf)
    rate = (p * rf.b_w * math.log2(1.0 + snr_l)
            + (1.0 - p) * rf.b_w * math.log2(1.0 + snr_n))
    return LinkBudget(d_3d=d_3d, theta_deg=theta, pl_los=pl_l, pl_nlos=pl_n,
                      p_los=p, snr_los=snr_l, snr_nlos=snr_n, rate=rate)


def expected_rate(user: UserNode, site: HoverSite, rf: RfParams) -> float:
    """Expected data rate (bit/s) of a user served from a hovering site."""
    return link_budget(user, site, rf).rate


def quantize_rate(rate):
    """Snap a rate (scalar or array) to the nearest multiple of RATE_QUANTUM."""
    return np.round(np.asarray(rate, dtype=np.float64) / RATE_QUANTUM) * RATE_QUANTUM


@dataclass
class RateTable:
    """Precomputed expected rates and eligibility for all (user, site) pairs.

    rates[i, j] is quantized to RATE_QUANTUM multiples (see module docstring);
    eligible[i, j] is True iff d_ij <= R_user and rates[i, j] >= b_min_i.
    Pure function of the Scenario; treat as read-only once built.
    """

    rates: np.ndarray      # (n, m) float64, bit/s
    eligible: np.ndarray   # (n, m) bool
    b_min: np.ndarray      # (n,) float64, bit/s
    fingerprint: str

    @property
    def n_users(self) -> int:
        return self.rates.shape[0]

    @property
    def m_sites(self) -> int:
        return self.rates.shape[1]

    def to_csv(self, path) -> None:
        """Debug export: one row per (user, site) pair."""
        with open(path, "w") as fh:
            fh.write("user_id,site_id,rate_bps,eligible\n")
            n, m = self.rates.shape
            for i in range(n):
                for j in range(m):
                    fh.write(f"{i},{j},{self.rates[i, j]!r},"
                             f"{int(self.eligible[i, j])}\n")


def build_rate_table(s: Scenario) -> RateTable:
    """Vectorized rate/eligibility computation for every (user, site) pair."""
    n, m = s.n_users, s.m_sites
    ux = np.array([u.x for u in s.users])
    uy = np.array([u.y for u in s.users])
    bmin = np.array([u.b_min for u in s.users])
    vx = np.array([v.x for v in s.sites])
    vy = np.array([v.y for v in s.sites])
    h = s.altitude_h
    rf = s.rf

    dx = ux[:, None] - vx[None, :]
    dy = uy[:, None] - vy[None, :]
    horiz = np.hypot(dx, dy)
    d3d = np.sqrt(horiz * horiz + h * h)
    theta = np.degrees(np.arctan2(h, horiz))

    fspl = 20.0 * np.log10(4.0 * np.pi * rf.f_c * d3d / rf.c_light)
    pl_l = fspl + rf.eta_los
    pl_n = fspl + rf.eta_nlos
    snr_l = 10.0 ** ((rf.p_t + rf.g_t - pl_l - rf.p_n) / 10.0)
    snr_n = 10.0 ** ((rf.p_t + rf.g_t - pl_n - rf.p_n) / 10.0)
    p = 1.0 / (1.0 + rf.a_env * np.exp(-rf.b_env * (theta - rf.a_env)))
    rate = (p * rf.b_w * np.log2(1.0 + snr_l)
            + (1.0 - p) * rf.b_w * np.log2(1.0 + snr_n))
    rate = quantize_rate(rate)

    eligible = (d3d <= rf.r_user) & (rate >= bmin[:, None] - RATE_TOL)
    assert rate.shape == (n, m)

    digest = hashlib.sha1()
    digest.update(rate.tobytes())
    digest.update(eligible.tobytes())
    digest.update(bmin.tobytes())
    return RateTable(rates=rate, eligible=eligible, b_min=bmin,
                     fingerprint=digest.hexdigest()[:16])
