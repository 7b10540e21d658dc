import math

import numpy as np
import pytest

from uavplan.channel import (RATE_QUANTUM, build_rate_table, expected_rate,
                             link_budget, p_los, pathloss, quantize_rate)
from uavplan.scenario import HoverSite, RfParams, UserNode, make_scenario

URBAN = RfParams()  # urban defaults: eta 1/20 dB, a=9.611725, b=0.158062


def test_pathloss_unit_argument_gives_eta():
    # at d = c / (4 pi f_c) the log term vanishes exactly
    d0 = URBAN.c_light / (4 * math.pi * URBAN.f_c)
    assert pathloss(d0, True, URBAN) == pytest.approx(URBAN.eta_los, abs=1e-12)
    assert pathloss(d0, False, URBAN) == pytest.approx(URBAN.eta_nlos, abs=1e-12)


def test_pathloss_at_300m():
    assert pathloss(300.0, True, URBAN) == pytest.approx(90.943, abs=0.01)
    assert pathloss(300.0, False, URBAN) == pytest.approx(109.943, abs=0.01)


def test_pathloss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        pathloss(0.0, True, URBAN)
    with pytest.raises(ValueError):
        pathloss(-5.0, False, URBAN)


def test_pathloss_gap_equals_eta_gap():
    for d in (1.0, 10.0, 250.0, 4000.0):
        gap = pathloss(d, False, URBAN) - pathloss(d, True, URBAN)
        assert gap == pytest.approx(URBAN.eta_nlos - URBAN.eta_los, abs=1e-12)


def test_p_los_at_theta_equal_a():
    # exponent vanishes at theta = a, leaving 1 / (1 + a)
    val = p_los(URBAN.a_env, URBAN)
    assert val == pytest.approx(1.0 / (1.0 + URBAN.a_env), abs=1e-12)
    assert val == pytest.approx(0.0942354, abs=1e-6)


def test_p_los_at_zenith():
    assert p_los(90.0, URBAN) == pytest.approx(0.99997, abs=1e-4)


def test_p_los_monotone_and_bounded():
    thetas = np.linspace(0.5, 90.0, 200)
    vals = [p_los(t, URBAN) for t in thetas]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_p_los_domain():
    with pytest.raises(ValueError):
        p_los(0.0, URBAN)
    with pytest.raises(ValueError):
        p_los(90.0001, URBAN)


def test_expected_rate_beneath_uav():
    site = HoverSite(id=0, gx=0, gy=0, x=0.0, y=0.0, h=300.0)
    user = UserNode(id=0, x=0.0, y=0.0, b_min=0.0)
    rate = expected_rate(user, site, URBAN)
    assert rate == pytest.approx(793.3e3, rel=0.01)
    lb = link_budget(user, site, URBAN)
    assert lb.theta_deg == 90.0
    assert lb.d_3d == 300.0
    # SNR_los in dB: -6 + 5 - 90.943 + 105 = 13.057
    assert 10 * math.log10(lb.snr_los) == pytest.approx(13.057, abs=0.01)


def test_rate_zero_bandwidth():
    rf = RfParams(b_w=1e-300)  # b_w must stay positive; rate scales to ~0
    site = HoverSite(id=0, gx=0, gy=0, x=0.0, y=0.0, h=300.0)
    user = UserNode(id=0, x=10.0, y=0.0, b_min=0.0)
    assert expected_rate(user, site, rf) == pytest.approx(0.0, abs=1e-280)


def test_rate_decreases_with_horizontal_distance():
    site = HoverSite(id=0, gx=0, gy=0, x=0.0, y=0.0, h=300.0)
    rates = [expected_rate(UserNode(id=0, x=d, y=0.0, b_min=0.0), site, URBAN)
             for d in np.linspace(0.0, 2000.0, 60)]
    assert all(b < a for a, b in zip(rates, rates[1:]))
    assert all(r >= 0 and math.isfinite(r) for r in rates)


def test_rate_table_matches_pairwise_recomputation():
    s = make_scenario(length_l=200, width_w=200, delta=100, altitude_h=120,
                      n_users=3, k_uavs=2, capacity_c=2,
                      rf=RfParams(r_uav=300, r_user=260), seed=5)
    rt = build_rate_table(s)
    for i, u in enumerate(s.users):
        for j, v in enumerate(s.sites):
            raw = expected_rate(u, v, s.rf)
            assert rt.rates[i, j] == float(quantize_rate(raw))
            d = math.sqrt((u.x - v.x) ** 2 + (u.y - v.y) ** 2 + v.h ** 2)
            expect = (d <= s.rf.r_user) and (rt.rates[i, j] >= u.b_min - 1e-9)
            assert rt.eligible[i, j] == expect


def test_rate_table_range_and_rate_rules():
    # users far beyond range: whole row ineligible
    s = make_scenario(length_l=200, width_w=200, delta=100, altitude_h=100,
                      n_users=4, rf=RfParams(r_user=99.0), seed=2)
    rt = build_rate_table(s)
    assert not rt.eligible.any()  # d >= h = 100 > 99 everywhere
    # b_min above every achievable rate: all ineligible
    s2 = make_scenario(length_l=200, width_w=200, delta=100, altitude_h=100,
                       n_users=4, b_min=1e12, seed=2)
    rt2 = build_rate_table(s2)
    assert not rt2.eligible.any()


def test_rate_table_pure_function_and_fingerprint():
    s = make_scenario(length_l=300, width_w=300, delta=100, n_users=10, seed=9)
    a, b = build_rate_table(s), build_rate_table(s)
    assert np.array_equal(a.rates, b.rates)
    assert a.fingerprint == b.fingerprint
    s2 = make_scenario(length_l=300, width_w=300, delta=100, n_users=10, seed=10)
    assert build_rate_table(s2).fingerprint != a.fingerprint


def test_rates_are_quantized():
    s = make_scenario(length_l=300, width_w=300, delta=100, n_users=20, seed=1)
    rt = build_rate_table(s)
    scaled = rt.rates / RATE_QUANTUM
    assert np.array_equal(scaled, np.round(scaled))


def test_rate_table_csv_export(tmp_path):
    s = make_scenario(length_l=200, width_w=200, delta=100, n_users=3, seed=4)
    rt = build_rate_table(s)
    path = tmp_path / "rates.csv"
    rt.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "user_id,site_id,rate_bps,eligible"
    assert len(lines) == 1 + 3 * 4
