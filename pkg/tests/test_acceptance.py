"""Acceptance run. Each test records its outcome; the terminal summary
prints one PASS/FAIL line per criterion.

Monte-Carlo agreement uses 3 standard errors per point. A point whose
estimate has zero spread (every realization gave the same error
indicator) is judged against the exact 99.73% binomial bound instead,
``|analytic - mc| <= 1 - 0.0027**(1/n)``.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from mcvd.ber import (
    adaptive_policy_ber,
    ber_isi_curve,
    ber_isi_fixed,
    ber_no_isi_curve,
    ber_no_isi_fixed,
    ber_no_isi_random_curve,
    best_single_threshold,
    build_threshold_table,
    optimal_threshold,
    total_ber,
)
from mcvd.channel import SystemParams, absorb_fraction, slot_taps
from mcvd.distance import DistanceDistribution
from mcvd.expectations import (
    expected_cci,
    expected_cci_numeric,
    expected_cci_transient,
    expected_isi,
    expected_signal,
    expected_total,
)
from mcvd.mathkit import poisson_cdf
from mcvd.simulator import SimConfig, estimate_ber, estimate_ber_curve, estimate_mean_counts, simulate_counts

from oracles import kappa_formula, laplace_pmf_oracle

N_MC = 10_000
UNIFORM = DistanceDistribution.uniform(4.1, 10.0)
LAMBDAS = (1e-5, 1e-4)


def agrees(analytic, est):
    if est.se > 0:
        return abs(analytic - est.mean) <= 3 * est.se
    return abs(analytic - est.mean) <= 1 - 0.0027 ** (1 / est.n)


def pooled(pairs):
    hits = [agrees(a, e) for a, e in pairs]
    return sum(hits), len(hits)


def _elapsed(t0):
    return time.perf_counter() - t0


# ------------------------------------------------------------------ 1


def test_c1_channel_closed_form_vs_quadrature(record):
    t0 = time.perf_counter()
    worst = 0.0
    for mu in (0.5, 1.0, 5.0):
        p = SystemParams(mu=mu)
        for t in (0.05, 0.5, 2.0, 10.0, 50.0):
            for r in (4.5, 6.0, 10.0, 20.0, 40.0):
                ref, _ = integrate.quad(
                    lambda s: kappa_formula(s, r, p.D, p.a) * math.exp(-mu * s),
                    0.0, t, epsabs=0.0, epsrel=1e-12, limit=500,
                    points=[min(t, (r - p.a) ** 2 / (6 * p.D))],
                )
                worst = max(worst, abs(absorb_fraction(t, r, p) - ref) / ref)
    dt = _elapsed(t0)
    record("1", worst <= 1e-6 and dt < 1.0, f"max rel err {worst:.1e} over 75 points, {dt:.2f}s")
    assert worst <= 1e-6


# ------------------------------------------------------------------ 2


def test_c2_cci_closed_form(record):
    t0 = time.perf_counter()
    p = SystemParams(lam=1e-5, p1=0.5, N=100, a=4.0, D=74.9, mu=1.0)
    closed = expected_cci(p)
    twin = expected_cci_numeric(p)
    rel = abs(closed - twin) / closed
    record("2", rel <= 1e-6, f"E_C={closed:.6f}, quadrature twin rel diff {rel:.1e}")
    record("2", abs(closed - 2.7525) < 5e-5, "closed form evaluates to 2.7525 (the stated 27.5 is off by a factor of 10)")
    cfg = SimConfig(p, DistanceDistribution.fixed(10.0), L=40, r_max=150.0, realizations=N_MC, seed=2)
    _, _, cci = estimate_mean_counts(cfg)
    transient = expected_cci_transient(40, p, numeric=True)
    ok = abs(cci.mean - closed) <= 3 * cci.se and abs(cci.mean - transient) <= 3 * cci.se
    dt = _elapsed(t0)
    record("2", ok and dt < 30, f"MC {cci.mean:.4f} +/- {cci.se:.4f} (se), {dt:.1f}s")
    assert rel <= 1e-6 and ok


# ------------------------------------------------------------------ 3


def test_c3_expectation_shape(record):
    p = SystemParams(mu=1.0)
    grid = np.round(np.arange(1, 101) * 0.1, 10)
    br = [expected_total(10.0, p.replace(ts=t)) for t in grid]
    si = np.array([b.e_s + b.e_i for b in br])
    et = np.array([b.e_t for b in br])
    es = np.array([b.e_s for b in br])
    ok_si = np.ptp(si) <= 1e-10
    ok_t = np.ptp(et) <= 1e-10
    ok_s = bool(np.all(np.diff(es) > 0))
    record("3", ok_si and ok_t and ok_s, f"spread of E_S+E_I {np.ptp(si):.1e}, of E_T {np.ptp(et):.1e}; E_S increasing: {ok_s}")
    assert ok_si and ok_t and ok_s


# ------------------------------------------------------------------ 4


def test_c4_poisson_tail_reduction(record):
    p = SystemParams(lam=0.0)
    worst = 0.0
    for eta in (1, 5, 10, 20):
        for rd in (6.0, 10.0, 15.0):
            ref = poisson_cdf(eta - 1, p.N * absorb_fraction(p.ts, rd, p))
            worst = max(worst, abs(ber_no_isi_fixed(rd, eta, p).peb1 - ref))
    record("4", worst <= 1e-10, f"max abs diff {worst:.1e}")
    assert worst <= 1e-10


# ------------------------------------------------------------------ 5


def test_c5_fixed_distance_vs_mc(record):
    t0 = time.perf_counter()
    p = SystemParams(mu=5.0, lam=1e-5)
    etas = range(1, 31)
    pairs, unimodal, stars = [], True, []
    for k, rd in enumerate((8.0, 10.0, 12.0)):
        peb0, peb1 = ber_no_isi_curve(rd, 30, p)
        pe = total_ber(peb0, peb1, p)[1:]
        cfg = SimConfig(p, DistanceDistribution.fixed(rd), realizations=N_MC, seed=50 + k)
        curve = estimate_ber_curve(cfg, etas)
        pairs += [(a, est["pe"]) for a, (_, est) in zip(pe, curve)]
        i = int(np.argmin(pe))
        unimodal &= bool(np.all(np.diff(pe[: i + 1]) < 0) and np.all(np.diff(pe[i:]) >= 0))
        stars.append(optimal_threshold(rd, p)[0])
    hit, n = pooled(pairs)
    dt = _elapsed(t0)
    ok_mc = hit >= 0.95 * n
    ok_star = stars == sorted(stars, reverse=True)
    record("5", ok_mc and dt < 300, f"{hit}/{n} points within 3 se, {dt:.0f}s")
    record("5", unimodal, "pe(eta) unimodal")
    record("5", ok_star, f"eta* for rd 8/10/12 = {'/'.join(map(str, stars))}")
    assert ok_mc and unimodal and ok_star


# ------------------------------------------------------------------ 6


@pytest.fixture(scope="module")
def random_distance_curves():
    return {lam: ber_no_isi_random_curve(UNIFORM, 40, SystemParams(mu=5.0, lam=lam)) for lam in LAMBDAS}


def test_c6_random_distance_vs_mc(record, random_distance_curves):
    t0 = time.perf_counter()
    etas = range(1, 41)
    pairs = []
    for k, lam in enumerate(LAMBDAS):
        p = SystemParams(mu=5.0, lam=lam)
        peb0, peb1 = random_distance_curves[lam]
        pe = total_ber(peb0, peb1, p)[1:]
        curve = estimate_ber_curve(SimConfig(p, UNIFORM, realizations=N_MC, seed=60 + k), etas)
        pairs += [(a, est["pe"]) for a, (_, est) in zip(pe, curve)]
    hit, n = pooled(pairs)
    dt = _elapsed(t0)
    record("6", hit >= 0.95 * n and dt < 300, f"{hit}/{n} points within 3 se, {dt:.0f}s")
    assert hit >= 0.95 * n


def _pe_by_lambda(curves):
    return [total_ber(*curves[lam], SystemParams(p1=0.5))[1:] for lam in LAMBDAS]


def test_c6_lambda_ordering_at_low_thresholds(record, random_distance_curves):
    lo, hi = _pe_by_lambda(random_distance_curves)
    ok = bool(np.all(hi[:18] > lo[:18]))
    record("6", ok, "pe grows with lambda for eta 1..18")
    assert ok


@pytest.mark.xfail(strict=True, reason="the two lambda curves cross near eta = 19; confirmed by Monte Carlo")
def test_c6_lambda_ordering_at_every_threshold(record, random_distance_curves):
    lo, hi = _pe_by_lambda(random_distance_curves)
    above = hi > lo
    first = int(np.argmin(above)) + 1
    record("6", bool(np.all(above)), f"pe grows with lambda at every eta (fails from eta={first})")
    assert np.all(above)


# ------------------------------------------------------------------ 7


def test_c7_adaptive_threshold_gain(record):
    t0 = time.perf_counter()
    for k, lam in enumerate(LAMBDAS):
        p = SystemParams(mu=5.0, lam=lam)
        table = build_threshold_table(4.1, 10.0, 0.1, p)
        analytic = adaptive_policy_ber(table, UNIFORM, p).pe
        eta, single = best_single_threshold(UNIFORM, p)
        cfg = SimConfig(p, UNIFORM, eta=eta, realizations=N_MC, seed=70 + k)
        draws = simulate_counts(cfg)
        mc_single = estimate_ber(cfg, draws=draws)[0].pe
        mc_adaptive = estimate_ber(cfg.replace(eta=table), draws=draws)[0].pe
        gain_mc = 1 - mc_adaptive / mc_single
        gain_an = 1 - analytic / single
        record(
            "7",
            gain_mc >= 0.25,
            f"lambda={lam:g}: MC reduction {100 * gain_mc:.1f}% (analytic {100 * gain_an:.1f}%, best single eta={eta})",
        )
        assert gain_mc >= 0.25
    dt = _elapsed(t0)
    record("7", dt < 600, f"{dt:.0f}s")


# ------------------------------------------------------------------ 8


def test_c8_isi_reductions(record):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        p = SystemParams(
            mu=float(rng.uniform(0.5, 6.0)),
            N=int(rng.integers(5, 121)),
            lam=float(10 ** rng.uniform(-6, -4)),
            ts=float(rng.uniform(0.2, 1.5)),
            p1=float(rng.uniform(0.2, 0.8)),
        )
        rd = float(rng.uniform(4.5, 20.0))
        eta = int(rng.integers(0, 16))
        a, b = ber_isi_fixed(rd, eta, 1, p), ber_no_isi_fixed(rd, eta, p)
        worst = max(worst, abs(a.peb0 - b.peb0), abs(a.peb1 - b.peb1))
    record("8", worst <= 1e-10, f"L=1 vs no-ISI max diff {worst:.1e} over 20 draws")

    p = SystemParams(N=50, mu=1.0, lam=0.0)
    worst2 = 0.0
    for rd in (6.0, 9.0, 14.0):
        h0, h1 = slot_taps(rd, 2, p) * p.N
        for eta in range(0, 25):
            r = ber_isi_fixed(rd, eta, 2, p)
            cdf = lambda nu: poisson_cdf(eta - 1, nu) if eta > 0 else 0.0
            peb1 = p.p0 * cdf(h0) + p.p1 * cdf(h0 + h1)
            peb0 = 1.0 - (p.p0 * cdf(0.0) + p.p1 * cdf(h1))
            worst2 = max(worst2, abs(r.peb0 - peb0), abs(r.peb1 - peb1))
    record("8", worst2 <= 1e-10, f"lambda=0, L=2 vs bit conditioning max diff {worst2:.1e}")
    assert worst <= 1e-10 and worst2 <= 1e-10


# ------------------------------------------------------------------ 9

ISI_RD = [4.0 + g for g in range(2, 16)]


@pytest.fixture(scope="module")
def isi_grid():
    t0 = time.perf_counter()
    out = {}
    for k, lam in enumerate(LAMBDAS):
        p = SystemParams(N=50, mu=1.0, lam=lam)
        rows = []
        for j, rd in enumerate(ISI_RD):
            isi = ber_isi_fixed(rd, 10, 5, p).pe
            plain = ber_no_isi_fixed(rd, 10, p).pe
            seed = 900 + 100 * k + j
            mc_isi = estimate_ber(SimConfig(p, DistanceDistribution.fixed(rd), eta=10, L=5, realizations=N_MC, seed=seed))[1]["pe"]
            mc_plain = estimate_ber(SimConfig(p, DistanceDistribution.fixed(rd), eta=10, L=1, realizations=N_MC, seed=seed))[1]["pe"]
            rows.append((rd, isi, plain, mc_isi, mc_plain))
        out[lam] = rows
    out["elapsed"] = _elapsed(t0)
    return out


def test_c9_isi_vs_mc(record, isi_grid):
    pairs = [(r[1], r[3]) for lam in LAMBDAS for r in isi_grid[lam]]
    hit, n = pooled(pairs)
    dt = isi_grid["elapsed"]
    record("9", hit >= 0.95 * n and dt < 600, f"{hit}/{n} points within 3 se, {dt:.0f}s")
    mono = all(np.all(np.diff([r[1] for r in isi_grid[lam]]) > 0) for lam in LAMBDAS)
    record("9", mono, "ISI pe increasing in rd")
    assert hit >= 0.95 * n and mono


def test_c9_isi_gap_is_real(record, isi_grid):
    significant = agree = total = 0
    for lam in LAMBDAS:
        for rd, isi, plain, mc_isi, mc_plain in isi_grid[lam]:
            total += 1
            se = math.hypot(mc_isi.se, mc_plain.se)
            gap_mc = mc_isi.mean - mc_plain.mean
            if abs(gap_mc) > 3 * se:
                significant += 1
                agree += np.sign(gap_mc) == np.sign(isi - plain)
    ok = significant >= total // 2 and agree == significant
    record("9", ok, f"ignoring ISI shifts pe significantly at {significant}/{total} points, analytic sign matches MC at {agree}/{significant}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the ISI gap changes sign along rd for both densities; confirmed by Monte Carlo")
def test_c9_gap_sign_constant_along_rd(record, isi_grid):
    flips = []
    for lam in LAMBDAS:
        signs = {np.sign(isi - plain) for _, isi, plain, _, _ in isi_grid[lam]}
        flips.append(len(signs) == 1)
    record("9", all(flips), "ISI gap keeps one sign along each rd curve")
    assert all(flips)


# ------------------------------------------------------------------ 10


def test_c10_bell_assembly_vs_laplace_derivatives(record):
    p = SystemParams(N=10, mu=5.0, lam=1e-4)
    worst = 0.0
    for rd in (6.0, 8.0):
        masses = np.array(laplace_pmf_oracle(rd, 3, p))
        ref = np.cumsum(masses)
        peb1 = ber_no_isi_curve(rd, 4, p)[1][1:]
        worst = max(worst, float(np.max(np.abs(peb1 - ref) / ref)))
    record("10", worst <= 1e-3, f"max rel diff {worst:.1e} for eta 1..4")
    assert worst <= 1e-3


# ------------------------------------------------------------------ pinned baselines


def test_pinned_bit_baselines_bracket_random_bits(record):
    p = SystemParams(N=50, mu=1.0, lam=1e-5)
    rd = 10.0
    peb0, peb1 = ber_isi_curve(rd, 10, 5, p)
    ok = True
    for pin in (0, 1):
        cfg = SimConfig(p, DistanceDistribution.fixed(rd), L=5, realizations=N_MC, seed=99, pin_bits=pin)
        curve = estimate_ber_curve(cfg, [5, 10])
        for eta, (_, est) in zip((5, 10), curve):
            m0, m1 = est["peb0"], est["peb1"]
            if pin == 0:
                ok &= peb0[eta] >= m0.mean - 3 * m0.se and peb1[eta] <= m1.mean + 3 * m1.se
            else:
                ok &= peb0[eta] <= m0.mean + 3 * m0.se and peb1[eta] >= m1.mean - 3 * m1.se
    record("pinned bits", ok, "random-bits analytic peb0/peb1 lie between the all-0 and all-1 histories at eta 5 and 10")
    assert ok
