"""Acceptance suite: one check (and one summary line) per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines are
collected in the "acceptance criteria" section of the terminal summary.
Trend criteria that the model cannot reach are marked as strict xfail: the
check runs at full strength and is reported as FAIL, and pytest flags it if
it ever starts passing.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from hybridsec.channels import Geometry
from hybridsec.config import load_config, shipped_configs
from hybridsec.errors import QosInfeasibleError
from hybridsec.known_csi import (KnownCsiConfig, dc_bias_from_powers, optimal_message_powers,
                                 solve_known_csi, zf_beamformer)
from hybridsec.link import SystemParams, harvested_power, relay_powers
from hybridsec.sdp import (brute_force_oracle, extract_rank_one, secrecy_ratio,
                           solve_secrecy_cc_sdp)
from hybridsec.sweep import format_csv, run_sweep
from hybridsec.unknown_csi import AN_MRT, AN_SDR, UnknownCsiConfig, solve_unknown_csi

from _helpers import complex_normal, random_channels

SP = SystemParams()
S2 = SP.k.sigma_rf_sq

UNREACHABLE_TREND = "the VLC relay hop caps R_s near relay_bound/eta for most draws"


# ---------------------------------------------------------------- criterion 1

def test_oracle_equivalence(acceptance_log):
    t0 = time.perf_counter()
    worst, above, statuses = 0.0, 0, {}
    for ch in random_channels(1001, 50):
        caps = relay_powers(ch, SP.fe.max_current / 2, SP)
        HD, HE = np.outer(ch.hD, ch.hD.conj()), np.outer(ch.hE, ch.hE.conj())
        out = solve_secrecy_cc_sdp(HD, HE, *caps, S2)
        statuses[out.status] = statuses.get(out.status, 0) + 1
        w, _ = extract_rank_one(out.beam_matrix)
        got = float(secrecy_ratio(w, ch.hD, ch.hE, S2))
        orc = brute_force_oracle(ch.hD, ch.hE, *caps, S2).achieved_objective
        worst = max(worst, abs(got - orc) / orc)
        above += got > out.upper_bound * (1 + 1e-12)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-2 and above == 0 and elapsed < 60
    acceptance_log("1", ok, f"max rel gap to oracle {worst:.2e}, above relaxation {above}, "
                            f"status {statuses}, {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- criterion 2

def test_zf_nulling(acceptance_log):
    rng = np.random.default_rng(2002)
    worst_null, a_mismatch = 0.0, 0
    for _ in range(10_000):
        scale = 10 ** rng.uniform(-6, 0)
        hE = scale * complex_normal(rng, 2)
        pr1, pr2 = 10 ** rng.uniform(-7, -3, 2)
        sol = zf_beamformer(_ZfChannel(hE), pr1, pr2)
        null = abs(np.vdot(hE, sol.w)) / (np.linalg.norm(hE) * np.linalg.norm(sol.w))
        worst_null = max(worst_null, null)
        a_star = min(math.sqrt(pr1) / abs(hE[1]), math.sqrt(pr2) / abs(hE[0]))
        a_mismatch += sol.a != a_star
    ok = worst_null <= 1e-12 and a_mismatch == 0
    acceptance_log("2", ok, f"max |hE^H w|/(|hE||w|) {worst_null:.2e}, "
                            f"a* mismatches {a_mismatch}/10000")
    assert ok


class _ZfChannel:
    """Bare channel holder: the zero-forcing beam only reads hD and hE."""

    def __init__(self, hE):
        self.hE = hE
        self.hD = np.ones(2, complex)


# ---------------------------------------------------------------- criterion 3
# Independent formula evaluation from the raw simulation constants; nothing
# below reads the package's constants or helpers.

RHO, NU, SIG_V = 0.53, 10.0, 1e-21 * 20e6
C = 1 / (2 * math.pi * math.e)
I_H, FF, V_T, I_0 = 0.6, 0.75, 0.025, 1e-10


def ref_p1(h1, r):
    return SIG_V * (2 ** (2 * r) - 1) / (C * NU**2 * RHO**2 * h1**2)


def ref_p2(h1, h2, r):
    g2 = C * RHO**2 * NU**2 * h2**2
    return (2 ** (2 * r) - 1) * (SIG_V + g2 * ref_p1(h1, r)) / g2


def ref_bias(p1, p2, pd):
    return I_H - math.sqrt(p1) - math.sqrt(p2) - math.sqrt(pd)


def ref_harvest(h, b):
    i_dc = RHO * NU * h * b
    return FF * V_T * i_dc * math.log(1 + i_dc / I_0)


def test_closed_forms(acceptance_log):
    rng = np.random.default_rng(3003)
    worst = 0.0
    for _ in range(100):
        h1 = rng.uniform(5e-6, 2.5e-5)
        h2 = h1 * rng.uniform(0.2, 1.0)
        r = rng.uniform(0.1, 2.0)
        ch = _VlcChannel(h1, h2)
        p1, p2 = optimal_message_powers(ch, r, SP.k, SP.fe)
        # pd drawn inside the remaining headroom so the bias stays >= I_H/2
        head = I_H / 2 - math.sqrt(p1) - math.sqrt(p2)
        pd = (rng.uniform(0, 1) * max(head, 0)) ** 2
        rel = [abs(p1 / ref_p1(h1, r) - 1), abs(p2 / ref_p2(h1, h2, r) - 1)]
        if head >= 0:
            b = dc_bias_from_powers(p1, p2, pd, SP.fe)
            rel += [abs(b / ref_bias(p1, p2, pd) - 1),
                    abs(harvested_power(h1, b, SP.eh, SP.fe) / ref_harvest(h1, b) - 1)]
        worst = max(worst, *rel)
    h = 2.065829439808268e-05
    p1 = optimal_message_powers(_VlcChannel(h, h), 2.0, SP.k, SP.fe)[0]
    eh = harvested_power(h, 0.3, SP.eh, SP.fe)
    values_ok = f"{p1:.4g}" == "0.0004274" and f"{eh:.4g}" == "7.823e-06"
    ok = worst <= 1e-12 and values_ok
    acceptance_log("3", ok, f"max rel diff {worst:.1e} over 100 draws; p1 = {p1:.4g} A^2, "
                            f"harvested {eh:.4g} W (7.82e-6 stated)")
    assert ok


class _VlcChannel:
    def __init__(self, h1, h2):
        self.h1, self.h2 = h1, h2


# ---------------------------------------------------------------- criterion 4

@pytest.mark.parametrize("method, r_th", [("sdr", 2.0), ("sdr", 0.5), ("zf", 0.5)])
def test_bisection_fixed_point(acceptance_log, method, r_th):
    cfg = KnownCsiConfig(r_th=r_th, method=method)
    geo = Geometry(d_d=5.0, d_e=4.0)
    converged = bisected = bad = infeasible = 0
    worst = 0.0
    for ch in random_channels(4004, 300, geo):
        try:
            sol = solve_known_csi(ch, cfg, SP, rng=np.random.default_rng(0))
        except QosInfeasibleError:
            infeasible += 1
            continue
        if not sol.converged:
            continue
        converged += 1
        bisected += not sol.vlc_limited
        lo, hi = sol.pd_interval
        worst = max(worst, sol.residual)
        bad += not (sol.residual <= 1e-4 and lo <= sol.pa.pd <= hi)
    ok = bad == 0 and converged > 0
    acceptance_log("4", ok,
                   f"{method} R_th={r_th:g}: {converged} converged ({bisected} by bisection, "
                   f"{converged - bisected} VLC-limited), {infeasible} infeasible, "
                   f"max residual {worst:.1e}, violations {bad}")
    assert ok


# ---------------------------------------------------------------- criterion 5

def test_artificial_noise(acceptance_log):
    worst_null, worst_beta, bad = 0.0, -math.inf, 0
    used = skipped = 0
    for i, ch in enumerate(random_channels(5005, 200, Geometry(d_d=5.0, d_e_min=4.0))):
        if used == 50:
            break
        sols = {}
        try:
            for m in (AN_SDR, AN_MRT):
                cfg = UnknownCsiConfig(r_th=1.0, r_th_d=1.0, method=m, expectation_samples=100)
                sols[m] = solve_unknown_csi(ch, cfg, SP, np.random.default_rng(i))
        except QosInfeasibleError:
            skipped += 1
            continue
        if any("an-infeasible-baseline" in s.flags for s in sols.values()):
            skipped += 1
            continue
        used += 1
        for s in sols.values():
            b = s.beam
            worst_null = max(worst_null, abs(np.vdot(ch.hD, b.n_a))
                             / max(np.linalg.norm(ch.hD) * np.linalg.norm(b.n_a), 1e-300))
            bad += s.dest_rate < 1.0 - 1e-6
            bad += bool(np.any(b.transmit_powers() > np.array(s.relay_caps) * (1 + 1e-9)))
        worst_beta = max(worst_beta, sols[AN_MRT].beam.beta - sols[AN_SDR].beam.beta)
    ok = used == 50 and worst_null <= 1e-12 and bad == 0 and worst_beta <= 1e-6
    acceptance_log("5", ok, f"{used} instances ({skipped} infeasible skipped), "
                            f"max relative |hD^H n_a| {worst_null:.1e}, QoS/power violations "
                            f"{bad}, max beta(MRT) - beta(SDR) {worst_beta:.1e}")
    assert ok


# ---------------------------------------------------------------- criterion 6

@pytest.fixture(scope="module")
def figures():
    t0 = time.perf_counter()
    tables = {name: run_sweep(load_config(name), keep_records=name in ("fig2", "fig3"))
              for name in shipped_configs()}
    return tables, time.perf_counter() - t0


def _rf_only_means(table, label):
    method = label.split("[")[0]
    out = []
    for row in table.rows:
        if row.method != label:
            continue
        recs = [r.rf_only_rate for r in table.records
                if r.method == method and r.value == row.value and r.feasible]
        out.append(float(np.mean(recs)))
    return out


def _fmt(seq):
    return "[" + ", ".join(f"{v:.3f}" for v in seq) + "]"


@pytest.mark.xfail(strict=True, reason=UNREACHABLE_TREND)
@pytest.mark.slow
def test_trend_destination_distance(figures, acceptance_log):
    table = figures[0]["fig2"]
    parts, ok = [], True
    for label in table.methods:
        y = table.curve(label)[1]
        dec = bool(np.all(np.diff(y) < 0))
        ok &= dec
        parts.append(f"{label} {_fmt(y)} (rf-only {_fmt(_rf_only_means(table, label))})")
    acceptance_log("6a", ok, "strictly decreasing in D_D: " + "; ".join(parts))
    assert ok


@pytest.mark.xfail(strict=True, reason=UNREACHABLE_TREND)
@pytest.mark.slow
def test_trend_eavesdropper_distance(figures, acceptance_log):
    table = figures[0]["fig3"]
    sdr, zf = table.curve("sdr")[1], table.curve("zf")[1]
    rising = bool(np.all(np.diff(sdr) > 0))
    flat = bool(np.all(np.abs(zf / zf.mean() - 1) <= 0.05))
    crossover = bool(zf[0] > sdr[0])
    ok = rising and flat and crossover
    acceptance_log("6b", ok, f"SDR rising {rising}, ZF within 5% {flat}, ZF > SDR at smallest "
                             f"D_E {crossover}; sdr {_fmt(sdr)} zf {_fmt(zf)}; rf-only sdr "
                             f"{_fmt(_rf_only_means(table, 'sdr'))} zf "
                             f"{_fmt(_rf_only_means(table, 'zf'))}")
    assert ok


@pytest.mark.slow
def test_trend_user_rate_target(figures, acceptance_log):
    table = figures[0]["fig4"]
    parts, ok = [], True
    for label in table.methods:
        x, y, _ = table.curve(label)
        dec = bool(np.all(np.diff(y) < 0))
        half = len(x) // 2
        low = (y[0] - y[half - 1]) / (x[half - 1] - x[0])
        high = (y[half] - y[-1]) / (x[-1] - x[half])
        # "visibly steeper": the upper half of the R_th range falls at least 1.5x faster
        ok &= dec and high >= 1.5 * low
        parts.append(f"{label} slope {low:.2f} -> {high:.2f}")
    acceptance_log("6c", ok, "decreasing with steeper drop at large R_th: " + "; ".join(parts))
    assert ok


def _an_vs_baseline(table, series_filter):
    """(value, baseline, an-sdr, an-mrt) at every point selected by ``series_filter``."""
    out = []
    for row in table.rows:
        base = row.method.split("[")[0]
        if base != "mrt" or not series_filter(row):
            continue
        suffix = row.method[len(base):]
        an = {r.method.split("[")[0]: r.mean for r in table.rows
              if r.value == row.value and r.method.endswith(suffix) and r.method != row.method}
        out.append((row.value, row.mean, an["an-sdr"], an["an-mrt"]))
    return out


@pytest.mark.slow
def test_trend_an_beats_baseline_inside_destination(figures, acceptance_log):
    tables = figures[0]
    d_d = load_config("fig6").geometry.d_d
    pts = _an_vs_baseline(tables["fig6"], lambda r: r.value <= d_d)
    pts5 = _an_vs_baseline(tables["fig5"], lambda r: "d_e_min=3]" in r.method)
    ok = all(s > b and m > b for _, b, s, m in pts + pts5)
    acceptance_log("6d", ok, "AN > BASELINE with D_E,min <= D_D: "
                             + ", ".join(f"D_E={v:g}: {b:.3f} vs {s:.3f}/{m:.3f}"
                                         for v, b, s, m in pts)
                             + f"; R_thD sweep at D_E,min=3: {len(pts5)} points")
    assert ok


@pytest.mark.xfail(strict=True, reason="fading lets a closer eavesdropper draw a weaker "
                                       "channel, so the averaged baseline stays positive")
@pytest.mark.slow
def test_trend_baseline_zero_inside_destination(figures, acceptance_log):
    table = figures[0]["fig6"]
    d_d = load_config("fig6").geometry.d_d
    x, y, _ = table.curve("mrt")
    inside = x < d_d
    ok = bool(np.all(y[inside] == 0))
    acceptance_log("6d'", ok, "BASELINE mean exactly 0 for D_E,min < D_D: "
                              + ", ".join(f"{a:g}: {b:.4f}" for a, b in zip(x[inside], y[inside])))
    assert ok


@pytest.mark.slow
def test_trend_an_sdr_dominates(figures, acceptance_log):
    worst, points = -math.inf, 0
    for name in ("fig5", "fig6", "fig7"):
        table = figures[0][name]
        for row in table.rows:
            if not row.method.startswith("an-sdr"):
                continue
            twin = next(r for r in table.rows if r.value == row.value
                        and r.method == row.method.replace("an-sdr", "an-mrt"))
            worst = max(worst, twin.mean - row.mean)
            points += 1
    # the two designs leave identical jamming room, so means agree to rounding
    ok = worst <= 1e-9
    acceptance_log("6e", ok, f"AN-SDR >= AN-MRT at {points} points, "
                             f"max (AN-MRT - AN-SDR) {worst:.1e}")
    assert ok


@pytest.mark.slow
def test_six_figure_runtime(figures, acceptance_log):
    elapsed = figures[1]
    ok = elapsed < 600
    acceptance_log("6t", ok, f"six shipped sweeps ({sum(len(t.rows) for t in figures[0].values())}"
                             f" rows, 300 trials/point) in {elapsed:.0f} s")
    assert ok


# ---------------------------------------------------------------- criterion 7

@pytest.mark.slow
def test_determinism(figures, acceptance_log, tmp_path):
    same = []
    for name, table in figures[0].items():
        out = tmp_path / f"{name}.csv"
        res = subprocess.run([sys.executable, "-m", "hybridsec.cli", "sweep", "--config", name,
                              "--out", str(out)], capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        same.append((name, out.read_bytes() == format_csv(table).encode("utf-8")))
    ok = all(s for _, s in same)
    acceptance_log("7", ok, "byte-identical CSV on rerun: "
                            + ", ".join(f"{n} {'yes' if s else 'NO'}" for n, s in same))
    assert ok
