"""Seeded Monte-Carlo sweeps and their CSV form."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import ChannelSet, sample_scenario
from .config import KNOWN_METHODS, ScenarioConfig
from .errors import QosInfeasibleError, SolverError, SweepError
from .known_csi import solve_known_csi
from .link import check_feasibility
from .unknown_csi import solve_unknown_csi

log = logging.getLogger(__name__)

CSV_HEADER = ("sweep_var", "value", "method", "mean_secrecy_bps_hz", "stderr", "trials",
              "infeasible_count")


def _sig9(x: float) -> float:
    return float(f"{x:.9g}")


@dataclass
class TrialRecord:
    trial: int
    value: float
    method: str
    h1: float
    h2: float
    hd_abs: tuple[float, float]
    he_abs: tuple[float, float]
    pa: tuple[float, float, float, float] | None  # p1, p2, pd, b
    secrecy_rate: float
    rf_only_rate: float  # known CSI: rate before any VLC-hop back-off
    feasible: bool
    status: str  # ok | infeasible | failed: ...
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class CurveRow:
    value: float
    method: str
    mean: float
    stderr: float
    trials: int
    infeasible_count: int

    def same_as(self, other: "CurveRow") -> bool:
        def eq(a, b):
            return a == b or (isinstance(a, float) and math.isnan(a) and math.isnan(b))
        return all(eq(getattr(self, f), getattr(other, f))
                   for f in ("value", "method", "mean", "stderr", "trials", "infeasible_count"))


@dataclass
class CurveTable:
    sweep_var: str
    rows: list[CurveRow] = field(default_factory=list)
    records: list[TrialRecord] = field(default_factory=list, repr=False, compare=False)

    @property
    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))

    def curve(self, method: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = [r for r in self.rows if r.method == method]
        return (np.array([r.value for r in rows]), np.array([r.mean for r in rows]),
                np.array([r.stderr for r in rows]))

    def same_as(self, other: "CurveTable") -> bool:
        return (self.sweep_var == other.sweep_var and len(self.rows) == len(other.rows)
                and all(a.same_as(b) for a, b in zip(self.rows, other.rows)))


def trial_streams(seed: int, sweep_index: int, trial: int, n: int = 3):
    """Independent generators for (scenario, solver, expectation) of one trial.

    Keyed only by (seed, sweep index, trial index): every method and series
    sees the same draws, and trials can run in any order.  Callers pass
    sweep_index 0 everywhere to reuse draws across sweep points.
    """
    ss = np.random.SeedSequence([seed, sweep_index, trial])
    return [np.random.default_rng(s) for s in ss.spawn(n)]


def _summary(ch: ChannelSet):
    return (ch.h1, ch.h2, tuple(float(x) for x in np.abs(ch.hD)),
            tuple(float(x) for x in np.abs(ch.hE)))


def run_trial(cfg: ScenarioConfig, method: str, trial: int, sweep_index: int,
              value: float) -> TrialRecord:
    params = cfg.system_params()
    key = 0 if cfg.run.common_draws else sweep_index
    scen_rng, solver_rng, eav_rng = trial_streams(cfg.run.seed, key, trial)
    ch = sample_scenario(cfg.geometry, params.fe, params.rf, scen_rng)
    h1, h2, hd, he = _summary(ch)
    base = dict(trial=trial, value=value, method=method, h1=h1, h2=h2, hd_abs=hd, he_abs=he)
    try:
        if method in KNOWN_METHODS:
            kc = cfg.known_config(method)
            sol = solve_known_csi(ch, kc, params, rng=solver_rng)
            rep = check_feasibility(sol.pa, sol.rate_bundle, max_current=params.fe.max_current,
                                    r_th=kc.r_th, eta=params.eta, secrecy_rate=sol.secrecy_rate,
                                    beam_powers=np.abs(sol.beam.w) ** 2,
                                    relay_caps=sol.relay_caps)
            rate, rf_only, flags = sol.secrecy_rate, sol.rf_only_rate, tuple(sol.notes)
            if sol.beam.flag:
                flags += (sol.beam.flag,)
        else:
            uc = cfg.unknown_config(method)
            sol = solve_unknown_csi(ch, uc, params, eav_rng)
            beam_p = np.abs(sol.beam.w) ** 2 + np.abs(sol.beam.n_a) ** 2
            # the full-log P_D closed form only guarantees half the relay-hop target
            rep = check_feasibility(sol.pa, sol.rate_bundle, max_current=params.fe.max_current,
                                    r_th=uc.r_th, eta=params.eta,
                                    r_th_d=None if uc.full_log_exponent else uc.r_th_d,
                                    beam_powers=beam_p, relay_caps=sol.relay_caps)
            rate, rf_only, flags = sol.avg_secrecy_rate, math.nan, tuple(sol.flags)
            if "an-infeasible-baseline" in flags:
                raise QosInfeasibleError(f"R_thD={uc.r_th_d} unreachable even without jamming")
    except QosInfeasibleError as exc:
        return TrialRecord(**base, pa=None, secrecy_rate=math.nan, rf_only_rate=math.nan,
                           feasible=False, status=f"infeasible: {exc}")
    except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
        log.warning("trial %d (%s, value %g) failed: %s", trial, method, value, exc)
        return TrialRecord(**base, pa=None, secrecy_rate=math.nan, rf_only_rate=math.nan,
                           feasible=False, status=f"failed: {exc}")
    pa = (sol.pa.p1, sol.pa.p2, sol.pa.pd, sol.pa.dc_bias)
    if not rep.ok:
        log.warning("trial %d (%s, value %g) violates: %s", trial, method, value,
                    "; ".join(rep.violations))
        return TrialRecord(**base, pa=pa, secrecy_rate=rate, rf_only_rate=rf_only,
                           feasible=False, status="failed: " + "; ".join(rep.violations),
                           flags=flags)
    return TrialRecord(**base, pa=pa, secrecy_rate=rate, rf_only_rate=rf_only, feasible=True,
                       status="ok", flags=flags)


def _label(method: str, series_var: str, series_value) -> str:
    return method if not series_var else f"{method}[{series_var}={series_value:g}]"


def aggregate(records: list[TrialRecord], value: float, label: str) -> CurveRow:
    ok = np.array([r.secrecy_rate for r in records if r.feasible])
    n = ok.size
    mean = float(ok.mean()) if n else math.nan
    se = float(ok.std(ddof=1) / math.sqrt(n)) if n > 1 else (0.0 if n == 1 else math.nan)
    return CurveRow(_sig9(value), label, _sig9(mean), _sig9(se), n, len(records) - n)


def run_sweep(cfg: ScenarioConfig, keep_records: bool = False, progress=None) -> CurveTable:
    """Run every (sweep value, series value, method) cell of ``cfg``.

    QoS-infeasible draws are excluded from the mean and counted; solver
    failures are counted the same way, but more than half of them at one
    cell aborts the sweep.
    """
    sw = cfg.sweep
    table = CurveTable(sw.variable)
    series = list(sw.series_values) if sw.series_variable else [None]
    for si, value in enumerate(sw.values):
        for sv in series:
            point = {sw.variable: value}
            if sv is not None:
                point[sw.series_variable] = sv
            pcfg = cfg.at(**point)
            for method in cfg.run.methods:
                recs = [run_trial(pcfg, method, t, si, value) for t in range(cfg.run.trials)]
                failed = sum(r.status.startswith("failed") for r in recs)
                if failed * 2 > len(recs):
                    raise SweepError(f"{failed}/{len(recs)} trials failed for {method} at "
                                     f"{sw.variable}={value:g}: {recs[0].status}")
                label = _label(method, sw.series_variable, sv)
                table.rows.append(aggregate(recs, value, label))
                if keep_records:
                    table.records.extend(recs)
                if progress is not None:
                    progress(table.rows[-1])
    return table


def format_csv(table: CurveTable) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in table.rows:
        wr.writerow([table.sweep_var, f"{r.value:.9g}", r.method, f"{r.mean:.9g}",
                     f"{r.stderr:.9g}", r.trials, r.infeasible_count])
    return buf.getvalue()


def write_csv(table: CurveTable, path) -> None:
    path = Path(path)
    try:
        path.write_text(format_csv(table), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def parse_csv(text: str) -> CurveTable:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("not a secrecy-sweep CSV (header mismatch)")
    table = CurveTable(rows[1][0] if len(rows) > 1 else "")
    for r in rows[1:]:
        table.rows.append(CurveRow(float(r[1]), r[2], float(r[3]), float(r[4]), int(r[5]),
                                   int(r[6])))
    return table


def read_csv(path) -> CurveTable:
    return parse_csv(Path(path).read_text(encoding="utf-8"))
