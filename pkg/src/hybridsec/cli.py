"""Command-line entry point: ``hybridsec sweep|solve|oracle``.

Exit codes: 0 success, 1 bad usage or configuration, 2 solver failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time

import numpy as np

from .channels import sample_scenario
from .config import (ALL_METHODS, KNOWN_METHODS, ScenarioConfig, apply_overrides, load_config,
                     shipped_configs)
from .errors import ConfigError, QosInfeasibleError, SolverError, SweepError
from .known_csi import solve_known_csi
from .link import relay_powers
from .sdp import brute_force_oracle, extract_rank_one, secrecy_ratio, solve_secrecy_cc_sdp
from .sweep import run_sweep, trial_streams, write_csv
from .unknown_csi import solve_unknown_csi

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


class _UsageError(Exception):
    pass


def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid int value: {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return parse


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for solver failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _parse_set(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        out[key.strip()] = value
    return out


def _resolve_config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    over = _parse_set(getattr(args, "set", None))
    if args.seed is not None:
        over["run.seed"] = str(args.seed)
    if getattr(args, "trials", None) is not None:
        over["run.trials"] = str(args.trials)
    if args.method is not None:
        over["run.methods"] = ",".join(ALL_METHODS) if args.method == "all" else args.method
    return apply_overrides(cfg, over) if over else cfg


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    t0 = time.perf_counter()

    def progress(row):
        logging.getLogger("hybridsec").info("%s=%g %-18s mean %.4f  se %.4f  n=%d  infeasible=%d",
                                            cfg.sweep.variable, row.value, row.method, row.mean,
                                            row.stderr, row.trials, row.infeasible_count)

    table = run_sweep(cfg, progress=progress)
    write_csv(table, args.out)
    if args.plot:
        from .plotting import render_plot
        render_plot(table, args.plot)
    print(f"wrote {len(table.rows)} rows to {args.out}"
          + (f" and {args.plot}" if args.plot else "")
          + f" in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK


def _fmt(x) -> str:
    if isinstance(x, complex) or (isinstance(x, np.generic) and np.iscomplexobj(x)):
        return f"{x.real:.6g}{x.imag:+.6g}j"
    if isinstance(x, (float, np.floating)):
        return f"{x:.9g}"
    if isinstance(x, np.ndarray):
        return "[" + ", ".join(_fmt(v) for v in x.tolist()) + "]"
    if isinstance(x, (tuple, list)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _cmd_solve(args) -> int:
    cfg = _resolve_config(args)
    params = cfg.system_params()
    point = {cfg.sweep.variable: cfg.sweep.values[0]}
    if cfg.sweep.series_variable:
        point[cfg.sweep.series_variable] = cfg.sweep.series_values[0]
    cfg = cfg.at(**point)
    scen_rng, solver_rng, eav_rng = trial_streams(cfg.run.seed, 0, args.trial)
    ch = sample_scenario(cfg.geometry, params.fe, params.rf, scen_rng)
    print("[channel]")
    for name in ("h1", "h2", "hD", "hE", "users"):
        print(f"{name} = {_fmt(getattr(ch, name))}")
    for name, v in point.items():
        print(f"{name} = {v:g}")
    for method in cfg.run.methods:
        print(f"\n[{method}]")
        try:
            if method in KNOWN_METHODS:
                sol = solve_known_csi(ch, cfg.known_config(method), params, rng=solver_rng)
                fields = dict(secrecy_rate=sol.secrecy_rate, end_to_end_rate=sol.end_to_end_rate,
                              rf_only_rate=sol.rf_only_rate, vlc_limited=sol.vlc_limited,
                              converged=sol.converged, iterations=sol.iterations,
                              residual=sol.residual, pd_interval=sol.pd_interval)
            else:
                sol = solve_unknown_csi(ch, cfg.unknown_config(method), params, eav_rng)
                fields = dict(avg_secrecy_rate=sol.avg_secrecy_rate, dest_rate=sol.dest_rate,
                              hop_bound=sol.hop_bound, flags=sol.flags)
        except QosInfeasibleError as exc:
            print(f"status = infeasible ({exc})")
            continue
        print("status = ok")
        for k, v in fields.items():
            print(f"{k} = {_fmt(v)}")
        for k, v in dataclasses.asdict(sol.pa).items():
            print(f"{k} = {_fmt(v)}")
        print(f"relay_caps = {_fmt(sol.relay_caps)}")
        for k in ("w", "n_a", "a", "beta", "alpha", "achieved_objective", "flag"):
            print(f"{k} = {_fmt(getattr(sol.beam, k))}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    cfg = _resolve_config(args)
    params = cfg.system_params()
    s2 = params.k.sigma_rf_sq
    worst, above = 0.0, 0
    for i in range(args.instances):
        scen_rng, *_ = trial_streams(cfg.run.seed, 0, i)
        ch = sample_scenario(cfg.geometry, params.fe, params.rf, scen_rng)
        # caps at the smallest DC bias, the setting the bisection starts from
        caps = relay_powers(ch, params.fe.max_current / 2, params)
        HD, HE = np.outer(ch.hD, ch.hD.conj()), np.outer(ch.hE, ch.hE.conj())
        out = solve_secrecy_cc_sdp(HD, HE, *caps, s2)
        w, _ = extract_rank_one(out.beam_matrix)
        sdr = float(secrecy_ratio(w, ch.hD, ch.hE, s2))
        orc = brute_force_oracle(ch.hD, ch.hE, *caps, s2, grid_density=args.grid).achieved_objective
        gap = abs(sdr - orc) / orc
        worst = max(worst, gap)
        above += sdr > out.upper_bound * (1 + 1e-12)
        if args.verbose:
            print(f"{i:4d} sdp {out.objective:.9g} extracted {sdr:.9g} oracle {orc:.9g} "
                  f"rel_gap {gap:.3e} status {out.status}")
    print(f"instances = {args.instances}")
    print(f"max_rel_gap = {worst:.3e}")
    print(f"extracted_above_relaxation = {above}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hybridsec", description="Secrecy-rate design for hybrid VLC/RF relaying.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help=f"config file or shipped name ({', '.join(shipped_configs())})")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--method", choices=ALL_METHODS + ("all",))
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")

    sp = sub.add_parser("sweep", help="run a Monte-Carlo sweep to CSV (and SVG)")
    common(sp)
    sp.add_argument("--out", required=True, help="CSV output path")
    sp.add_argument("--plot", help="SVG output path")
    sp.add_argument("--trials", type=_int_at_least(1))
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("solve", help="solve one channel draw and print the full solution")
    common(sp)
    sp.add_argument("--trial", type=_int_at_least(0), default=0, help="trial index of the draw")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("oracle", help="compare SDR beams against the brute-force oracle")
    common(sp)
    sp.add_argument("--instances", type=_int_at_least(1), default=50)
    sp.add_argument("--grid", type=_int_at_least(64), default=64)
    sp.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, SweepError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
