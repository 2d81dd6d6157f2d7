"""Command-line surface: analyze, simulate, reproduce, selftest.

Every output file is paired with a JSON sidecar carrying the full config
(angles in degrees), its hash, the seed/plan, per-method error estimates and
the package version.  CSV floats carry 17 significant digits.  SNR-like CLI
inputs are dB; the secrecy rate is nats unless --cth-bits is given.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 self-test failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .channel import SystemConfig
from .distributions import eve_model, legit_model
from .montecarlo import McPlan, run_mc
from .presets import config_to_dict, fig3_config, fig7_config, load_config
from .selftest import run_all_checks
from .sop import (
    RationalExponent,
    SopEngineError,
    diversity_order_estimate,
    sop_asymptotic,
    sop_closed,
    sop_quadrature,
)
from .special_functions import ConvergenceError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3

_SWEEPABLE_DERIVED = ("rho_d_db", "rho_e_db")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return "" if x is None else str(x)


def _parse_sweep(spec: str) -> tuple[str, list[float]]:
    try:
        field_part, grid = spec.split("=", 1)
        start_s, stop_s, step_s = grid.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise ValueError(
            f"malformed sweep {spec!r}, expected field=start:stop:step") from None
    if step <= 0 or stop < start:
        raise ValueError(f"sweep grid must increase, got {spec!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return field_part.strip(), [start + i * step for i in range(n)]


def _apply_sweep(cfg: SystemConfig, field: str, value: float) -> SystemConfig:
    if field == "rho_d_db":
        return cfg.with_rho_d_db(value)
    if field == "rho_e_db":
        return cfg.with_rho_e_db(value)
    if field not in SystemConfig.__dataclass_fields__:
        raise ValueError(
            f"sweep field {field!r} is not a config field "
            f"(or one of {_SWEEPABLE_DERIVED})")
    if field in ("n_ris", "n_tx"):
        return cfg.replace(**{field: int(round(value))})
    return cfg.replace(**{field: value})


def _load_cfg(args) -> SystemConfig:
    if args.config:
        cfg = load_config(args.config)
    elif getattr(args, "preset", None):
        cfg = fig3_config() if args.preset == "fig3" else fig7_config()
    else:
        raise ValueError("provide --config PATH or --preset {fig3,fig7}")
    if getattr(args, "cth_bits", None) is not None:
        cfg = cfg.replace(c_th=args.cth_bits * math.log(2.0))
    return cfg


def _write_rows(path: Path, header: list[str], rows: list[list], fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        payload = [dict(zip(header, r)) for r in rows]
        path.write_text(json.dumps(payload, indent=2, default=float) + "\n")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])


def _write_sidecar(path: Path, cfg: SystemConfig, extra: dict) -> None:
    sidecar = {
        "config": config_to_dict(cfg),
        "config_hash": cfg.config_hash(),
        "package_version": __version__,
        **extra,
    }
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2, default=float) + "\n")


def _analyze_row(cfg: SystemConfig, methods: list[str]) -> tuple[list, str]:
    lm = legit_model(cfg)
    ev = eve_model(cfg)
    notes = []
    out = {m: None for m in ("quadrature", "quadrature_exact", "closed",
                             "asymptotic")}
    errs = {"quadrature": None, "closed": None}
    if "quadrature" in methods:
        res = sop_quadrature(lm, ev, cfg.c_th, "infinite_re",
                             config_hash=cfg.config_hash())
        out["quadrature"], errs["quadrature"] = res.value, res.abs_uncertainty
        exact = sop_quadrature(lm, ev, cfg.c_th, "finite_re",
                               config_hash=cfg.config_hash())
        out["quadrature_exact"] = exact.value
    if "closed" in methods:
        try:
            rat = RationalExponent.from_alpha2(cfg.alpha2)
            res = sop_closed(lm, ev, cfg.c_th, rat, config_hash=cfg.config_hash())
            out["closed"], errs["closed"] = res.value, res.abs_uncertainty
            if res.method != "closed":
                notes.append(f"closed fell back to {res.method}")
        except ValueError as exc:
            notes.append(f"closed inapplicable: {exc}")
    if "asymptotic" in methods:
        try:
            res = sop_asymptotic(lm, ev, cfg.c_th)
            out["asymptotic"] = res.value
        except ValueError as exc:
            notes.append(f"asymptotic inapplicable: {exc}")
    row = [out["quadrature"], out["closed"], out["asymptotic"],
           errs["quadrature"], errs["closed"], out["quadrature_exact"]]
    return row, "; ".join(notes)


def cmd_analyze(args) -> int:
    cfg = _load_cfg(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = set(methods) - {"quadrature", "closed", "asymptotic"}
    if bad or not methods:
        raise ValueError(f"invalid analytic methods {sorted(bad)}; "
                         "choose from quadrature, closed, asymptotic")
    if args.sweep:
        field, grid = _parse_sweep(args.sweep)
    else:
        field, grid = "rho_d_db", [10.0 * math.log10(cfg.rho_d)]
    header = [field, "sop_quadrature", "sop_closed", "sop_asymptotic",
              "err_quadrature", "err_closed", "sop_quadrature_exact", "note"]
    rows = []
    for v in grid:
        row, note = _analyze_row(_apply_sweep(cfg, field, v), methods)
        rows.append([v] + row + [note])
    out = Path(args.out)
    _write_rows(out, header, rows, args.format)
    _write_sidecar(out, cfg, {
        "command": "analyze", "sweep": args.sweep, "methods": methods,
        "columns": {
            "sop_quadrature": "infinite_re ratio form (the closed-form "
                              "oracle; drops the +-1 terms)",
            "sop_quadrature_exact": "finite_re exact secrecy outage with "
                                    "the disk atom (what Monte Carlo "
                                    "estimates)",
        },
    })
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    plan = McPlan(trials=args.trials, master_seed=args.seed,
                  angle_mode=("angle_locked" if args.angle_mode == "locked"
                              else "geometric"),
                  channel_mode=args.channel_mode, workers=args.workers)
    if args.sweep:
        field, grid = _parse_sweep(args.sweep)
    else:
        field, grid = "rho_d_db", [10.0 * math.log10(cfg.rho_d)]
    header = [field, "sop_mc", "ci95_lo", "ci95_hi", "trials", "seed"]
    rows = []
    for v in grid:
        rep = run_mc(_apply_sweep(cfg, field, v), plan)
        rows.append([v, rep.sop_hat,
                     max(0.0, rep.sop_hat - rep.ci95_halfwidth),
                     min(1.0, rep.sop_hat + rep.ci95_halfwidth),
                     rep.trials, plan.master_seed])
    out = Path(args.out)
    _write_rows(out, header, rows, args.format)
    _write_sidecar(out, cfg, {"command": "simulate", "sweep": args.sweep,
                              "plan": asdict(plan)})
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _reproduce_curve(cfg: SystemConfig, grid_db: list[float], plan: McPlan,
                     rational: RationalExponent):
    rows = []
    for rho_db in grid_db:
        c = cfg.with_rho_d_db(rho_db)
        lm = legit_model(c)
        ev = eve_model(c)
        rep = run_mc(c, plan)
        closed = sop_closed(lm, ev, c.c_th, rational)
        quad_exact = sop_quadrature(lm, ev, c.c_th, "finite_re")
        try:
            asym = sop_asymptotic(lm, ev, c.c_th).value
        except ValueError:
            asym = None
        rows.append([rho_db, rep.sop_hat, rep.ci95_halfwidth,
                     quad_exact.value, closed.value, asym])
    return rows


_REPRO_HEADER = ["rho_d_db", "sop_mc", "ci95_halfwidth",
                 "sop_quadrature_exact", "sop_closed_ratio", "sop_asymptotic"]


def cmd_reproduce(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    plan = McPlan(trials=args.trials, master_seed=args.seed,
                  channel_mode="reduced", workers=args.workers)
    t0 = time.perf_counter()
    if args.figure == "fig3":
        grid = [float(v) for v in range(0, 65, 5)]
        for n_ris, n_tx in ((16, 4), (16, 16), (64, 4), (64, 16)):
            cfg = fig3_config(n_ris=n_ris, n_tx=n_tx)
            rows = _reproduce_curve(cfg, grid, plan, RationalExponent(2, 1))
            path = outdir / f"fig3_N{n_ris}_K{n_tx}.csv"
            _write_rows(path, _REPRO_HEADER, rows, "csv")
            _write_sidecar(path, cfg, {
                "command": "reproduce fig3", "plan": asdict(plan),
                "note": "sop_closed_ratio is the scale-free closed form; "
                        "sop_quadrature_exact is the finite-disk secrecy "
                        "outage the MC column estimates"})
        print(f"fig3 curves written to {outdir} "
              f"({time.perf_counter() - t0:.1f}s)")
        return EXIT_OK
    # fig7: diversity order vs path-loss exponent
    grid = [float(v) for v in range(60, 105, 5)]
    slopes = {}
    for alpha2 in (2.0, 3.0, 4.0):
        cfg = fig7_config(alpha2=alpha2)
        rational = RationalExponent.from_alpha2(alpha2)
        rows = _reproduce_curve(cfg, grid, plan, rational)
        path = outdir / f"fig7_alpha2_{alpha2:g}.csv"
        _write_rows(path, _REPRO_HEADER, rows, "csv")
        _write_sidecar(path, cfg, {"command": "reproduce fig7",
                                   "plan": asdict(plan)})
        curve = [(10.0 ** (r[0] / 10.0), r[4]) for r in rows]
        ratio = rows[-1][4] / rows[-1][5] if rows[-1][5] else None
        slopes[f"alpha2={alpha2:g}"] = {
            "fitted_slope_top_decade": diversity_order_estimate(curve),
            "target_slope": 2.0 / alpha2,
            "closed_over_asymptotic_at_100dB": ratio,
        }
    (outdir / "fig7_diversity_summary.json").write_text(
        json.dumps(slopes, indent=2) + "\n")
    print(f"fig7 curves + diversity summary written to {outdir} "
          f"({time.perf_counter() - t0:.1f}s)")
    return EXIT_OK


def cmd_selftest(_args) -> int:
    results = run_all_checks()
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-secrecy",
        description="Secrecy-outage analysis of an RIS-aided MISO wiretap "
                    "system with Poisson-distributed eavesdroppers")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", help="JSON config file (angles in degrees)")
        p.add_argument("--preset", choices=("fig3", "fig7"),
                       help="built-in configuration")
        p.add_argument("--sweep", help="field=start:stop:step "
                       "(fields include rho_d_db, rho_e_db)")
        p.add_argument("--cth-bits", type=float, default=None,
                       help="target secrecy rate in bits (default: nats "
                       "from the config)")
        if with_out:
            p.add_argument("--out", required=True, help="output table path")
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_an = sub.add_parser("analyze", help="evaluate the analytic outage stack")
    common(p_an)
    p_an.add_argument("--methods", default="quadrature,closed,asymptotic",
                      help="comma subset of quadrature,closed,asymptotic")
    p_an.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="Monte Carlo outage estimation")
    common(p_sim)
    p_sim.add_argument("--trials", type=int, default=100000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--angle-mode", choices=("locked", "geometric"),
                       default="locked")
    p_sim.add_argument("--channel-mode", choices=("full", "reduced"),
                       default="full")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("reproduce",
                           help="regenerate the reference curve families")
    p_rep.add_argument("figure", choices=("fig3", "fig7"))
    p_rep.add_argument("--out", required=True, help="output directory")
    p_rep.add_argument("--trials", type=int, default=20000)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--workers", type=int, default=1)
    p_rep.set_defaults(func=cmd_reproduce)

    p_self = sub.add_parser("selftest", help="run the oracle suite")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SopEngineError, ConvergenceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
