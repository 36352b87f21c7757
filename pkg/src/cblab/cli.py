"""Command-line front end: term-sheet ingestion, experiment orchestration, and
emission of plot-ready CSV / text artifacts.

Subcommands: price | surface | greeks | hedge-stress | var | compare.
All outputs are data files (no rendered images); files embed their full
configuration and its hash so identical runs produce identical bytes.
Set CBLAB_THREADS to evaluate surface rows concurrently.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import date
from pathlib import Path

import numpy as np

from . import fd, hedge, lattice, sensitivities, var
from .errors import CBLabError
from .reports import Report, write_lines, write_rows
from .termsheet import (
    MarketParams,
    accrued_interest,
    load_terms,
    reference_terms_path,
    year_fraction,
)

__all__ = ["main", "cmd_price", "cmd_surface", "cmd_greeks", "cmd_hedge_stress", "cmd_var", "cmd_compare"]


def _parse_date(s: str) -> date:
    return date.fromisoformat(s)


def _spot_grid(args) -> np.ndarray:
    n = int(round((args.s_max - args.s_min) / args.s_step))
    return args.s_min + args.s_step * np.arange(n + 1)


def _market(args) -> MarketParams:
    return MarketParams(rate=args.rate, credit_spread=args.spread, sigma=args.vol)


def _config(args, keys: list[str]) -> dict:
    cfg = {"command": args.command, "terms": str(args.terms)}
    for k in ("rate", "spread", "vol", "steps"):
        cfg[k] = getattr(args, k)
    for k in keys:
        cfg[k] = getattr(args, k)
    cfg["format"] = args.format
    return cfg


def cmd_price(args) -> int:
    terms = load_terms(args.terms)
    mkt = _market(args)
    t = args.date or terms.issue
    res = lattice.price_tf_crr(terms, mkt, t, args.spot, args.steps)
    ai = accrued_interest(terms, t)
    cfg = _config(args, ["spot"])
    cfg["date"] = t.isoformat()
    report = Report(
        config=cfg,
        columns=["date", "spot", "steps", "V_dirty", "V_clean", "E", "B",
                 "conversion_binds", "call_binds", "put_binds"],
        rows=[(t.isoformat(), args.spot, args.steps, res.price, res.price - ai,
               res.node.equity, res.node.debt,
               res.binds.conversion, res.binds.call, res.binds.put)],
        summary=[],
    )
    out = Path(args.out) / f"price.{_ext(args)}"
    write_rows(report, out, args.format)
    print(f"V = {res.price:.10g}  (E = {res.node.equity:.10g}, B = {res.node.debt:.10g}, "
          f"clean = {res.price - ai:.10g})")
    print(f"wrote {out}")
    return 0


def _surface_rows(terms, mkt, t_grid, spots, steps) -> list[tuple]:
    workers = int(os.environ.get("CBLAB_THREADS", "1"))

    def one_row(t):
        return sensitivities.surface(terms, mkt, [t], spots, steps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one_row, t_grid))
    else:
        parts = [one_row(t) for t in t_grid]

    rows = []
    for t, part in zip(t_grid, parts):
        t_years = year_fraction(terms.issue, t)
        ai = accrued_interest(terms, t)
        for j, s in enumerate(spots):
            p = part.point(0, j)
            rows.append((f"{t_years:.10g}", t.isoformat(), float(s), p.value, p.value - ai,
                         p.equity, p.debt, p.delta, p.delta_pct, p.gamma))
    return rows


_SURFACE_COLUMNS = ["t_years", "t_date", "S", "V_dirty", "V_clean", "E", "B",
                    "delta", "delta_pct", "gamma"]


def cmd_surface(args) -> int:
    terms = load_terms(args.terms)
    mkt = _market(args)
    life_days = (terms.maturity - terms.issue).days
    offsets = [round(i * life_days / args.t_points) for i in range(args.t_points)]
    t_grid = [date.fromordinal(terms.issue.toordinal() + o) for o in offsets]
    spots = _spot_grid(args)
    rows = _surface_rows(terms, mkt, t_grid, spots, args.steps)
    cfg = _config(args, ["s_min", "s_max", "s_step", "t_points"])
    report = Report(config=cfg, columns=_SURFACE_COLUMNS, rows=rows, summary=[])
    out = Path(args.out) / f"surface.{_ext(args)}"
    write_rows(report, out, args.format)
    print(f"wrote {out} ({len(rows)} points)")
    return 0


def cmd_greeks(args) -> int:
    terms = load_terms(args.terms)
    mkt = _market(args)
    spots = _spot_grid(args)
    rows = _surface_rows(terms, mkt, [args.date], spots, args.steps)
    cfg = _config(args, ["s_min", "s_max", "s_step"])
    cfg["date"] = args.date.isoformat()
    report = Report(config=cfg, columns=_SURFACE_COLUMNS, rows=rows, summary=[])
    out = Path(args.out) / f"greeks.{_ext(args)}"
    write_rows(report, out, args.format)
    print(f"wrote {out} ({len(rows)} points)")
    return 0


def cmd_hedge_stress(args) -> int:
    terms = load_terms(args.terms)
    mkt = _market(args)
    t = args.date or terms.issue
    spec = hedge.HedgeStressSpec(
        t=t, shock=args.shock, spot_grid=_spot_grid(args),
        steps=args.steps, contract_size=args.contract_size,
    )
    curve = hedge.stress_curve(spec, terms, mkt)
    value, dlt = hedge._value_and_delta(terms, mkt, t, spec.spot_grid, args.steps)
    positions = value - dlt * spec.spot_grid
    rows = []
    for (s, inc, scaled), pos in zip(curve, positions):
        rel = inc / abs(pos) if pos != 0 else np.inf
        rows.append((s, inc, scaled, rel))
    cfg = _config(args, ["s_min", "s_max", "s_step", "shock", "contract_size"])
    cfg["date"] = t.isoformat()
    report = Report(
        config=cfg,
        columns=["S", "increment", "increment_scaled", "increment_relative"],
        rows=rows,
        summary=[],
    )
    out = Path(args.out) / f"hedge_stress.{_ext(args)}"
    write_rows(report, out, args.format)
    print(f"wrote {out} ({len(rows)} points)")
    return 0


def cmd_var(args) -> int:
    terms = load_terms(args.terms)
    mkt = _market(args)
    spec = var.VaRSpec(
        eval_date=args.date or terms.issue,
        spot=args.spot,
        holding_days=args.holding_days,
        confidence=args.confidence,
        n_scenarios=args.scenarios,
        drift=args.drift,
        scen_sigma=args.scen_vol,
        seed=args.seed,
        steps=args.steps,
    )
    result = var.run_var(spec, terms, mkt)
    cfg = _config(args, ["spot", "holding_days", "confidence", "scenarios", "drift",
                         "scen_vol", "seed"])
    cfg["date"] = spec.eval_date.isoformat()
    out_dir = Path(args.out)
    write_lines(cfg, result.report_lines(), out_dir / "var_report.txt")
    for name, hist in (("var_cb_hist", result.value_hist), ("var_stock_hist", result.stock_hist)):
        rows = [(float(lo), float(hi), float(c), int(n))
                for lo, hi, c, n in zip(hist.edges[:-1], hist.edges[1:], hist.centers, hist.counts)]
        rep = Report(config=cfg, columns=["bin_lo", "bin_hi", "bin_center", "count"],
                     rows=rows, summary=[f"series {name}"])
        write_rows(rep, out_dir / f"{name}.{_ext(args)}", args.format)
    print(f"V0 = {result.value0:.10g}")
    print(f"VaR({spec.confidence:.0%}, {spec.holding_days}d) = {result.var_abs:.10g} "
          f"({result.var_pct:.4f}% of V0)")
    print(f"wrote {out_dir / 'var_report.txt'} and histograms")
    return 0


def cmd_compare(args) -> int:
    terms = load_terms(args.terms)
    mkt = _market(args)
    spots = _spot_grid(args)
    profile = lattice.price_profile_raw(terms, mkt, args.date, spots, args.steps)
    v_lat = np.array([nv.value for _, nv in profile])
    grid = fd.FDGrid.auto(mkt, year_fraction(args.date, terms.maturity),
                          s_max=args.fd_s_max, n_s=args.fd_nodes)
    sol = fd.solve_tf_fd(terms, mkt, args.date, grid, snapshot_dates=[args.date])
    v_fd = np.array([v for _, v, _, _ in fd.fd_profile(sol, args.date, spots)])
    diff = v_lat - v_fd
    lat_viol = sensitivities.monotonicity_violations(v_lat)
    fd_viol = sensitivities.monotonicity_violations(v_fd, tol=1e-6)
    summary = [
        f"max_abs_diff {np.max(np.abs(diff)):.10g}",
        f"lattice_monotonicity_violations {lat_viol}",
        f"fd_monotonicity_violations {fd_viol}",
    ]
    cfg = _config(args, ["s_min", "s_max", "s_step", "fd_s_max", "fd_nodes"])
    cfg["date"] = args.date.isoformat()
    rows = [(float(s), float(vl), float(vf), float(d))
            for s, vl, vf, d in zip(spots, v_lat, v_fd, diff)]
    report = Report(config=cfg, columns=["S", "V_lattice", "V_fd", "diff"],
                    rows=rows, summary=summary)
    out = Path(args.out) / f"compare.{_ext(args)}"
    write_rows(report, out, args.format)
    for line in summary:
        print(line)
    print(f"wrote {out}")
    return 0


def _ext(args) -> str:
    return "csv" if args.format == "csv" else "txt"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cblab",
        description="Convertible-bond pricing and risk laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--terms", type=Path, default=reference_terms_path(),
                        help="term-sheet JSON (default: packaged reference instrument)")
    common.add_argument("--rate", type=float, default=0.05, help="risk-free rate, cc/year")
    common.add_argument("--spread", type=float, default=0.02, help="credit spread, cc/year")
    common.add_argument("--vol", type=float, default=0.30, help="stock volatility /sqrt(year)")
    common.add_argument("--steps", type=int, default=500, help="tree steps")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--format", choices=("csv", "report"), default="csv")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--s-min", type=float, default=50.0)
    grid.add_argument("--s-max", type=float, default=200.0)
    grid.add_argument("--s-step", type=float, default=0.5)

    p = sub.add_parser("price", parents=[common], help="single-point price with E/B split")
    p.add_argument("--spot", type=float, default=100.0)
    p.add_argument("--date", type=_parse_date, default=None, help="evaluation date (default: issue)")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("surface", parents=[common, grid],
                       help="price/Greek surface over the bond life")
    p.add_argument("--t-points", type=int, default=61, help="time-grid size in [issue, maturity)")
    p.set_defaults(func=cmd_surface, s_step=1.0)

    p = sub.add_parser("greeks", parents=[common, grid],
                       help="price/delta/gamma profile at one date")
    p.add_argument("--date", type=_parse_date, required=True)
    p.set_defaults(func=cmd_greeks)

    p = sub.add_parser("hedge-stress", parents=[common, grid],
                       help="delta-hedge shock increments over a spot grid")
    p.add_argument("--date", type=_parse_date, default=None, help="settlement date (default: issue)")
    p.add_argument("--shock", type=float, default=0.5)
    p.add_argument("--contract-size", type=float, default=1_000_000.0)
    p.set_defaults(func=cmd_hedge_stress)

    p = sub.add_parser("var", parents=[common], help="Monte Carlo VaR with full repricing")
    p.add_argument("--date", type=_parse_date, default=None, help="evaluation date (default: issue)")
    p.add_argument("--spot", type=float, default=100.0)
    p.add_argument("--holding-days", type=int, default=1)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--scenarios", type=int, default=10_000)
    p.add_argument("--drift", type=float, default=0.05, help="scenario drift /year")
    p.add_argument("--scen-vol", type=float, default=0.30, help="scenario volatility /year")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_var)

    p = sub.add_parser("compare", parents=[common, grid],
                       help="lattice vs finite-difference profile at one date")
    p.add_argument("--date", type=_parse_date, required=True)
    p.add_argument("--fd-s-max", type=float, default=400.0)
    p.add_argument("--fd-nodes", type=int, default=401)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CBLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
