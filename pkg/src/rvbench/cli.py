"""Command-line surface.

Subcommands: ingest, fixture, summarize, backtest, evaluate, skill, dmtest,
gwtest, mcs, deciles. Report commands write CSV tables and can render a PNG
figure next to the table with --plot. Exit codes: 0 success, 1 usage error,
2 data/format error, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pandas as pd

from . import io as rvio
from . import plots
from .errors import DataError, EstimationError
from .fixtures import make_synthetic_series
from .losses import (
    DECILES,
    LossKind,
    aggregate_loss,
    decile_report,
    loss_series,
    skill_matrix,
)
from .protocol import ModelSpec, align, make_split_plan, run_backtest
from .series import summary_stats
from .stattests import MCS_STATISTICS, BootstrapConfig, dm_test, gw_test, mcs

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    # Spec reserves exit code 2 for data errors; argparse defaults to 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fractions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise DataError(f"bad fraction list {text!r}") from None


def _load_data(args) -> dict:
    floor = getattr(args, "floor", None)
    return rvio.read_rv_csv(args.data, floor=floor)


def _pick_symbols(data: dict, wanted) -> list[str]:
    if not wanted:
        return sorted(data)
    out = []
    by_norm = {rvio.normalize_symbol(s): s for s in data}
    for w in wanted:
        key = rvio.normalize_symbol(w)
        if key not in by_norm:
            raise DataError(f"symbol {w!r} not present in data "
                            f"(have {sorted(data)})")
        out.append(by_norm[key])
    return out


def _load_sets(paths) -> list:
    sets = []
    seen = set()
    for path in paths:
        for fs in rvio.read_forecasts(path):
            key = (fs.model_id, fs.symbol)
            if key in seen:
                raise DataError(f"duplicate forecasts for model {fs.model_id!r}, "
                                f"symbol {fs.symbol!r} across files")
            seen.add(key)
            sets.append(fs)
    if not sets:
        raise DataError("no forecasts found")
    return sets


def _panels(data: dict, sets) -> dict:
    """Aligned panel per symbol, preserving model file order."""
    by_symbol: dict[str, list] = {}
    for fs in sets:
        by_symbol.setdefault(fs.symbol, []).append(fs)
    panels = {}
    for symbol in sorted(by_symbol):
        if symbol not in data:
            raise DataError(f"forecast symbol {symbol!r} missing from data")
        panels[symbol] = align(data[symbol], by_symbol[symbol])
    return panels


def _test_loss(kind: LossKind, panel, model_id: str):
    """Loss series oriented lower-is-better for DM/GW/MCS.

    MDA is an accuracy, so its indicator is flipped into a directional
    error before testing.
    """
    ls = loss_series(kind, panel, model_id)
    if kind.higher_is_better:
        return type(ls)(kind=ls.kind, model_id=ls.model_id,
                        values=1.0 - ls.values, dates=ls.dates)
    return ls


def _plot_path(out: str) -> str:
    return os.path.splitext(out)[0] + ".png"


# ---------------------------------------------------------------------------
# subcommands

def cmd_ingest(args) -> int:
    data = rvio.parse_omi_csv(args.omi, floor=args.floor)
    rvio.write_rv_csv(data, args.out)
    total = sum(len(s) for s in data.values())
    print(f"ingested {total} rows across {len(data)} symbols -> {args.out}",
          file=sys.stderr)
    return 0


def cmd_fixture(args) -> int:
    data = {}
    for k, sym in enumerate(args.symbols.split(",")):
        sym = sym.strip()
        data[sym] = make_synthetic_series(sym, n=args.n, seed=args.seed + k)
    rvio.write_rv_csv(data, args.out)
    print(f"wrote synthetic fixture ({args.n} rows x {len(data)} symbols) "
          f"-> {args.out}", file=sys.stderr)
    return 0


def cmd_summarize(args) -> int:
    data = _load_data(args)
    (symbol,) = _pick_symbols(data, [args.symbol])
    table = summary_stats(data[symbol], _fractions(args.segments), args.transform)
    if args.out:
        rvio.write_table(table, args.out)
        if args.plot:
            plots.render_summary(table, symbol, _plot_path(args.out))
    else:
        table.to_csv(sys.stdout, index=False)
    return 0


def _backtest_one(series, spec, breakpoints):
    plan = make_split_plan(len(series), breakpoints)
    return run_backtest(series, spec, plan)


def cmd_backtest(args) -> int:
    data = _load_data(args)
    symbols = _pick_symbols(data, args.symbol)
    options = {"seed": args.seed}
    if args.model == "char":
        options["char_target"] = args.char_target
    if args.model == "arfima":
        options.update(p=args.p, q=args.q)
    if args.window:
        options["window"] = args.window
    spec = ModelSpec(kind=args.model, log=args.log, options=options)
    breakpoints = _fractions(args.breakpoints)

    sets = []
    if args.jobs > 1 and len(symbols) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_backtest_one, data[s], spec, breakpoints)
                       for s in symbols]
            sets = [f.result() for f in futures]
    else:
        sets = [_backtest_one(data[s], spec, breakpoints) for s in symbols]
    rvio.write_forecasts(sets, args.out)
    total = sum(len(fs.entries) for fs in sets)
    print(f"{spec.model_id}: {total} forecasts across {len(sets)} symbols "
          f"-> {args.out}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    data = _load_data(args)
    panels = _panels(data, _load_sets(args.forecasts))
    kinds = [LossKind.from_name(k) for k in args.losses.split(",")]
    names = [k.value for k in kinds]
    rows = []
    for symbol, panel in panels.items():
        for model in panel.model_ids:
            row = {"symbol": symbol, "model": model}
            for kind in kinds:
                row[kind.value] = aggregate_loss(loss_series(kind, panel, model))
            rows.append(row)
    table = pd.DataFrame(rows)
    if len(panels) > 1:
        avg = table.groupby("model", sort=False)[names].mean().reset_index()
        avg.insert(0, "symbol", "ALL")
        table = pd.concat([table, avg], ignore_index=True)
    rvio.write_table(table, args.out)
    if args.plot:
        plots.render_loss_table(table[table["symbol"] != "ALL"], names,
                                _plot_path(args.out))
    return 0


def cmd_skill(args) -> int:
    data = _load_data(args)
    panels = _panels(data, _load_sets(args.forecasts))
    kind = LossKind.from_name(args.loss)
    matrices = [skill_matrix(kind, panel) for panel in panels.values()]
    ids = list(matrices[0].model_ids)
    for m in matrices[1:]:
        if list(m.model_ids) != ids:
            raise DataError("skill: every symbol must cover the same models")
    mean_ratios = np.mean([m.ratios for m in matrices], axis=0)
    if kind.higher_is_better:
        print("note: MDA ratios are accuracy ratios (higher is better)",
              file=sys.stderr)
    table = pd.DataFrame(mean_ratios, columns=ids)
    table.insert(0, "model", ids)
    rvio.write_table(table, args.out)
    if args.plot:
        plots.render_matrix(table.set_index("model"),
                            f"{kind.value} skill ratios (column / row)",
                            _plot_path(args.out))
    return 0


def _pairwise(args, runner, columns) -> pd.DataFrame:
    data = _load_data(args)
    panels = _panels(data, _load_sets(args.forecasts))
    kind = LossKind.from_name(args.loss)
    rows = []
    for symbol, panel in panels.items():
        series = {m: _test_loss(kind, panel, m) for m in panel.model_ids}
        for a in panel.model_ids:
            for b in panel.model_ids:
                if a == b:
                    continue
                rows.append({"symbol": symbol, "model": a, "against": b,
                             **runner(series[a], series[b])})
    return pd.DataFrame(rows, columns=["symbol", "model", "against"] + columns)


def cmd_dmtest(args) -> int:
    def run(a, b):
        r = dm_test(a, b, lags=args.lags)
        return {"statistic": r.statistic, "p_one_sided": r.p_one_sided,
                "p_two_sided": r.p_two_sided, "hac_lags": r.hac_lags,
                "degenerate": r.degenerate}

    table = _pairwise(args, run, ["statistic", "p_one_sided", "p_two_sided",
                                  "hac_lags", "degenerate"])
    rvio.write_table(table, args.out)
    if args.plot:
        _plot_pairwise(table, "p_one_sided", "DM one-sided p", _plot_path(args.out))
    return 0


def cmd_gwtest(args) -> int:
    def run(a, b):
        r = gw_test(a, b, instruments=args.instruments, lags=args.lags)
        return {"statistic": r.statistic, "p_value": r.p_value, "k": r.k,
                "degenerate": r.degenerate}

    table = _pairwise(args, run, ["statistic", "p_value", "k", "degenerate"])
    rvio.write_table(table, args.out)
    if args.plot:
        _plot_pairwise(table, "p_value", "GW p-value", _plot_path(args.out))
    return 0


def _plot_pairwise(table: pd.DataFrame, col: str, title: str, path) -> None:
    mean_p = table.pivot_table(index="model", columns="against", values=col,
                               sort=False)
    mean_p = mean_p.fillna(1.0)
    plots.render_matrix(mean_p, f"{title} (mean across symbols)", path)


def cmd_mcs(args) -> int:
    data = _load_data(args)
    panels = _panels(data, _load_sets(args.forecasts))
    kind = LossKind.from_name(args.loss)
    config = BootstrapConfig(replications=args.reps,
                             expected_block_length=args.block, seed=args.seed)
    rows = []
    for symbol, panel in panels.items():
        losses = {m: _test_loss(kind, panel, m) for m in panel.model_ids}
        result = mcs(losses, config, level=args.level, statistic=args.statistic)
        order = {mid: k + 1 for k, (mid, _) in enumerate(result.eliminated)}
        for m in panel.model_ids:
            rows.append({
                "symbol": symbol, "model": m,
                "mcs_p": result.mcs_p[m],
                "retained": m in result.retained,
                "eliminated_order": order.get(m, ""),
            })
    table = pd.DataFrame(rows)
    rvio.write_table(table, args.out)
    if args.plot:
        plots.render_mcs(table, args.level, _plot_path(args.out))
    return 0


def cmd_deciles(args) -> int:
    data = _load_data(args)
    panels = _panels(data, _load_sets(args.forecasts))
    kind = LossKind.from_name(args.loss)
    groups = DECILES
    if args.groups:
        parts = [g.split(":") for g in args.groups.split(",")]
        groups = tuple((float(lo), float(hi)) for lo, hi in parts)
    rows = []
    for symbol, panel in panels.items():
        report = decile_report(kind, panel, args.benchmark, groups)
        for model, rel in report.relative_losses.items():
            for (lo, hi), size, value in zip(report.deciles, report.group_sizes, rel):
                rows.append({"symbol": symbol, "model": model, "decile_lo": lo,
                             "decile_hi": hi, "group_size": size,
                             "relative_loss": value})
    table = pd.DataFrame(rows)
    rvio.write_table(table, args.out)
    if args.plot:
        plots.render_deciles(table, args.benchmark, _plot_path(args.out))
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> _Parser:
    parser = _Parser(prog="rvbench",
                     description="Realized-variance forecasting benchmarks "
                                 "and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert an Oxford-Man export to canonical CSV")
    p.add_argument("--omi", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--floor", type=float, default=None,
                   help="replace rv <= 0 with this value instead of dropping")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fixture", help="generate a synthetic canonical CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--symbols", default="SYN")
    p.add_argument("--n", type=int, default=1200)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("summarize", help="per-segment summary statistics")
    p.add_argument("--data", required=True)
    p.add_argument("--symbol", required=True)
    p.add_argument("--segments", default="0.5,0.7,0.9,1.0")
    p.add_argument("--transform", choices=["variance", "volatility"],
                   default="volatility")
    p.add_argument("--floor", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", action="store_true",
                   help="render a PNG next to --out")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("backtest", help="incremental backtest of one model")
    p.add_argument("--data", required=True)
    p.add_argument("--symbol", action="append", default=None,
                   help="repeatable; default: all symbols")
    p.add_argument("--model", required=True,
                   choices=["har", "char", "arfima", "rgarch"])
    p.add_argument("--log", action="store_true",
                   help="model log rv and exponentiate forecasts")
    p.add_argument("--out", required=True)
    p.add_argument("--breakpoints", default="0.5,0.7,0.9,1.0")
    p.add_argument("--char-target", choices=["rv", "bpv"], default="rv")
    p.add_argument("--p", type=int, default=1, help="ARFIMA AR order")
    p.add_argument("--q", type=int, default=1, help="ARFIMA MA order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=None,
                   help="fixed-width rolling estimation window "
                        "(default: expanding)")
    p.add_argument("--floor", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_backtest)

    def report_parser(name, help_text):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--data", required=True)
        q.add_argument("--forecasts", required=True, nargs="+")
        q.add_argument("--out", required=True)
        q.add_argument("--floor", type=float, default=None)
        q.add_argument("--plot", action="store_true")
        return q

    p = report_parser("evaluate", "average losses per model")
    p.add_argument("--losses", default="mse,mae,mape,mda,qlike,smape")
    p.set_defaults(func=cmd_evaluate)

    p = report_parser("skill", "pairwise aggregate-loss ratio matrix")
    p.add_argument("--loss", required=True)
    p.set_defaults(func=cmd_skill)

    p = report_parser("dmtest", "pairwise Diebold-Mariano tests")
    p.add_argument("--loss", required=True)
    p.add_argument("--lags", type=int, default=None)
    p.set_defaults(func=cmd_dmtest)

    p = report_parser("gwtest", "pairwise Giacomini-White tests")
    p.add_argument("--loss", required=True)
    p.add_argument("--lags", type=int, default=None)
    p.add_argument("--instruments", choices=["constant", "constant+lag"],
                   default="constant")
    p.set_defaults(func=cmd_gwtest)

    p = report_parser("mcs", "model confidence set per symbol")
    p.add_argument("--loss", required=True)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--block", type=float, default=12.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--statistic", choices=list(MCS_STATISTICS), default="T_R")
    p.set_defaults(func=cmd_mcs)

    p = report_parser("deciles", "losses by variance decile, relative to a benchmark")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--groups", default=None,
                   help='custom groups, e.g. "0:0.1,0.1:0.5,0.5:1"')
    p.set_defaults(func=cmd_deciles)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
