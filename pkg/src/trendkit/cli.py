"""Command-line surface: filter, calibrate, simulate, backtest.

Data flows through two-column CSV files (``date,value`` with ISO dates
or integer indices) and JSON report documents. Exit codes are stable:
0 success, 1 usage error, 2 data error, 3 numerical failure.

An optional ``--config`` file holds ``key = value`` lines (keys match
the long flag names with underscores); explicit flags override it.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import calibration, filters, strategy, synth
from .errors import DataError, NumericalError
from .series import Series

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so we control exit codes."""

    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _parse_time(token: str, line_no: int):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        datetime.date.fromisoformat(token)
        return token
    except ValueError:
        raise DataError(
            f"line {line_no}: time {token!r} is neither an integer nor YYYY-MM-DD"
        )


def _time_key(t):
    return t if isinstance(t, int) else datetime.date.fromisoformat(t)


def read_table(path):
    """Parse a CSV with a time column first: returns (times, {name: values})."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise DataError(f"{path}: need a time column and at least one value column")
    names = header[1:]
    times = []
    columns = {name: [] for name in names}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(
                f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}"
            )
        times.append(_parse_time(row[0], line_no))
        for name, cell in zip(names, row[1:]):
            cell = cell.strip()
            if not cell:
                raise DataError(f"{path}: line {line_no}: missing value for {name!r}")
            try:
                columns[name].append(float(cell))
            except ValueError:
                raise DataError(
                    f"{path}: line {line_no}: cannot parse {cell!r} as a number"
                )
    keys = [_time_key(t) for t in times]
    for i in range(1, len(keys)):
        if type(keys[i]) is not type(keys[0]):
            raise DataError(f"{path}: line {i + 2}: mixed integer and date stamps")
        if keys[i] <= keys[i - 1]:
            raise DataError(
                f"{path}: line {i + 2}: time {times[i]!r} not after {times[i - 1]!r}"
            )
    time_arr = np.array(times, dtype=object if isinstance(times[0], str) else int)
    return time_arr, {k: np.array(v) for k, v in columns.items()}


def ingest_csv(path, column=None) -> Series:
    """Read one value column as a Series (the only column, or ``column``)."""
    times, columns = read_table(path)
    if column is None:
        if len(columns) == 1:
            column = next(iter(columns))
        elif "value" in columns:
            column = "value"
        else:
            raise DataError(
                f"{path}: several value columns {sorted(columns)}; pick one with --column"
            )
    if column not in columns:
        raise DataError(f"{path}: no column named {column!r}; have {sorted(columns)}")
    return Series(times=times, values=columns[column], name=column)


def write_csv(path, times, named_columns):
    """Write a time column plus named value columns at 12 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        names = [name for name, _ in named_columns]
        writer.writerow(["date"] + names)
        for i, t in enumerate(times):
            writer.writerow([str(t)] + [_fmt(vals[i]) for _, vals in named_columns])


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_report(path, document):
    with open(path, "w") as fh:
        json.dump(_jsonable(document), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path):
    """Parse ``key = value`` lines; values become int, float, bool, or str."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}: line {line_no}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        if raw.lower() in ("true", "false"):
            values[key] = raw.lower() == "true"
            continue
        for cast in (int, float):
            try:
                values[key] = cast(raw)
                break
            except ValueError:
                continue
        else:
            values[key] = raw
    if "lambda" in values:  # the --lambda flag parses to the 'lam' key
        values["lam"] = values.pop("lambda")
    return values


_FILTER_DEFAULTS = dict(
    kind="l1t", lam=None, lambda1=None, lambda2=None, lambda_max_fraction=None,
    auto=False, order=2, column=None, standardize=False, tol=1e-8, max_iter=200,
    t1=400, t2=50, m=12, p=12, n_grid=15,
    out=None, report=None,
)
_CALIBRATE_DEFAULTS = dict(
    t1=400, t2=50, t3=None, m=12, p=12, n_grid=15, order=2, column=None,
    report=None, errors_out=None,
)
_SIMULATE_DEFAULTS = dict(
    model=1, n=2000, p=None, b=None, sigma=None, theta=None, seed=0, out=None,
)
_BACKTEST_DEFAULTS = dict(
    model="l1-global", rate=0.0, rates=None, column=None,
    risk_aversion=1.0, alpha_min=-1.0, alpha_max=1.0, vol_window=130,
    t1=520, t2=130, t3=520, cv_m=3, cv_p=3, n_grid=15,
    ma_window=None, hp_lambda=None,
    out=None, report=None,
)


def _out_path(args, key, input_path, suffix):
    given = args.get(key)
    return Path(given) if given else Path(input_path).with_suffix(suffix)


def _resolve_lambda(series, args):
    """Penalty weight from --lambda, --lambda-max-fraction, or --auto."""
    order = args["order"]
    explicit = args.get("lam")
    if explicit is not None:
        return float(explicit), {"selection": "explicit"}
    fraction = args.get("lambda_max_fraction")
    if fraction is not None:
        ceiling = calibration.lambda_max(series.values, order)
        return float(fraction) * ceiling, {
            "selection": "lambda-max-fraction",
            "lambda_max": ceiling,
            "fraction": float(fraction),
        }
    if args.get("auto"):
        cfg = calibration.CVConfig(
            T1=args["t1"], T2=args["t2"], m=args["m"], p=args["p"],
            n_grid=args["n_grid"], order=order,
        )
        report = calibration.cv_filter(series.values, cfg)
        return report.lambda_star, {
            "selection": "cross-validation",
            "grid": report.grid,
            "errors": report.errors,
        }
    raise UsageError("give --lambda, --lambda-max-fraction, or --auto")


def cmd_filter(args) -> int:
    kind = args["kind"]
    if kind not in ("hp", "l1t", "l1c", "l1tc", "l1t-multi"):
        raise UsageError(f"unknown filter kind {args['kind']!r}")
    input_path = args["input"]

    if kind == "l1t-multi":
        times, columns = read_table(input_path)
        names = sorted(columns)
        rows = [columns[name] for name in names]
        args["order"] = 2
        data = np.vstack(rows)
        if args["standardize"]:
            stds = data.std(axis=1)
            if np.any(stds == 0):
                bad = names[int(np.flatnonzero(stds == 0)[0])]
                raise DataError(f"column {bad!r} is constant; cannot standardize")
            # resolve the weight on the same standardized scale the fit uses
            data = (data - data.mean(axis=1)[:, None]) / stds[:, None]
        mean_series = Series(times, data.mean(axis=0), name="mean")
        lam, selection = _resolve_lambda(mean_series, args)
        result = filters.l1t_multivariate(
            rows, lam, standardize=args["standardize"], tol=args["tol"],
            max_iter=args["max_iter"],
        )
        observed = result.observed
    else:
        args["order"] = {"l1t": 2, "l1c": 1, "l1tc": 2, "hp": args["order"]}[kind]
        series = ingest_csv(input_path, column=args.get("column"))
        observed = series.values
        times = series.times
        if kind == "l1tc":
            lam1, lam2 = args.get("lambda1"), args.get("lambda2")
            if lam1 is None or lam2 is None:
                raise UsageError("l1tc needs both --lambda1 and --lambda2")
            lam, selection = (float(lam1), float(lam2)), {"selection": "explicit"}
            result = filters.l1tc_filter(series.values, lam[0], lam[1],
                                         tol=args["tol"], max_iter=args["max_iter"])
        else:
            if kind == "hp" and args.get("auto"):
                raise UsageError("--auto cross-validates the L1 filters; "
                                 "give --lambda for hp")
            lam, selection = _resolve_lambda(series, args)
            if kind == "hp":
                result = filters.hp_filter(series.values, lam, order=args["order"])
            else:
                result = filters.l1_filter(
                    series.values, lam, order=args["order"], tol=args["tol"],
                    max_iter=args["max_iter"],
                )

    out_path = _out_path(args, "out", input_path, ".trend.csv")
    write_csv(out_path, times, [("observed", observed), ("trend", result.trend)])

    diag = result.diagnostics
    document = {
        "kind": kind,
        "n": len(result.trend),
        "lambda": lam,
        **selection,
        "converged": bool(diag.converged) if diag else True,
        "iterations": diag.iterations if diag else 0,
        "duality_gap": diag.duality_gap if diag else 0.0,
        "kkt_residual": diag.kkt_residual if diag else 0.0,
    }
    if kind == "l1tc":
        document["breaks_order1"] = filters.detect_breaks(result, 1)
        document["breaks_order2"] = filters.detect_breaks(result, 2)
    else:
        document["breaks"] = filters.detect_breaks(result, args["order"])
    write_report(_out_path(args, "report", input_path, ".filter-report.json"), document)
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    input_path = args["input"]
    series = ingest_csv(input_path, column=args.get("column"))
    cfg = calibration.CVConfig(
        T1=args["t1"], T2=args["t2"], T3=args["t3"],
        m=args["m"], p=args["p"], n_grid=args["n_grid"], order=args["order"],
    )
    report = calibration.cv_filter(series.values, cfg)

    errors_path = _out_path(args, "errors_out", input_path, ".cv-errors.csv")
    with open(errors_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "error"])
        for lam, err in zip(report.grid, report.errors):
            writer.writerow([_fmt(lam), _fmt(err)])

    document = {
        "config": {"T1": cfg.T1, "T2": cfg.T2, "T3": cfg.T3, "m": cfg.m,
                   "p": cfg.p, "n_grid": cfg.n_grid, "order": cfg.order},
        "grid": report.grid,
        "errors": report.errors,
        "fold_errors": report.fold_errors,
        "lambda_star": report.lambda_star,
        "lambda_mean": report.lambda_mean,
        "lambda_std": report.lambda_std,
    }
    report_path = _out_path(args, "report", input_path, ".cv-report.json")
    write_report(report_path, document)
    print(f"lambda_star = {_fmt(report.lambda_star)} ({report_path})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = args["model"]
    if model not in (1, 2, 3, 4):
        raise UsageError(f"model must be 1, 2, 3, or 4, got {model}")
    overrides = {"n": args["n"], "seed": args["seed"]}
    for key in ("p", "b", "sigma", "theta"):
        if args.get(key) is not None:
            overrides[key] = args[key]
    params = synth.default_params(model, **overrides)
    out_path = Path(args["out"]) if args.get("out") else Path(f"model{model}.csv")
    times = np.arange(params.n)
    if model == 1:
        x, y = synth.simulate_model1(params)
        write_csv(out_path, times, [("trend", x), ("observed", y)])
    elif model == 2:
        series = synth.simulate_model2(params)
        write_csv(out_path, times, [("value", series.values)])
    elif model == 3:
        x, y = synth.simulate_model3(params)
        write_csv(out_path, times, [("trend", x), ("observed", y)])
    else:
        x, y = synth.simulate_model4(params)
        write_csv(out_path, times, [("trend", x), ("observed", y)])
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_backtest(args) -> int:
    input_path = args["input"]
    prices = ingest_csv(input_path, column=args.get("column"))
    rates = float(args["rate"])
    if args.get("rates"):
        rates = ingest_csv(args["rates"])
    cfg = strategy.StrategyConfig(
        trend_model=args["model"],
        risk_aversion=args["risk_aversion"],
        alpha_min=args["alpha_min"],
        alpha_max=args["alpha_max"],
        vol_window=args["vol_window"],
        T1=args["t1"], T2=args["t2"], T3=args["t3"],
        cv_m=args["cv_m"], cv_p=args["cv_p"], n_grid=args["n_grid"],
        ma_window=args.get("ma_window"),
        hp_lambda=args.get("hp_lambda"),
    )
    report = strategy.run_backtest(prices, rates, cfg)

    out_path = _out_path(args, "out", input_path, ".wealth.csv")
    write_csv(out_path, report.wealth.times, [
        ("wealth", report.wealth.values),
        ("alpha", report.allocations.values),
    ])
    document = {
        "model": cfg.trend_model,
        "start_index": report.start_index,
        "samples": len(prices),
        "stats": asdict(report.stats),
        "failures": report.failures,
        "floored_variance_dates": report.floored_variance_dates,
        "config": asdict(cfg),
    }
    report_path = _out_path(args, "report", input_path, ".backtest-report.json")
    write_report(report_path, document)
    stats = report.stats
    print(
        f"performance {stats.performance_pct:.2f}%  vol {stats.volatility_pct:.2f}%  "
        f"sharpe {stats.sharpe:.2f}  drawdown {stats.max_drawdown_pct:.2f}%"
    )
    return EXIT_OK


def _add_common(sub):
    sub.add_argument("--config", default=argparse.SUPPRESS,
                     help="key = value file overriding defaults")


def build_parser() -> _Parser:
    parser = _Parser(prog="trendkit", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    f = commands.add_parser("filter", help="extract a trend from a CSV series")
    f.add_argument("input")
    f.add_argument("--kind", choices=["hp", "l1t", "l1c", "l1tc", "l1t-multi"],
                   default=argparse.SUPPRESS)
    f.add_argument("--lambda", dest="lam", type=float, default=argparse.SUPPRESS)
    f.add_argument("--lambda1", type=float, default=argparse.SUPPRESS)
    f.add_argument("--lambda2", type=float, default=argparse.SUPPRESS)
    f.add_argument("--lambda-max-fraction", type=float, default=argparse.SUPPRESS)
    f.add_argument("--auto", action="store_true", default=argparse.SUPPRESS,
                   help="pick lambda by cross-validation")
    f.add_argument("--order", type=int, choices=[1, 2], default=argparse.SUPPRESS,
                   help="difference order for --kind hp")
    f.add_argument("--column", default=argparse.SUPPRESS)
    f.add_argument("--standardize", action="store_true", default=argparse.SUPPRESS)
    f.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    f.add_argument("--max-iter", type=int, default=argparse.SUPPRESS)
    for name in ("--t1", "--t2", "--m", "--p", "--n-grid"):
        f.add_argument(name, type=int, default=argparse.SUPPRESS)
    f.add_argument("--out", default=argparse.SUPPRESS)
    f.add_argument("--report", default=argparse.SUPPRESS)
    _add_common(f)
    f.set_defaults(func=cmd_filter, defaults=_FILTER_DEFAULTS)

    c = commands.add_parser("calibrate", help="cross-validate the penalty weight")
    c.add_argument("input")
    for name in ("--t1", "--t2", "--t3", "--m", "--p", "--n-grid"):
        c.add_argument(name, type=int, default=argparse.SUPPRESS)
    c.add_argument("--order", type=int, choices=[1, 2], default=argparse.SUPPRESS)
    c.add_argument("--column", default=argparse.SUPPRESS)
    c.add_argument("--report", default=argparse.SUPPRESS)
    c.add_argument("--errors-out", default=argparse.SUPPRESS)
    _add_common(c)
    c.set_defaults(func=cmd_calibrate, defaults=_CALIBRATE_DEFAULTS)

    s = commands.add_parser("simulate", help="generate a benchmark process")
    s.add_argument("--model", type=int, default=argparse.SUPPRESS)
    s.add_argument("--n", type=int, default=argparse.SUPPRESS)
    s.add_argument("--p", type=float, default=argparse.SUPPRESS)
    s.add_argument("--b", type=float, default=argparse.SUPPRESS)
    s.add_argument("--sigma", type=float, default=argparse.SUPPRESS)
    s.add_argument("--theta", type=float, default=argparse.SUPPRESS)
    s.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    s.add_argument("--out", default=argparse.SUPPRESS)
    _add_common(s)
    s.set_defaults(func=cmd_simulate, defaults=_SIMULATE_DEFAULTS)

    b = commands.add_parser("backtest", help="walk-forward momentum backtest")
    b.add_argument("input")
    b.add_argument("--model", choices=list(strategy.TREND_MODELS),
                   default=argparse.SUPPRESS)
    b.add_argument("--rate", type=float, default=argparse.SUPPRESS)
    b.add_argument("--rates", default=argparse.SUPPRESS,
                   help="CSV of per-period risk-free rates")
    b.add_argument("--column", default=argparse.SUPPRESS)
    b.add_argument("--risk-aversion", type=float, default=argparse.SUPPRESS)
    b.add_argument("--alpha-min", type=float, default=argparse.SUPPRESS)
    b.add_argument("--alpha-max", type=float, default=argparse.SUPPRESS)
    b.add_argument("--vol-window", type=int, default=argparse.SUPPRESS)
    for name in ("--t1", "--t2", "--t3", "--cv-m", "--cv-p", "--n-grid",
                 "--ma-window"):
        b.add_argument(name, type=int, default=argparse.SUPPRESS)
    b.add_argument("--hp-lambda", type=float, default=argparse.SUPPRESS)
    b.add_argument("--out", default=argparse.SUPPRESS)
    b.add_argument("--report", default=argparse.SUPPRESS)
    _add_common(b)
    b.set_defaults(func=cmd_backtest, defaults=_BACKTEST_DEFAULTS)

    return parser


def main(argv=None) -> int:
    try:
        namespace = build_parser().parse_args(argv)
        explicit = vars(namespace)
        func = explicit.pop("func")
        defaults = explicit.pop("defaults")
        explicit.pop("command")
        config_values = {}
        if "config" in explicit:
            config_values = load_config(explicit.pop("config"))
            unknown = set(config_values) - set(defaults)
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged = {**defaults, **config_values, **explicit}
        return func(merged)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
