"""Command-line front end.

    svrisk simulate --dist t --df 15 --n 2500 --seed 42 --out run
    svrisk fit      --data run/data.csv --model svtl --seed 42 --out run
    svrisk var      --data run/data.csv --model svtl,garch,empirical --out run
    svrisk backtest --data run/data.csv --out run
    svrisk summary  --data run/data.csv

Settings can also come from ``--config FILE`` (JSON object or ``key = value``
lines using the long flag names); command-line flags take precedence.

Exit codes: 0 success, 2 usage error, 3 data/input error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import pipeline as pl
from .backtest import format_table
from .data import DEFAULT_TEST_SIZE, load_returns, split_train_test, summary_stats, write_returns_csv
from .errors import DataError, NumericalError
from .mcmc import posterior_summary
from .sv import simulate_iid_returns

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4

DEFAULTS = {
    "data": None, "model": ",".join(pl.RunConfig().models), "alpha": 0.95, "draws": 20000, "burnin": 2000,
    "seed": 0, "threshold": "auto", "particles": 2000, "window": 252, "h_sweeps": 10, "out": "svrisk_out",
    "train_end": "2016-12-30", "test_start": "2017-01-03", "test_size": DEFAULT_TEST_SIZE,
    "dist": "t", "df": 15.0, "n": 2500,
}
_TYPES = {"alpha": float, "draws": int, "burnin": int, "seed": int, "particles": int, "window": int,
          "h_sweeps": int, "test_size": int, "df": float, "n": int}


class _UsageError(Exception):
    pass


def _read_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"config {path}: invalid JSON ({exc})") from exc
    else:
        raw = {}
        for i, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"config {path}, line {i}: expected key = value")
            k, v = line.split("=", 1)
            raw[k.strip()] = v.strip()
    out = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key == "burn_in":
            key = "burnin"
        if key not in DEFAULTS:
            raise _UsageError(f"config {path}: unknown key {k!r}")
        if isinstance(v, list):
            v = ",".join(map(str, v))
        try:
            out[key] = _TYPES[key](v) if key in _TYPES and v is not None else v
        except ValueError as exc:
            raise _UsageError(f"config {path}: bad value for {k}: {v!r}") from exc
    return out


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run settings")
    g.add_argument("--config", help="JSON or key=value settings file")
    g.add_argument("--data", help="CSV of date,price or date,return")
    g.add_argument("--model", action="append",
                   help=f"comma-separated subset of {','.join(pl.ALL_MODELS)} (repeatable)")
    g.add_argument("--alpha", type=float, help="VaR confidence level (default 0.95)")
    g.add_argument("--draws", type=int, help="retained MCMC draws (default 20000)")
    g.add_argument("--burnin", "--burn-in", dest="burnin", type=int, help="burn-in iterations (default 2000)")
    g.add_argument("--h-sweeps", dest="h_sweeps", type=int, help="latent-state sweeps per iteration (default 10)")
    g.add_argument("--seed", type=int, help="master seed (default 0)")
    g.add_argument("--threshold", help="'auto' or a fixed threshold on the loss residuals")
    g.add_argument("--particles", type=int, help="particle filter size (default 2000)")
    g.add_argument("--window", type=int, help="empirical VaR window (default 252)")
    g.add_argument("--train-end", dest="train_end", help="last training date (default 2016-12-30)")
    g.add_argument("--test-start", dest="test_start", help="first test date (default 2017-01-03)")
    g.add_argument("--test-size", dest="test_size", type=int, help="test days (default 1000)")
    g.add_argument("--out", help="output directory (default svrisk_out)")

    ap = argparse.ArgumentParser(prog="svrisk", description="Stochastic-volatility EVT Value-at-Risk toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="fit the selected models on the training window")
    sub.add_parser("var", parents=[common], help="forecast and write VaR series for the test window")
    sub.add_parser("backtest", parents=[common], help="backtest VaR files against realized returns")
    s = sub.add_parser("simulate", parents=[common], help="write a simulated return series")
    s.add_argument("--dist", choices=("t", "normal"), help="innovation law (default t)")
    s.add_argument("--df", type=float, help="Student-t degrees of freedom (default 15)")
    s.add_argument("--n", type=int, help="number of returns (default 2500)")
    sub.add_parser("summary", parents=[common], help="summary statistics of the return series")
    return ap


def _settings(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(_read_config(args.config))
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = ",".join(v) if k == "model" else v
    return cfg


def _run_config(s: dict) -> pl.RunConfig:
    models = tuple(m.strip().lower() for m in str(s["model"]).split(",") if m.strip())
    unknown = [m for m in models if m not in pl.ALL_MODELS]
    if unknown or not models:
        raise _UsageError(f"unknown model(s) {unknown or models}; choose from {', '.join(pl.ALL_MODELS)}")
    if not 0.5 < s["alpha"] < 1:
        raise _UsageError(f"--alpha must lie in (0.5, 1), got {s['alpha']}")
    return pl.RunConfig(models=models, alpha=s["alpha"], draws=s["draws"], burn_in=s["burnin"], seed=s["seed"],
                        threshold=s["threshold"], particles=s["particles"], window=s["window"],
                        h_sweeps=s["h_sweeps"], out=Path(s["out"]))


def _split(s: dict):
    if not s["data"]:
        raise _UsageError("--data is required")
    r = load_returns(s["data"])
    return split_train_test(r, s["train_end"], s["test_start"], s["test_size"])


def cmd_fit(s: dict) -> int:
    cfg = _run_config(s)
    train, _ = _split(s)
    fits = pl.fit_models(train, cfg)
    for m, f in fits.items():
        if m in pl.SV_MODELS:
            print(f"[{m}] posterior ({cfg.draws} draws, burn-in {cfg.burn_in})")
            for name, row in posterior_summary(f).items():
                print(f"  {name:10s} mean {row['mean']:9.4f}  sd {row['sd']:8.4f}  "
                      f"95% [{row['ci_low']:9.4f}, {row['ci_high']:9.4f}]")
        else:
            print(f"[garch] loglik {f.loglik:.3f}")
            for name in ("alpha0", "alpha1", "beta1", "nu"):
                print(f"  {name:10s} {getattr(f.params, name):9.4f}  se {f.std_errors[name]:8.4f}")
    print(f"fit artifacts in {cfg.out / 'fit'}")
    return EXIT_OK


def cmd_var(s: dict) -> int:
    cfg = _run_config(s)
    train, test = _split(s)
    fits = pl.load_fits(cfg, train)
    series, tails = pl.compute_var(train, test, fits, cfg)
    for m, tf in tails.items():
        t = tf.tail
        print(f"[{m}] u={t.u:.4f} xi={t.xi:.4f} beta={t.beta:.4f} N_u={t.n_exceed} "
              f"W2={tf.gof.w2:.4f} A2={tf.gof.a2:.4f}")
    for tag, v in series.items():
        print(f"{tag}: {len(v)} days, mean VaR {v.var_values.mean():.4f}")
    print(f"VaR files in {cfg.out / 'var'}")
    return EXIT_OK


def cmd_backtest(s: dict) -> int:
    out = Path(s["out"])
    _, test = _split(s)
    series = pl.load_var_dir(out / "var")
    reports = pl.run_backtest(test, series, out)
    print(f"alpha={next(iter(series.values())).alpha}, J={reports[0].J}")
    print(format_table(reports))
    return EXIT_OK


def cmd_simulate(s: dict) -> int:
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    r = simulate_iid_returns(s["n"], s["dist"], s["df"], seed=s["seed"], n_test=s["test_size"])
    path = out / "data.csv"
    write_returns_csv(r, path)
    print(f"wrote {len(r)} returns to {path}")
    return EXIT_OK


def cmd_summary(s: dict) -> int:
    if not s["data"]:
        raise _UsageError("--data is required")
    st = summary_stats(load_returns(s["data"]))
    text = st.to_json()
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "var": cmd_var, "backtest": cmd_backtest, "simulate": cmd_simulate,
            "summary": cmd_summary}


def main(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](_settings(args))
    except _UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"svrisk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"svrisk: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"svrisk: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"svrisk: I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
