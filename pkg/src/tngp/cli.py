"""Command-line front end: ``tngp generate|fit|predict|compare|bench``.

Failures print one line ``tngp: error code=<code>: <message>`` to stderr and
exit with a nonzero status specific to the error class.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import experiments
from .config import ExperimentConfig, load_config
from .data import Dataset, load_csv, write_csv
from .exceptions import TNGPError
from .modelio import load_model, save_model
from .metrics import rmse

EXIT_CODES = {"error": 1, "config": 2, "data": 3, "domain": 4, "size": 5, "shape": 6,
              "factorization": 7, "path": 8}

logger = logging.getLogger("tngp")


class PathError(TNGPError):
    code = "path"


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of ints, got {text!r}")


def _out_dir(path) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise PathError(f"output directory does not exist: {p}")
    return p


def _out_file(path) -> Path:
    p = Path(path)
    if not p.parent.is_dir():
        raise PathError(f"output directory does not exist: {p.parent}")
    return p


def _write_rows(path: Path, rows: list[dict], columns):
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    ranks = getattr(args, "ranks", None)
    over = {"seed": args.seed, "site": getattr(args, "site", None),
            "method": getattr(args, "method", None)}
    if ranks is not None:
        over["ranks"] = ranks
    return cfg.with_overrides(**over)


def cmd_generate(args) -> int:
    cfg = _config(args)
    if cfg.source != "synthetic":
        raise TNGPError("generate needs source = synthetic")
    out = _out_dir(args.out or cfg.out or ".")
    problem = experiments.load_problem(cfg)
    train, test, truth = problem.train, problem.test, problem.truth
    write_csv(out / "train.csv", train, {"f": truth.f_train})
    if test is not None:
        write_csv(out / "test.csv", test, {"f": truth.f_test})
    meta = {
        "sigma_y_sq": truth.sigma_y_sq,
        "seed": cfg.seed,
        "half_widths": list(problem.basis.half_widths),
        "m_per_dim": list(problem.basis.m_per_dim),
        "ranks": list(truth.tt.ranks),
        "site": truth.tt.site,
        "zero_predictor_rmse_train": rmse(np.zeros(train.n), train.targets),
        "zero_predictor_rmse_test": rmse(np.zeros(test.n), test.targets) if test is not None else None,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out / 'train.csv'} ({train.n} rows)"
          + (f" and {out / 'test.csv'} ({test.n} rows)" if test is not None else ""))
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    out = _out_file(args.out or cfg.out or "model.tngp")
    problem = experiments.load_problem(cfg)
    model, info = experiments.fit_method(cfg.method, cfg, problem)
    save_model(out, model)
    report = dict(info)
    if problem.test is not None:
        report.update(experiments.evaluate(model, problem))
    report_path = out.with_name(out.name + ".report.json")
    report_path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out} and {report_path}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    header = _header(args.data)
    if args.input_columns:
        names = [c.strip() for c in args.input_columns.split(",")]
    else:
        names = [h for h in header if h not in (args.target_column, "f")]
    if args.target_column in header:
        ds = load_csv(args.data, names, args.target_column)
    else:
        ds = _inputs_only(args.data, names)
    pred = model.predict(ds.inputs, include_noise=args.include_noise)
    out = _out_file(args.out) if args.out else None
    fh = out.open("w", encoding="utf-8", newline="") if out else nullcontext(sys.stdout)
    with fh as stream:
        stream.write("mean,variance\n")
        for m, v in zip(pred.mean, pred.variance):
            stream.write(f"{float(m)!r},{float(v)!r}\n")
    return 0


def _header(path) -> list:
    if not Path(path).is_file():
        raise PathError(f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return [h.strip() for h in fh.readline().split(",")]


def _inputs_only(path, names):
    # files without a target column get a zero placeholder target
    header = _header(path)
    X = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                X.append([float(row[header.index(c)]) for c in names])
            except (ValueError, IndexError):
                raise TNGPError(f"{path}: row {rowno}: malformed input row") from None
    X = np.array(X)
    return Dataset(X, np.zeros(X.shape[0]), input_names=tuple(names))


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    over = {"seed": args.seed}
    if args.ranks is not None:
        over["rank_list"] = args.ranks
    cfg = cfg.with_overrides(**over)
    out = _out_dir(args.out or cfg.out or ".")
    rows = experiments.rank_sweep(cfg)
    _write_rows(out / "report.csv", rows, experiments.REPORT_COLUMNS)
    _write_rows(out / "plot_data.csv", experiments.aggregate(rows), experiments.PLOT_COLUMNS)
    print(f"wrote {out / 'report.csv'} ({len(rows)} rows) and {out / 'plot_data.csv'}")
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args)
    out = _out_dir(args.out or cfg.out or ".")
    rows = experiments.bench(cfg)
    cols = ("method", "n_train", "n_test", "basis_count", "time_fit", "time_predict",
            "rmse", "rmse_f", "msll", "sum_log_loss")
    _write_rows(out / "bench.csv", rows, cols)
    for row in rows:
        print(f"{row['method']:>11}  fit {row['time_fit']:9.3f}s  predict {row['time_predict']:8.3f}s"
              f"  rmse {row['rmse']:.4g}  msll {row['msll']:.4g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tngp", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="BLAS threads (0 = automatic; env TNGP_THREADS as fallback)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, ranks=True, site=True, method=True):
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        if method:
            p.add_argument("--method", choices=("projected", "hilbert-gp", "full-gp"), default=None)
        if ranks:
            p.add_argument("--ranks", type=_int_list, default=None)
        if site:
            p.add_argument("--site", type=int, default=None)

    p = sub.add_parser("generate", help="write synthetic train/test CSVs")
    common(p, method=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit a model and save it")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict mean and variance from a saved model")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out", default=None)
    p.add_argument("--input-columns", default=None)
    p.add_argument("--target-column", default="y")
    p.add_argument("--include-noise", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="rank sweep of all methods on synthetic data")
    common(p, site=False, method=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="time and score every method on one dataset")
    common(p, ranks=True, site=True, method=False)
    p.set_defaults(func=cmd_bench)
    return parser


def _thread_limit(args):
    n = args.threads
    if n is None:
        env = os.environ.get("TNGP_THREADS")
        n = int(env) if env and env.strip().isdigit() else 0
    if n > 0:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=n)
    return nullcontext()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit(args):
            return args.func(args)
    except Exception as exc:
        if isinstance(exc, TNGPError):
            code = exc.code
        elif isinstance(exc, OSError):
            code = "path"
        else:
            code = "error"
            logger.debug("unhandled", exc_info=True)
        message = str(exc).replace("\n", " ")
    config = getattr(args, "config", None)
    if config and code != "path":
        message = f"{config}: {message}"
    print(f"tngp: error code={code}: {message}", file=sys.stderr)
    return EXIT_CODES.get(code, 1)

if __name__ == "__main__":
    sys.exit(main())
