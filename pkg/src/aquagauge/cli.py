"""Command-line front end.

Subcommands: wqi, train, predict, evaluate, diagnose, plot-data. Every run
echoes its fully resolved configuration to stderr, writes output files
atomically (temp file + rename), and is deterministic for a fixed seed.
Exit codes: 0 success, 2 usage or data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from pathlib import Path

from . import forecast, gbm, ingest, rules, wqi
from .errors import AquagaugeError

_MODE_FLAG = {"normative": wqi.NORMATIVE, "legacy-nco": wqi.LEGACY_NCO}
_IMPUTE_FLAG = {"drop": "drop_row", "median": "median"}


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(target.parent) or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        _atomic_write(out_path, text)
    else:
        sys.stdout.write(text)


def _echo_config(args: argparse.Namespace) -> None:
    for key in sorted(vars(args)):
        if key == "func":
            continue
        print(f"log: {key}={getattr(args, key)}", file=sys.stderr)


def _load_dataset(args: argparse.Namespace) -> ingest.Dataset:
    text = Path(args.input).read_text(encoding="utf-8")
    strictness = "strict" if getattr(args, "strict", False) else "lenient"
    ds = ingest.parse_dataset(text, strictness=strictness, source=args.input)
    return ingest.impute_missing(ds, _IMPUTE_FLAG[args.impute])


def _parse_split(spec: str) -> tuple[str, float]:
    if spec == "all":
        return "all", 0.0
    kind, _, frac = spec.partition(":")
    if kind == "station" and frac:
        try:
            fraction = float(frac)
        except ValueError:
            fraction = -1.0
        if 0.0 < fraction < 1.0:
            return "station", fraction
    raise AquagaugeError(f"bad --split value {spec!r}; expected 'all' or 'station:<fraction>'")


def cmd_wqi(args: argparse.Namespace) -> int:
    ds = _load_dataset(args)
    if not ds.samples:
        raise AquagaugeError("no samples")
    mode = _MODE_FLAG[args.mode]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["station_code", "month_year", "nph", "ndo", "nbdo", "nec", "nna", "nco",
         "wph", "wdo", "wbdo", "wec", "wna", "wco", "wqi"]
    )
    for s in ds.samples:
        rec = wqi.compute_wqi(s, mode)
        writer.writerow(
            [s.station_code, f"{s.month}-{s.year}", *rec.sub.as_tuple(),
             *(f"{v:.2f}" for v in rec.weighted.as_tuple()), f"{rec.wqi:.2f}"]
        )
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    ds = _load_dataset(args)
    mode = _MODE_FLAG[args.mode]
    task = forecast.build_supervised(ds, mode)
    kind, fraction = _parse_split(args.split)
    if kind == "station":
        task, _ = forecast.split_by_station(task, fraction, args.seed)
    if len(task) == 0:
        raise AquagaugeError("training task is empty: need >= 2 observations for some station")
    hp = gbm.Hyperparams(
        n_trees=args.n_trees,
        learning_rate=args.learning_rate,
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        seed=args.seed,
    )
    model = gbm.gbm_fit(task.features, task.targets, hp)
    _atomic_write(args.model, gbm.serialize_model(model))
    _atomic_write(args.out, forecast.curve_csv(model.training_curve))
    print(f"final_training_loss={model.training_curve[-1]!r}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = gbm.deserialize_model(Path(args.model).read_text(encoding="utf-8"))
    ds = _load_dataset(args)
    if not ds.samples:
        raise AquagaugeError("no samples")
    mode = _MODE_FLAG[args.mode]
    fm, keys, wqis = forecast.build_feature_rows(ds, mode)
    if model.feature_names != fm.feature_names:
        raise forecast.FeatureMismatch(model.feature_names, fm.feature_names)
    predictions = gbm.predict_matrix(model, fm.values)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["station_code", "month", "year", "wqi", "predicted_wqi"])
    for (station, month, year), current, predicted in zip(keys, wqis, predictions):
        writer.writerow([station, month, year, f"{current:.6f}", f"{predicted:.6f}"])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = gbm.deserialize_model(Path(args.model).read_text(encoding="utf-8"))
    ds = _load_dataset(args)
    mode = _MODE_FLAG[args.mode]
    task = forecast.build_supervised(ds, mode)
    kind, fraction = _parse_split(args.split)
    if kind == "station":
        _, task = forecast.split_by_station(task, fraction, args.seed)
    if len(task) == 0:
        raise AquagaugeError("evaluation task is empty")
    report = forecast.evaluate(model, task)
    _atomic_write(args.out, forecast.report_csv(report, task.keys))
    print(forecast.summary_line(report))
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    ds = _load_dataset(args)
    if not ds.samples:
        raise AquagaugeError("no samples")
    mode = _MODE_FLAG[args.mode]
    if args.rules:
        ruleset = rules.load_rules(Path(args.rules).read_text(encoding="utf-8"))
    else:
        ruleset = rules.default_ruleset()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["station_code", "month", "year", "wqi", "disease", "suggestion"])
    for s in ds.samples:
        rec = wqi.compute_wqi(s, mode)
        d = rules.diagnose(rec, ruleset)
        writer.writerow([s.station_code, s.month, s.year, f"{rec.wqi:.6f}", d.disease, d.suggestion])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_plot_data(args: argparse.Namespace) -> int:
    did_anything = False
    if args.model:
        model = gbm.deserialize_model(Path(args.model).read_text(encoding="utf-8"))
        if not model.training_curve:
            raise AquagaugeError("model file carries no training curve")
        _atomic_write(args.out_curve, forecast.curve_csv(model.training_curve))
        did_anything = True
    if args.input:
        with open(args.input, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"actual", "predicted"} <= set(reader.fieldnames):
                raise AquagaugeError("evaluation CSV must carry 'actual' and 'predicted' columns")
            rows = [(row["actual"], row["predicted"]) for row in reader]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["actual", "predicted"])
        writer.writerows(rows)
        _atomic_write(args.out_scatter, buf.getvalue())
        did_anything = True
    if not did_anything:
        raise AquagaugeError("nothing to plot: give --model and/or --input")
    return 0


def _add_shared(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    if needs_input:
        p.add_argument("--input", required=True, help="input CSV path")
    p.add_argument("--mode", choices=sorted(_MODE_FLAG), default="normative",
                   help="coliform scoring mode (default: normative)")
    p.add_argument("--impute", choices=sorted(_IMPUTE_FLAG), default="drop",
                   help="missing-value policy for the six wqi inputs (default: drop)")
    p.add_argument("--seed", type=int, default=0, help="seed for anything randomized")
    p.add_argument("--strict", action="store_true", help="error on any malformed cell")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aquagauge",
        description="Water-quality scoring, WQI forecasting and disease diagnosis over station CSVs.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("wqi", help="score every sample (sub-indices, weighted scores, wqi)")
    _add_shared(p)
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_wqi)

    p = sub.add_parser("train", help="fit the forecasting model")
    _add_shared(p)
    p.add_argument("--model", default="model.txt", help="where to write the model file")
    p.add_argument("--out", default="training_curve.csv", help="where to write the loss curve CSV")
    p.add_argument("--split", default="station:0.2",
                   help="'all' or 'station:<test fraction>'; training uses the non-test side")
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--min-samples-split", type=int, default=200)
    p.add_argument("--min-samples-leaf", type=int, default=30)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="current wqi plus the 4-month-ahead prediction per sample")
    _add_shared(p)
    p.add_argument("--model", default="model.txt", help="model file to load")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="metrics against observed 4-month-ahead outcomes")
    _add_shared(p)
    p.add_argument("--model", default="model.txt", help="model file to load")
    p.add_argument("--out", default="eval_report.csv", help="per-example report CSV path")
    p.add_argument("--split", default="station:0.2",
                   help="'all' or 'station:<test fraction>'; evaluation uses the test side")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("diagnose", help="disease diagnosis per sample from the rule file")
    _add_shared(p)
    p.add_argument("--rules", default=None, help="rules file (default: shipped ruleset)")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("plot-data", help="export plottable CSVs (loss curve, actual-vs-predicted)")
    p.add_argument("--model", default=None, help="model file; exports its training curve")
    p.add_argument("--input", default=None, help="evaluate's per-example CSV; exports the scatter")
    p.add_argument("--out-curve", default="loss_curve.csv")
    p.add_argument("--out-scatter", default="actual_vs_predicted.csv")
    p.set_defaults(func=cmd_plot_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except AquagaugeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - internal invariant violations
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
