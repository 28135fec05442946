#!/usr/bin/env python3
"""End-to-end forecasting experiment on a station CSV.

Ingests the CSV, scores every sample, builds the four-month-ahead task,
splits train/test by station, fits the boosted-tree model, and reports
metrics plus a diagnosis tally on the held-out stations. Artifacts (model
file, loss curve, per-example report) land in --outdir.

Usage:
    python scripts/generate_station_csv.py --stations 60 --out /tmp/stations.csv
    python scripts/run_forecast_experiment.py --input /tmp/stations.csv --outdir /tmp/run1
"""

import argparse
import collections
import sys
from pathlib import Path

from aquagauge.forecast import (
    build_supervised,
    curve_csv,
    evaluate,
    report_csv,
    split_by_station,
    summary_line,
)
from aquagauge.gbm import Hyperparams, gbm_fit, serialize_model
from aquagauge.ingest import impute_missing, parse_dataset
from aquagauge.rules import default_ruleset, diagnose
from aquagauge.wqi import NORMATIVE, compute_wqi


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True)
    parser.add_argument("--outdir", default="experiment_out")
    parser.add_argument("--impute", choices=["drop_row", "median"], default="median")
    parser.add_argument("--test-fraction", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n-trees", type=int, default=100)
    parser.add_argument("--learning-rate", type=float, default=0.1)
    parser.add_argument("--max-depth", type=int, default=8)
    parser.add_argument("--min-samples-split", type=int, default=200)
    parser.add_argument("--min-samples-leaf", type=int, default=30)
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    ds = parse_dataset(Path(args.input).read_text(encoding="utf-8"), source=args.input)
    print(f"parsed {len(ds.samples)} samples ({len(ds.provenance.dropped)} rows dropped)")
    ds = impute_missing(ds, args.impute)
    print(f"after {args.impute}: {len(ds.samples)} samples")

    task = build_supervised(ds, NORMATIVE)
    train_task, test_task = split_by_station(task, args.test_fraction, args.seed)
    print(f"supervised examples: {len(task)} total, {len(train_task)} train, {len(test_task)} test")
    if len(train_task) == 0 or len(test_task) == 0:
        print("not enough paired observations to run the experiment", file=sys.stderr)
        return 2

    hp = Hyperparams(
        n_trees=args.n_trees,
        learning_rate=args.learning_rate,
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        seed=args.seed,
    )
    model = gbm_fit(train_task.features, train_task.targets, hp)
    (outdir / "model.txt").write_text(serialize_model(model), encoding="utf-8")
    (outdir / "training_curve.csv").write_text(curve_csv(model.training_curve), encoding="utf-8")
    print(f"trained {len(model.trees)} trees; final training loss {model.training_curve[-1]:.6f}")

    report = evaluate(model, test_task)
    (outdir / "eval_report.csv").write_text(report_csv(report, test_task.keys), encoding="utf-8")
    print("held-out " + summary_line(report))

    ruleset = default_ruleset()
    tally = collections.Counter()
    test_stations = {station for station, _, _ in test_task.keys}
    for sample in ds.samples:
        if sample.station_code in test_stations:
            tally[diagnose(compute_wqi(sample, NORMATIVE), ruleset).disease] += 1
    print("held-out diagnosis tally:")
    for disease, count in tally.most_common():
        print(f"  {disease}: {count}")
    print(f"artifacts in {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
