"""Four-month-ahead WQI forecasting task construction and evaluation.

Each station's observations are ordered in time and every observation is
paired with the same station's observation four calendar months later
(tolerance one month; nearest wins, ties to the earlier candidate). The
feature row for an observation holds its six chemical inputs, temperature,
its own WQI, up to two prior WQI values with presence flags, and the month
and year; the target is the paired later WQI.
"""

from __future__ import annotations

import csv
import io
import itertools
import statistics
from dataclasses import dataclass

import numpy as np

from .errors import AquagaugeError, LengthMismatch
from .gbm import FeatureMatrix, GbmModel, predict_matrix
from .ingest import Dataset
from .wqi import NORMATIVE, compute_wqi

FEATURE_NAMES = [
    "ph",
    "do",
    "bod",
    "conductivity",
    "nitrate",
    "total_coliform",
    "temp",
    "wqi",
    "wqi_lag1",
    "wqi_lag1_present",
    "wqi_lag2",
    "wqi_lag2_present",
    "month",
    "year",
]

WINDOW_MONTHS = 4
WINDOW_TOLERANCE = 1


class ForecastError(AquagaugeError):
    pass


class Empty(ForecastError):
    def __init__(self, what: str = "input"):
        super().__init__(f"{what} is empty")


class ZeroActual(ForecastError):
    def __init__(self):
        super().__init__("percentile error undefined for actual value 0")


class DegenerateActuals(ForecastError):
    def __init__(self):
        super().__init__("r_squared undefined: actuals have zero variance")


class FeatureMismatch(ForecastError):
    def __init__(self, expected: list[str], got: list[str]):
        super().__init__(f"model features {expected} != task features {got}")


@dataclass
class SupervisedTask:
    features: FeatureMatrix
    targets: np.ndarray
    keys: list[tuple[str, int, int]]  # (station_code, month, year)

    def __len__(self) -> int:
        return len(self.keys)


@dataclass
class EvalReport:
    mse: float
    r_squared: float
    mean_percentile_error: float
    per_example: list[tuple[float, float, float]]  # (actual, predicted, pct err)


def _month_index(year: int, month: int) -> int:
    return year * 12 + (month - 1)


def build_feature_rows(
    ds: Dataset, mode: str = NORMATIVE
) -> tuple[FeatureMatrix, list[tuple[str, int, int]], np.ndarray]:
    """Feature rows for every observation, in dataset order.

    Requires an imputed dataset (all six WQI inputs present). Missing
    temperature is filled with the dataset median of observed temperatures
    (0.0 when none was ever observed) so rows stay finite.
    """
    observed_temps = [s.temp for s in ds.samples if s.temp is not None]
    temp_fill = float(statistics.median(observed_temps)) if observed_temps else 0.0

    rows: list[list[float]] = []
    keys: list[tuple[str, int, int]] = []
    wqis: list[float] = []
    for _, group in itertools.groupby(ds.samples, key=lambda s: s.station_code):
        history: list[float] = []
        for s in group:
            rec = compute_wqi(s, mode)
            lag1 = history[-1] if len(history) >= 1 else None
            lag2 = history[-2] if len(history) >= 2 else None
            rows.append(
                [
                    s.ph,
                    s.dissolved_oxygen,
                    s.bod,
                    s.conductivity,
                    s.nitrate,
                    s.total_coliform,
                    s.temp if s.temp is not None else temp_fill,
                    rec.wqi,
                    lag1 if lag1 is not None else 0.0,
                    1.0 if lag1 is not None else 0.0,
                    lag2 if lag2 is not None else 0.0,
                    1.0 if lag2 is not None else 0.0,
                    float(s.month),
                    float(s.year),
                ]
            )
            keys.append((s.station_code, s.month, s.year))
            wqis.append(rec.wqi)
            history.append(rec.wqi)
    values = (
        np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(FEATURE_NAMES)))
    )
    return FeatureMatrix(values, list(FEATURE_NAMES)), keys, np.asarray(wqis)


def build_supervised(ds: Dataset, mode: str = NORMATIVE) -> SupervisedTask:
    """Pair every observation with its station's observation ~4 months later.

    Candidates 3-5 months ahead qualify; the one nearest to 4 wins and ties
    go to the earlier candidate. Stations with a single observation
    contribute nothing. An empty task is legal.
    """
    fm, keys, wqis = build_feature_rows(ds, mode)
    month_idx = [_month_index(year, month) for _, month, year in keys]

    by_station: dict[str, list[int]] = {}
    for i, (station, _, _) in enumerate(keys):
        by_station.setdefault(station, []).append(i)

    pairs: list[tuple[int, float]] = []  # (feature row index, target wqi)
    for obs in by_station.values():
        for a_pos, i in enumerate(obs):
            best_j = None
            best_dist = None
            best_delta = None
            for j in obs[a_pos + 1 :]:
                delta = month_idx[j] - month_idx[i]
                if delta > WINDOW_MONTHS + WINDOW_TOLERANCE:
                    break
                if delta < WINDOW_MONTHS - WINDOW_TOLERANCE:
                    continue
                dist = abs(delta - WINDOW_MONTHS)
                if best_dist is None or dist < best_dist or (dist == best_dist and delta < best_delta):
                    best_j, best_dist, best_delta = j, dist, delta
            if best_j is not None:
                pairs.append((i, float(wqis[best_j])))

    pairs.sort(key=lambda pair: pair[0])  # dataset order
    example_rows = [i for i, _ in pairs]
    return SupervisedTask(
        features=FeatureMatrix(fm.values[example_rows], list(FEATURE_NAMES)),
        targets=np.asarray([t for _, t in pairs], dtype=np.float64),
        keys=[keys[i] for i in example_rows],
    )


def mse(actual, predicted) -> float:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.size != p.size:
        raise LengthMismatch(a.size, p.size)
    if a.size == 0:
        raise Empty("metric input")
    return float(np.mean((a - p) ** 2))


def r_squared(actual, predicted) -> float:
    """1 - SS_res/SS_tot about the mean of actual; <= 1, negative when the
    model underperforms the mean predictor."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.size != p.size:
        raise LengthMismatch(a.size, p.size)
    if a.size < 2:
        raise Empty("metric input (need >= 2 points)")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateActuals()
    ss_res = float(np.sum((a - p) ** 2))
    return 1.0 - ss_res / ss_tot


def percentile_error(actual: float, predicted: float) -> float:
    if actual == 0:
        raise ZeroActual()
    return abs(predicted - actual) / abs(actual) * 100.0


def evaluate(model: GbmModel, task: SupervisedTask) -> EvalReport:
    """Predict every task example and assemble the metric report, ordered by
    task key order."""
    if model.feature_names != task.features.feature_names:
        raise FeatureMismatch(model.feature_names, task.features.feature_names)
    if len(task) == 0:
        raise Empty("task")
    predictions = predict_matrix(model, task.features.values)
    per_example = [
        (float(a), float(p), percentile_error(float(a), float(p)))
        for a, p in zip(task.targets, predictions)
    ]
    return EvalReport(
        mse=mse(task.targets, predictions),
        r_squared=r_squared(task.targets, predictions),
        mean_percentile_error=float(np.mean([e[2] for e in per_example])),
        per_example=per_example,
    )


def split_by_station(
    task: SupervisedTask, test_fraction: float, seed: int
) -> tuple[SupervisedTask, SupervisedTask]:
    """Seeded group split: every station's examples land wholly on one side.

    The test side receives floor(test_fraction * n_stations) stations, at
    least one when the fraction is positive and there are two or more
    stations to split.
    """
    if not 0.0 <= test_fraction < 1.0:
        raise ValueError("test_fraction must be in [0, 1)")
    stations = sorted({station for station, _, _ in task.keys})
    n_test = int(len(stations) * test_fraction)
    if n_test == 0 and test_fraction > 0.0 and len(stations) >= 2:
        n_test = 1
    rng = np.random.default_rng(seed)
    shuffled = [stations[i] for i in rng.permutation(len(stations))]
    test_stations = set(shuffled[:n_test])

    def take(selector) -> SupervisedTask:
        idx = [i for i, (station, _, _) in enumerate(task.keys) if selector(station)]
        return SupervisedTask(
            features=FeatureMatrix(task.features.values[idx], list(task.features.feature_names)),
            targets=task.targets[idx],
            keys=[task.keys[i] for i in idx],
        )

    return take(lambda s: s not in test_stations), take(lambda s: s in test_stations)


def report_csv(report: EvalReport, keys: list[tuple[str, int, int]]) -> str:
    """Per-example CSV: keys, actual, predicted, percentile error."""
    if len(keys) != len(report.per_example):
        raise LengthMismatch(len(report.per_example), len(keys))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["station_code", "month", "year", "actual", "predicted", "percentile_error"])
    for (station, month, year), (a, p, e) in zip(keys, report.per_example):
        writer.writerow([station, month, year, f"{a:.6f}", f"{p:.6f}", f"{e:.6f}"])
    return buf.getvalue()


def summary_line(report: EvalReport) -> str:
    return f"mse={report.mse!r} r2={report.r_squared!r} mean_pct_err={report.mean_percentile_error!r}"


def curve_csv(curve: list[float]) -> str:
    """Training curve as two-column CSV (iteration, loss)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "loss"])
    for i, loss in enumerate(curve):
        writer.writerow([i, format(loss, ".17g")])
    return buf.getvalue()
