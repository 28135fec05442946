"""Water-quality index: banded sub-index scoring and weighted aggregation.

Each chemical parameter is scored into one of {0, 40, 60, 80, 100} by a fixed
band table, the scores are scaled by fixed per-parameter weights, and the WQI
is the sum of the six weighted scores. Bands are evaluated in table order,
first match wins, each band closed on both ends. Values covered by no band
score 0, with two refinements:

* the DO and pH tables leave small gaps between printed bands ((4, 4.1) and
  (5, 5.1) for DO, (6.9, 7) for pH); values in a gap take the score of the
  adjacent band with the larger score rather than dropping to 0;
* ``legacy_nco`` mode scores total coliform above 1000 as 40 instead of 0,
  reproducing the historical scoring some archived result tables carry.

The weights sum to 0.998, so the WQI range is [0, 99.8] (the float64 image
of the top end overshoots by ~1e-14 because 0.998 is not exactly
representable).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import AquagaugeError, NonFinite
from .ingest import WaterSample

NORMATIVE = "normative"
LEGACY_NCO = "legacy_nco"
MODES = (NORMATIVE, LEGACY_NCO)

SUB_INDEX_KINDS = ("ph", "do", "bod", "ec", "na", "co")
SUB_INDEX_SCORES = (0, 40, 60, 80, 100)

WEIGHTS = {
    "ph": 0.165,
    "do": 0.281,
    "bod": 0.234,
    "ec": 0.009,
    "na": 0.028,
    "co": 0.281,
}

_INF = math.inf

# (lo, hi, score) triples, closed intervals, evaluated in printed order.
_BANDS: dict[str, tuple[tuple[float, float, int], ...]] = {
    "ph": (
        (7.0, 8.5, 100),
        (8.5, 8.6, 80),
        (6.8, 6.9, 80),
        (8.6, 8.8, 60),
        (6.7, 6.8, 60),
        (8.8, 9.0, 40),
        (6.5, 6.7, 40),
    ),
    "do": (
        (6.0, _INF, 100),
        (5.1, 6.0, 80),
        (4.1, 5.0, 60),
        (3.0, 4.0, 40),
    ),
    "co": (
        (0.0, 5.0, 100),
        (5.0, 50.0, 80),
        (50.0, 500.0, 60),
        (500.0, 1000.0, 40),
    ),
    "bod": (
        (0.0, 3.0, 100),
        (3.0, 6.0, 80),
        (6.0, 80.0, 60),
        (80.0, 125.0, 40),
    ),
    "ec": (
        (0.0, 75.0, 100),
        (75.0, 150.0, 80),
        (150.0, 225.0, 60),
        (225.0, 300.0, 40),
    ),
    "na": (
        (0.0, 20.0, 100),
        (20.0, 50.0, 80),
        (50.0, 100.0, 60),
        (100.0, 200.0, 40),
    ),
}

# Gap fills, only consulted after every printed band has missed.
_GAP_BANDS: dict[str, tuple[tuple[float, float, int], ...]] = {
    "do": ((4.0, 4.1, 60), (5.0, 5.1, 80)),
    "ph": ((6.9, 7.0, 100),),
}


class WqiError(AquagaugeError):
    pass


class MissingInput(WqiError):
    def __init__(self, fields: list[str]):
        super().__init__(f"sample is missing wqi input(s): {', '.join(fields)}")
        self.fields = fields


@dataclass(frozen=True)
class SubIndices:
    nph: int
    ndo: int
    nbdo: int
    nec: int
    nna: int
    nco: int

    def as_tuple(self) -> tuple[int, ...]:
        return (self.nph, self.ndo, self.nbdo, self.nec, self.nna, self.nco)


@dataclass(frozen=True)
class WeightedScores:
    wph: float
    wdo: float
    wbdo: float
    wec: float
    wna: float
    wco: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.wph, self.wdo, self.wbdo, self.wec, self.wna, self.wco)


@dataclass
class WqiRecord:
    sample: WaterSample | None
    sub: SubIndices
    weighted: WeightedScores
    wqi: float
    mode: str


def sub_index(kind: str, value: float, mode: str = NORMATIVE) -> int:
    """Score one parameter value into {0, 40, 60, 80, 100}."""
    if kind not in _BANDS:
        raise ValueError(f"unknown sub-index kind: {kind!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    if not math.isfinite(value):
        raise NonFinite(value, context=f"{kind} value")
    for lo, hi, score in _BANDS[kind]:
        if lo <= value <= hi:
            return score
    for lo, hi, score in _GAP_BANDS.get(kind, ()):
        if lo <= value <= hi:
            return score
    if kind == "co" and mode == LEGACY_NCO and value > 1000.0:
        return 40
    return 0


def weighted_scores(sub: SubIndices) -> WeightedScores:
    """Scale each sub-index by its fixed weight."""
    return WeightedScores(
        wph=sub.nph * WEIGHTS["ph"],
        wdo=sub.ndo * WEIGHTS["do"],
        wbdo=sub.nbdo * WEIGHTS["bod"],
        wec=sub.nec * WEIGHTS["ec"],
        wna=sub.nna * WEIGHTS["na"],
        wco=sub.nco * WEIGHTS["co"],
    )


def compute_wqi(sample: WaterSample, mode: str = NORMATIVE) -> WqiRecord:
    """Score a sample end to end: sub-indices, weighted scores, aggregate WQI.

    Requires all six inputs present (pH, DO, BOD, conductivity, nitrate and
    total coliform; total, not fecal, feeds the coliform sub-index).
    """
    missing = sample.missing_wqi_inputs()
    if missing:
        raise MissingInput(missing)
    sub = SubIndices(
        nph=sub_index("ph", sample.ph, mode),
        ndo=sub_index("do", sample.dissolved_oxygen, mode),
        nbdo=sub_index("bod", sample.bod, mode),
        nec=sub_index("ec", sample.conductivity, mode),
        nna=sub_index("na", sample.nitrate, mode),
        nco=sub_index("co", sample.total_coliform, mode),
    )
    w = weighted_scores(sub)
    wqi = w.wph + w.wdo + w.wbdo + w.wec + w.wna + w.wco
    return WqiRecord(sample=sample, sub=sub, weighted=w, wqi=wqi, mode=mode)


@lru_cache(maxsize=1)
def reachable_wqi_values() -> frozenset[float]:
    """Every WQI value producible by some combination of sub-index scores.

    Uses the same term order as :func:`compute_wqi`, so membership is exact
    float equality.
    """
    values = set()
    for combo in itertools.product(SUB_INDEX_SCORES, repeat=6):
        w = weighted_scores(SubIndices(*combo))
        values.add(w.wph + w.wdo + w.wbdo + w.wec + w.wna + w.wco)
    return frozenset(values)
