"""Downstream analysis: correlation, effect classification, debias
comparison, inter-rater agreement, and human-judgment coherence.

These are pure, stateless functions over already-computed test results
and reference statistics: nothing here touches embeddings.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .association import TestResult
from .errors import (
    DegenerateDistributionError,
    InvalidInputError,
)

# Cohen's conventional magnitude thresholds.
NEUTRAL_BAND = 0.2
SMALL_THRESHOLD = 0.2
MEDIUM_THRESHOLD = 0.5
LARGE_THRESHOLD = 0.8

SIGN_FLIP_TOLERANCE = 1e-9

CONDITIONS = ("control", "debias1", "debias2")

CANT_ANSWER = "Can't answer"


@dataclass(frozen=True)
class DemographicRecord:
    """Real-world composition statistics for one occupation or award.

    Occupations carry workforce percentages; awards carry laureate counts
    from which percentage axes are derived.
    """

    label: str
    attribute_group: str
    pct_women: float | None = None
    pct_black: float | None = None
    pct_white: float | None = None
    n_female: int | None = None
    n_black: int | None = None
    n_total: int | None = None

    def __post_init__(self):
        for name in ("pct_women", "pct_black", "pct_white"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 100.0):
                raise InvalidInputError(f"{self.label}: {name}={v} outside [0, 100]")
        for name in ("n_female", "n_black", "n_total"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise InvalidInputError(f"{self.label}: {name}={v} negative")
        if self.n_total is not None:
            for name in ("n_female", "n_black"):
                v = getattr(self, name)
                if v is not None and v > self.n_total:
                    raise InvalidInputError(
                        f"{self.label}: {name}={v} exceeds n_total={self.n_total}"
                    )

    def axis_value(self, axis: str) -> float:
        """Percentage for a named axis, deriving complements and award
        axes from the stored statistics."""
        direct = {
            "pct_women": self.pct_women,
            "pct_black": self.pct_black,
            "pct_white": self.pct_white,
        }
        if axis in direct:
            if direct[axis] is None:
                raise InvalidInputError(f"{self.label}: no {axis} statistic")
            return float(direct[axis])
        if axis == "pct_men":
            if self.pct_women is None:
                raise InvalidInputError(f"{self.label}: no pct_women statistic")
            return 100.0 - float(self.pct_women)
        if self.n_total is None:
            raise InvalidInputError(f"{self.label}: no counts for axis {axis}")
        if axis == "pct_female":
            return 100.0 * self.n_female / self.n_total
        if axis == "pct_male":
            return 100.0 * (self.n_total - self.n_female) / self.n_total
        if axis == "pct_black_laureates":
            return 100.0 * self.n_black / self.n_total
        if axis == "pct_non_black":
            return 100.0 * (self.n_total - self.n_black) / self.n_total
        raise InvalidInputError(f"unknown demographic axis {axis!r}")


@dataclass(frozen=True)
class CorrelationResult:
    """Pearson's r between effect sizes and one demographic axis."""

    r: float
    n: int
    pairs: tuple[tuple[str, float, float], ...]
    group: str = ""
    axis: str = ""

    def __post_init__(self):
        if not (-1.0 <= self.r <= 1.0):
            raise InvalidInputError(f"r={self.r} outside [-1, 1]")
        if self.n < 3:
            raise InvalidInputError(f"need n >= 3 pairs to report r, got {self.n}")


@dataclass(frozen=True)
class ComparisonResult:
    """Effect-size movement for one scenario across debias conditions.

    Deltas are debias minus control; a sign flip needs both effects to be
    meaningfully nonzero (|d| >= 1e-9). Neutrality labels classify each
    condition's |d| against the 0.2 / 0.5 / 0.8 thresholds.
    """

    scenario: str
    d_control: float
    d_debias1: float | None
    d_debias2: float | None
    delta1: float | None
    delta2: float | None
    sign_flip1: bool | None
    sign_flip2: bool | None
    neutrality_control: str
    neutrality_debias1: str | None
    neutrality_debias2: str | None
    axis: str = ""


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's category judgment for one video."""

    video_id: str
    annotator_id: str
    category: str


def pearson_r(
    xs: Sequence[float],
    ys: Sequence[float],
    pairs: Sequence[tuple[str, float, float]] | None = None,
    group: str = "",
    axis: str = "",
) -> CorrelationResult:
    """Pearson product-moment correlation of two equal-length lists.

    Requires at least 3 pairs and nonzero variance on both sides; the
    coefficient is clamped into [-1, 1] against rounding overshoot.
    """
    if len(xs) != len(ys):
        raise InvalidInputError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise InvalidInputError(f"need at least 3 pairs, got {len(xs)}")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("non-finite values in correlation input")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateDistributionError("zero variance; correlation undefined")
    r = float(np.clip((dx * dy).sum() / (sx * sy), -1.0, 1.0))
    if pairs is None:
        pairs = tuple((f"pair-{i:03d}", float(a), float(b))
                      for i, (a, b) in enumerate(zip(xs, ys)))
    return CorrelationResult(r=r, n=len(xs), pairs=tuple(pairs),
                             group=group, axis=axis)


def classify_effect(d: float) -> str:
    """Label |d| against the conventional 0.2 / 0.5 / 0.8 thresholds."""
    if not math.isfinite(d):
        raise InvalidInputError(f"effect size must be finite, got {d}")
    m = abs(d)
    if m < SMALL_THRESHOLD:
        return "neutral"
    if m < MEDIUM_THRESHOLD:
        return "small"
    if m < LARGE_THRESHOLD:
        return "medium"
    return "large"


def _effect(value) -> float:
    return value.effect_size if isinstance(value, TestResult) else float(value)


def _sign_flip(d_control: float, d_debias: float) -> bool:
    if abs(d_control) < SIGN_FLIP_TOLERANCE or abs(d_debias) < SIGN_FLIP_TOLERANCE:
        return False
    return (d_control > 0) != (d_debias > 0)


def compare_conditions(
    results: Mapping[str, Mapping[str, "TestResult | float"]],
    axes: Mapping[str, str] | None = None,
) -> list[ComparisonResult]:
    """Per-scenario deltas, sign flips, and neutrality across conditions.

    ``results`` maps scenario -> condition -> TestResult or bare effect
    size. Every scenario must include the control condition; either debias
    condition may be absent.
    """
    out = []
    for scenario in results:
        conditions = results[scenario]
        unknown = set(conditions) - set(CONDITIONS)
        if unknown:
            raise InvalidInputError(
                f"{scenario}: unknown condition tags {sorted(unknown)}"
            )
        if "control" not in conditions:
            raise InvalidInputError(f"{scenario}: missing control condition")
        d_control = _effect(conditions["control"])
        deltas: dict[str, float | None] = {}
        flips: dict[str, bool | None] = {}
        labels: dict[str, str | None] = {}
        ds: dict[str, float | None] = {}
        for cond in ("debias1", "debias2"):
            if cond in conditions:
                d = _effect(conditions[cond])
                ds[cond] = d
                deltas[cond] = d - d_control
                flips[cond] = _sign_flip(d_control, d)
                labels[cond] = classify_effect(d)
            else:
                ds[cond] = deltas[cond] = flips[cond] = labels[cond] = None
        out.append(
            ComparisonResult(
                scenario=scenario,
                d_control=d_control,
                d_debias1=ds["debias1"],
                d_debias2=ds["debias2"],
                delta1=deltas["debias1"],
                delta2=deltas["debias2"],
                sign_flip1=flips["debias1"],
                sign_flip2=flips["debias2"],
                neutrality_control=classify_effect(d_control),
                neutrality_debias1=labels["debias1"],
                neutrality_debias2=labels["debias2"],
                axis=(axes or {}).get(scenario, ""),
            )
        )
    return out


def annotation_matrix(
    annotations: Iterable[AnnotationRecord],
) -> tuple[list[str], list[str], np.ndarray]:
    """Pivot records into an item x category count matrix.

    Returns (video ids, category labels, counts). Each (video, annotator)
    pair may appear once and every video needs the same number of raters.
    """
    records = list(annotations)
    if not records:
        raise InvalidInputError("no annotation records")
    seen = set()
    for rec in records:
        key = (rec.video_id, rec.annotator_id)
        if key in seen:
            raise InvalidInputError(f"duplicate annotation for {key}")
        seen.add(key)
    videos = sorted({r.video_id for r in records})
    categories = sorted({r.category for r in records})
    vid_index = {v: i for i, v in enumerate(videos)}
    cat_index = {c: j for j, c in enumerate(categories)}
    counts = np.zeros((len(videos), len(categories)), dtype=np.int64)
    for rec in records:
        counts[vid_index[rec.video_id], cat_index[rec.category]] += 1
    raters = counts.sum(axis=1)
    if len(set(raters.tolist())) != 1:
        raise InvalidInputError(
            "every video must be rated by the same number of annotators; "
            f"saw counts {sorted(set(raters.tolist()))}"
        )
    if raters[0] < 2:
        raise InvalidInputError("need at least 2 raters per video")
    return videos, categories, counts


def fleiss_kappa(annotations: Iterable[AnnotationRecord]) -> float:
    """Chance-corrected agreement for a fixed number of raters per item.

    Computed from the item x category count matrix: mean observed
    per-item pair agreement against the agreement expected from the
    marginal category proportions. Undefined (degenerate) when expected
    agreement is exactly 1, i.e. only one category was ever used.
    """
    videos, categories, counts = annotation_matrix(annotations)
    if len(videos) < 2:
        raise InvalidInputError("need at least 2 videos")
    n = int(counts.sum(axis=1)[0])
    table = counts.astype(np.float64)
    p_cat = table.sum(axis=0) / table.sum()
    p_expected = float((p_cat * p_cat).sum())
    p_items = ((table * table).sum(axis=1) - n) / (n * (n - 1))
    p_observed = float(p_items.mean())
    if p_expected >= 1.0:
        raise DegenerateDistributionError(
            "expected agreement is 1 (single category); kappa undefined"
        )
    return (p_observed - p_expected) / (1.0 - p_expected)


def majority_votes(
    annotations: Iterable[AnnotationRecord],
) -> dict[str, str]:
    """Majority category per video; full three-way ties become
    the explicit can't-answer label and are excluded from coherence
    counting downstream."""
    per_video: dict[str, list[str]] = {}
    for rec in annotations:
        per_video.setdefault(rec.video_id, []).append(rec.category)
    votes = {}
    for video_id, cats in per_video.items():
        best: dict[str, int] = {}
        for c in cats:
            best[c] = best.get(c, 0) + 1
        top = max(best.values())
        winners = [c for c, k in best.items() if k == top]
        votes[video_id] = winners[0] if len(winners) == 1 else CANT_ANSWER
    return votes


def directionality_coherence(
    result: TestResult,
    annotations: Iterable[AnnotationRecord],
    group_a: str,
    group_b: str,
) -> bool | None:
    """Whether human majority labels agree with the effect direction.

    A positive effect size should co-occur with more majority votes for
    ``group_a`` than ``group_b`` and vice versa. Returns None (not
    applicable) inside the neutral band (|d| < 0.2) or when the aggregate
    vote counts tie.
    """
    d = result.effect_size
    if not math.isfinite(d):
        raise InvalidInputError("effect size must be finite")
    if abs(d) < NEUTRAL_BAND:
        return None
    votes = majority_votes(annotations)
    count_a = sum(1 for v in votes.values() if v == group_a)
    count_b = sum(1 for v in votes.values() if v == group_b)
    if count_a == count_b:
        return None
    if d > 0:
        return count_a > count_b
    return count_b > count_a


def read_annotations_csv(path: str | os.PathLike) -> list[AnnotationRecord]:
    """Load annotation records from the video_id,annotator_id,category CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"video_id", "annotator_id", "category"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise InvalidInputError(
                f"{path}: header must contain {sorted(required)}, "
                f"got {reader.fieldnames}"
            )
        return [
            AnnotationRecord(
                video_id=row["video_id"],
                annotator_id=row["annotator_id"],
                category=row["category"],
            )
            for row in reader
        ]
