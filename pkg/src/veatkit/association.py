"""Association statistics and permutation significance for embedding sets.

The differential test compares two target sets X, Y against two attribute
sets A, B. Each target item gets an association score

    s(E, A, B) = mean_a cos(E, a) - mean_b cos(E, b)

and the test statistic is sum_X s - sum_Y s. Cohen's d standardizes the
group mean difference by the standard deviation of the item scores over
X union Y. The single-category variant scores one target set X against A
and B: statistic sum_X s, effect size mean/std over X.

Significance is a one-sided permutation test over all partitions of
X union Y into two equal-size halves. When the partition count fits under
the configured threshold the null is enumerated exactly; otherwise
equal-size partitions are sampled with a counter-based generator keyed on
(seed, chunk index), so results are identical for any execution order or
degree of parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from .embeddings import ConceptSet, VideoEmbedding
from .errors import (
    DegenerateDistributionError,
    DimensionMismatchError,
    InvalidInputError,
    ZeroVectorError,
)

TIE_RULES = ("strict", "plus_one")
STD_DIVISORS = ("sample", "population")

_MAX_SEED = 2**64
_MC_CHUNK = 32768

SetLike = Union[ConceptSet, np.ndarray, Sequence[Sequence[float]]]
VectorLike = Union[VideoEmbedding, np.ndarray, Sequence[float]]


@dataclass(frozen=True)
class AssociationScore:
    """Per-item association score; bounded by construction to [-2, 2]."""

    video_id: str
    score: float

    def __post_init__(self):
        if not math.isfinite(self.score) or abs(self.score) > 2.0 + 1e-9:
            raise InvalidInputError(
                f"{self.video_id}: item score {self.score} outside [-2, 2]"
            )


@dataclass(frozen=True)
class PermutationConfig:
    """Settings shared by every permutation test in a run.

    ``exact_threshold`` caps the partition count for exhaustive
    enumeration; larger instances fall back to ``iterations`` seeded Monte
    Carlo draws. ``tie_rule`` selects how exact-mode ties at the observed
    statistic are counted: ``strict`` uses the plain greater-than
    proportion, ``plus_one`` the add-one-smoothed greater-or-equal count.
    Monte Carlo always reports the smoothed (count + 1) / (m + 1) value,
    which can never be 0 or exceed 1.
    """

    seed: int = 0
    iterations: int = 100_000
    exact_threshold: int = 200_000
    tie_rule: str = "strict"

    def __post_init__(self):
        if not (0 <= int(self.seed) < _MAX_SEED):
            raise InvalidInputError(f"seed must be in [0, 2^64), got {self.seed}")
        if self.iterations < 1:
            raise InvalidInputError("iterations must be >= 1")
        if self.exact_threshold < 1:
            raise InvalidInputError("exact_threshold must be >= 1")
        if self.tie_rule not in TIE_RULES:
            raise InvalidInputError(
                f"tie_rule must be one of {TIE_RULES}, got {self.tie_rule!r}"
            )


@dataclass(frozen=True)
class TestResult:
    """Everything one differential or single-category run produced.

    ``group_means`` is (mean over X, mean over Y) for the differential
    test and (mean over X, None) for the single-category one.
    ``p_strict`` / ``p_plus_one`` carry both exact-mode tie rules when the
    null was enumerated; in Monte Carlo mode they are None.
    """

    __test__ = False  # keep pytest from collecting the Test* name

    statistic: float
    effect_size: float
    p_value: float
    method: str
    iterations: int
    seed: int
    item_scores: tuple[AssociationScore, ...]
    group_means: tuple[float, float | None]
    pooled_std: float
    tie_rule: str
    p_strict: float | None = None
    p_plus_one: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise InvalidInputError(f"p_value {self.p_value} outside [0, 1]")
        if self.method == "exact" and self.iterations != 0:
            raise InvalidInputError("exact results must report iterations = 0")
        if self.pooled_std < 0:
            raise InvalidInputError("pooled_std must be >= 0")


def _matrix(x: SetLike, what: str) -> np.ndarray:
    """Coerce a concept set or raw vectors to a validated 2-D float array."""
    if isinstance(x, ConceptSet):
        return x.matrix
    try:
        mat = np.asarray(x, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"{what}: not a rectangular numeric set: {exc}")
    if mat.ndim == 1:
        mat = mat[None, :]
    if mat.ndim != 2 or mat.shape[0] == 0 or mat.shape[1] == 0:
        raise InvalidInputError(f"{what}: expected a non-empty 2-D set of vectors")
    if not np.all(np.isfinite(mat)):
        raise InvalidInputError(f"{what}: non-finite vector component")
    return mat


def _vector(v: VectorLike, what: str) -> tuple[str, np.ndarray]:
    if isinstance(v, VideoEmbedding):
        return v.video_id, v.array
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise InvalidInputError(f"{what}: expected a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what}: non-finite vector component")
    return what, arr


def _unit_rows(mat: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError(f"{what}: contains an all-zeros vector")
    return mat / norms[:, None]


def _check_dims(**named: np.ndarray) -> int:
    dims = {name: mat.shape[1] for name, mat in named.items()}
    if len(set(dims.values())) != 1:
        raise DimensionMismatchError(f"dimension mismatch across sets: {dims}")
    return next(iter(dims.values()))


def _ids(s: SetLike, prefix: str, n: int) -> list[str]:
    if isinstance(s, ConceptSet):
        return list(s.video_ids)
    return [f"{prefix}-{i:03d}" for i in range(n)]


def cosine(u: VectorLike, v: VectorLike) -> float:
    """Cosine similarity of two nonzero vectors, clamped to [-1, 1]."""
    _, a = _vector(u, "u")
    _, b = _vector(v, "v")
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}"
        )
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine undefined for an all-zeros vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def item_scores(targets: SetLike, a: SetLike, b: SetLike) -> np.ndarray:
    """Association scores for every row of ``targets`` against A and B."""
    t = _matrix(targets, "targets")
    ma = _matrix(a, "A")
    mb = _matrix(b, "B")
    _check_dims(targets=t, A=ma, B=mb)
    ut = _unit_rows(t, "targets")
    ua = _unit_rows(ma, "A")
    ub = _unit_rows(mb, "B")
    sim_a = np.clip(ut @ ua.T, -1.0, 1.0)
    sim_b = np.clip(ut @ ub.T, -1.0, 1.0)
    return sim_a.mean(axis=1) - sim_b.mean(axis=1)


def item_score(e: VectorLike, a: SetLike, b: SetLike) -> AssociationScore:
    """How strongly one embedding associates with A relative to B."""
    video_id, vec = _vector(e, "item")
    score = item_scores(vec[None, :], a, b)[0]
    return AssociationScore(video_id=video_id, score=float(score))


def _std(values: np.ndarray, std_divisor: str) -> float:
    if std_divisor not in STD_DIVISORS:
        raise InvalidInputError(
            f"std_divisor must be one of {STD_DIVISORS}, got {std_divisor!r}"
        )
    ddof = 1 if std_divisor == "sample" else 0
    if values.size <= ddof:
        raise InvalidInputError(
            f"need more than {ddof} item scores for the {std_divisor} deviation"
        )
    return float(values.std(ddof=ddof))


def veat_statistic(x: SetLike, y: SetLike, a: SetLike, b: SetLike) -> float:
    """Differential statistic: sum of X item scores minus sum over Y."""
    mx = _matrix(x, "X")
    my = _matrix(y, "Y")
    if mx.shape[0] != my.shape[0]:
        raise InvalidInputError(
            f"target sets must have equal size for equal-half partitions: "
            f"{mx.shape[0]} vs {my.shape[0]}"
        )
    sx = item_scores(mx, a, b)
    sy = item_scores(my, a, b)
    return float(sx.sum() - sy.sum())


def veat_effect_size(
    x: SetLike, y: SetLike, a: SetLike, b: SetLike, std_divisor: str = "sample"
) -> float:
    """Cohen's d: group mean difference over the pooled item-score spread.

    Raises :class:`DegenerateDistributionError` when every item score is
    identical, rather than returning an infinity.
    """
    sx = item_scores(x, a, b)
    sy = item_scores(y, a, b)
    pooled = np.concatenate([sx, sy])
    std = _std(pooled, std_divisor)
    if std == 0.0:
        raise DegenerateDistributionError(
            "all item scores identical; effect size undefined"
        )
    return float((sx.mean() - sy.mean()) / std)


def _exact_partition_p(
    scores: np.ndarray, half: int, tie_rule: str
) -> tuple[float, float, float]:
    """Enumerate every equal-size partition of the pooled scores.

    Returns (p under ``tie_rule``, strict p, plus_one p). The statistic for
    a partition selecting index subset S is 2 * sum(scores[S]) - total, the
    reduced form of sum-over-half minus sum-over-complement. The observed
    statistic is the identity subset's value computed through the same
    arithmetic, so self-ties are exact.
    """
    total = float(scores.sum())
    observed = 2.0 * float(scores[:half].sum()) - total
    idx = np.fromiter(
        (i for comb in combinations(range(scores.size), half) for i in comb),
        dtype=np.intp,
    ).reshape(-1, half)
    stats = 2.0 * scores[idx].sum(axis=1) - total
    n_part = stats.shape[0]
    strict = float((stats > observed).sum()) / n_part
    plus_one = float((stats >= observed).sum()) / n_part
    return (strict if tie_rule == "strict" else plus_one), strict, plus_one


def _monte_carlo_p(
    scores: np.ndarray, half: int, seed: int, iterations: int
) -> float:
    """Smoothed one-sided p from sampled equal-size partitions.

    Draw randomness is keyed on (seed, chunk index), making every draw a
    pure function of (seed, draw index): chunks can be evaluated in any
    order, or concurrently, without changing the count.
    """
    total = float(scores.sum())
    observed = 2.0 * float(scores[:half].sum()) - total
    count_ge = 0
    done = 0
    chunk_index = 0
    while done < iterations:
        m = min(_MC_CHUNK, iterations - done)
        key = np.array([seed, chunk_index], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        u = rng.random((m, scores.size))
        idx = np.argsort(u, axis=1)[:, :half]
        stats = 2.0 * scores[idx].sum(axis=1) - total
        count_ge += int((stats >= observed).sum())
        done += m
        chunk_index += 1
    return (count_ge + 1) / (iterations + 1)


def _partition_p(
    scores: np.ndarray, half: int, cfg: PermutationConfig
) -> tuple[float, str, int, float | None, float | None]:
    n_partitions = math.comb(scores.size, half)
    if n_partitions <= cfg.exact_threshold:
        p, strict, plus_one = _exact_partition_p(scores, half, cfg.tie_rule)
        return p, "exact", 0, strict, plus_one
    p = _monte_carlo_p(scores, half, cfg.seed, cfg.iterations)
    return p, "monte_carlo", cfg.iterations, None, None


def veat_p_value(
    x: SetLike,
    y: SetLike,
    a: SetLike,
    b: SetLike,
    cfg: PermutationConfig | None = None,
) -> tuple[float, str, int]:
    """One-sided significance of the differential statistic.

    The null re-partitions X union Y into two equal halves; item scores
    are fixed per element, so each partition's statistic reduces to a
    subset sum. Returns (p, method, iterations) with iterations = 0 in
    exact mode.
    """
    cfg = cfg or PermutationConfig()
    mx = _matrix(x, "X")
    my = _matrix(y, "Y")
    if mx.shape[0] != my.shape[0]:
        raise InvalidInputError(
            f"target sets must have equal size for equal-half partitions: "
            f"{mx.shape[0]} vs {my.shape[0]}"
        )
    pooled = np.concatenate([item_scores(mx, a, b), item_scores(my, a, b)])
    p, method, iterations, _, _ = _partition_p(pooled, mx.shape[0], cfg)
    return p, method, iterations


def scveat_statistic(x: SetLike, a: SetLike, b: SetLike) -> float:
    """Single-category statistic: sum of item scores over X."""
    return float(item_scores(x, a, b).sum())


def scveat_effect_size(
    x: SetLike, a: SetLike, b: SetLike, std_divisor: str = "sample"
) -> float:
    """Mean item score over X divided by its standard deviation."""
    scores = item_scores(x, a, b)
    if scores.size < 2:
        raise InvalidInputError("single-category effect size needs |X| >= 2")
    std = _std(scores, std_divisor)
    if std == 0.0:
        raise DegenerateDistributionError(
            "all item scores identical; effect size undefined"
        )
    return float(scores.mean() / std)


def _attribute_shuffle_p(
    x_unit: np.ndarray,
    attrs_unit: np.ndarray,
    n_a: int,
    cfg: PermutationConfig,
) -> tuple[float, str, int, float | None, float | None]:
    """Null for the single-category test: relabel the pooled attributes.

    Shuffling X leaves a sum over X unchanged, so the null instead
    re-partitions A union B into equal-size pseudo-attribute pairs. The
    shuffled statistic reduces to a subset sum of per-attribute cosine
    column sums: (2 * sum over pseudo-A - total) / |A|.
    """
    colsums = np.clip(x_unit @ attrs_unit.T, -1.0, 1.0).sum(axis=0) / n_a
    n_attrs = colsums.size
    total = float(colsums.sum())
    observed = 2.0 * float(colsums[:n_a].sum()) - total
    n_shuffles = math.comb(n_attrs, n_a)
    if n_shuffles <= cfg.exact_threshold:
        idx = np.fromiter(
            (i for comb in combinations(range(n_attrs), n_a) for i in comb),
            dtype=np.intp,
        ).reshape(-1, n_a)
        stats = 2.0 * colsums[idx].sum(axis=1) - total
        strict = float((stats > observed).sum()) / n_shuffles
        plus_one = (float((stats >= observed).sum()) + 1.0) / (n_shuffles + 1.0)
        p = strict if cfg.tie_rule == "strict" else plus_one
        return p, "exact", 0, strict, plus_one
    count_ge = 0
    done = 0
    chunk_index = 0
    while done < cfg.iterations:
        m = min(_MC_CHUNK, cfg.iterations - done)
        key = np.array([cfg.seed, chunk_index], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=key))
        u = rng.random((m, n_attrs))
        idx = np.argsort(u, axis=1)[:, :n_a]
        stats = 2.0 * colsums[idx].sum(axis=1) - total
        count_ge += int((stats >= observed).sum())
        done += m
        chunk_index += 1
    return (count_ge + 1) / (cfg.iterations + 1), "monte_carlo", cfg.iterations, None, None


def scveat_p_value(
    x: SetLike,
    a: SetLike,
    b: SetLike,
    cfg: PermutationConfig | None = None,
) -> tuple[float, str, int]:
    """One-sided significance of the single-category statistic.

    Requires |A| = |B| so pooled attributes split into equal halves.
    Exact when the shuffle count fits under the threshold, otherwise
    seeded Monte Carlo with add-one smoothing.
    """
    cfg = cfg or PermutationConfig()
    mx = _matrix(x, "X")
    ma = _matrix(a, "A")
    mb = _matrix(b, "B")
    if ma.shape[0] != mb.shape[0]:
        raise InvalidInputError(
            f"attribute sets must have equal size for the shuffle null: "
            f"{ma.shape[0]} vs {mb.shape[0]}"
        )
    _check_dims(X=mx, A=ma, B=mb)
    x_unit = _unit_rows(mx, "X")
    attrs_unit = _unit_rows(np.concatenate([ma, mb]), "attributes")
    p, method, iterations, _, _ = _attribute_shuffle_p(
        x_unit, attrs_unit, ma.shape[0], cfg
    )
    return p, method, iterations


def veat_test(
    x: SetLike,
    y: SetLike,
    a: SetLike,
    b: SetLike,
    cfg: PermutationConfig | None = None,
    std_divisor: str = "sample",
) -> TestResult:
    """Full differential run: statistic, effect size, significance."""
    cfg = cfg or PermutationConfig()
    mx = _matrix(x, "X")
    my = _matrix(y, "Y")
    if mx.shape[0] != my.shape[0]:
        raise InvalidInputError(
            f"target sets must have equal size for equal-half partitions: "
            f"{mx.shape[0]} vs {my.shape[0]}"
        )
    sx = item_scores(mx, a, b)
    sy = item_scores(my, a, b)
    pooled = np.concatenate([sx, sy])
    std = _std(pooled, std_divisor)
    if std == 0.0:
        raise DegenerateDistributionError(
            "all item scores identical; effect size undefined"
        )
    statistic = float(sx.sum() - sy.sum())
    effect = float((sx.mean() - sy.mean()) / std)
    p, method, iterations, p_strict, p_plus_one = _partition_p(
        pooled, mx.shape[0], cfg
    )
    ids = _ids(x, "x", mx.shape[0]) + _ids(y, "y", my.shape[0])
    scores = tuple(
        AssociationScore(video_id=i, score=float(s)) for i, s in zip(ids, pooled)
    )
    return TestResult(
        statistic=statistic,
        effect_size=effect,
        p_value=p,
        method=method,
        iterations=iterations,
        seed=cfg.seed,
        item_scores=scores,
        group_means=(float(sx.mean()), float(sy.mean())),
        pooled_std=std,
        tie_rule=cfg.tie_rule,
        p_strict=p_strict,
        p_plus_one=p_plus_one,
    )


def scveat_test(
    x: SetLike,
    a: SetLike,
    b: SetLike,
    cfg: PermutationConfig | None = None,
    std_divisor: str = "sample",
) -> TestResult:
    """Full single-category run: statistic, effect size, significance."""
    cfg = cfg or PermutationConfig()
    mx = _matrix(x, "X")
    ma = _matrix(a, "A")
    mb = _matrix(b, "B")
    if ma.shape[0] != mb.shape[0]:
        raise InvalidInputError(
            f"attribute sets must have equal size for the shuffle null: "
            f"{ma.shape[0]} vs {mb.shape[0]}"
        )
    _check_dims(X=mx, A=ma, B=mb)
    scores = item_scores(mx, ma, mb)
    if scores.size < 2:
        raise InvalidInputError("single-category effect size needs |X| >= 2")
    std = _std(scores, std_divisor)
    if std == 0.0:
        raise DegenerateDistributionError(
            "all item scores identical; effect size undefined"
        )
    x_unit = _unit_rows(mx, "X")
    attrs_unit = _unit_rows(np.concatenate([ma, mb]), "attributes")
    p, method, iterations, p_strict, p_plus_one = _attribute_shuffle_p(
        x_unit, attrs_unit, ma.shape[0], cfg
    )
    ids = _ids(x, "x", mx.shape[0])
    assoc = tuple(
        AssociationScore(video_id=i, score=float(s)) for i, s in zip(ids, scores)
    )
    return TestResult(
        statistic=float(scores.sum()),
        effect_size=float(scores.mean() / std),
        p_value=p,
        method=method,
        iterations=iterations,
        seed=cfg.seed,
        item_scores=assoc,
        group_means=(float(scores.mean()), None),
        pooled_std=std,
        tie_rule=cfg.tie_rule,
        p_strict=p_strict,
        p_plus_one=p_plus_one,
    )
