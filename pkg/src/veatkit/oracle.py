"""Brute-force verification path for the association statistics.

Everything here is deliberately slow and independent: plain Python loops
over lists of floats, no numpy, no similarity-matrix caching, and no code
shared with the fast engine. Partition statistics are recomputed by naive
summation rather than the subset-sum reduction the engine uses. The fast
path must agree with these functions to 1e-12 on small instances, and the
exact p-values must agree exactly.
"""

from __future__ import annotations

import math
import random
from itertools import combinations
from typing import Sequence

from .embeddings import ConceptSet
from .errors import DegenerateDistributionError, InvalidInputError


def _rows(s) -> list[list[float]]:
    if isinstance(s, ConceptSet):
        return [list(m.vector) for m in s.members]
    return [list(map(float, row)) for row in s]


def _cosine(u: Sequence[float], v: Sequence[float]) -> float:
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for a, b in zip(u, v):
        dot += a * b
        nu += a * a
        nv += b * b
    c = dot / (math.sqrt(nu) * math.sqrt(nv))
    return max(-1.0, min(1.0, c))


def _item_score(e, a_rows, b_rows) -> float:
    sa = 0.0
    for a in a_rows:
        sa += _cosine(e, a)
    sb = 0.0
    for b in b_rows:
        sb += _cosine(e, b)
    return sa / len(a_rows) - sb / len(b_rows)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _stdev(values: Sequence[float], std_divisor: str) -> float:
    m = _mean(values)
    ss = 0.0
    for v in values:
        ss += (v - m) ** 2
    denom = len(values) - 1 if std_divisor == "sample" else len(values)
    return math.sqrt(ss / denom)


def oracle_veat(
    x, y, a, b, std_divisor: str = "sample"
) -> tuple[float, float]:
    """Recompute the differential statistic and effect size from scratch."""
    xr, yr, ar, br = _rows(x), _rows(y), _rows(a), _rows(b)
    if len(xr) != len(yr):
        raise InvalidInputError("unequal target sizes")
    sx = [_item_score(e, ar, br) for e in xr]
    sy = [_item_score(e, ar, br) for e in yr]
    statistic = sum(sx) - sum(sy)
    std = _stdev(sx + sy, std_divisor)
    if std == 0.0:
        raise DegenerateDistributionError("zero item-score spread")
    effect = (_mean(sx) - _mean(sy)) / std
    return statistic, effect


def oracle_scveat(x, a, b, std_divisor: str = "sample") -> tuple[float, float]:
    """Recompute the single-category statistic and effect size."""
    xr, ar, br = _rows(x), _rows(a), _rows(b)
    scores = [_item_score(e, ar, br) for e in xr]
    statistic = sum(scores)
    std = _stdev(scores, std_divisor)
    if std == 0.0:
        raise DegenerateDistributionError("zero item-score spread")
    return statistic, _mean(scores) / std


def oracle_veat_exact_p(x, y, a, b, tie_rule: str = "strict") -> float:
    """Exact one-sided p by enumerating every equal-size partition.

    Each partition's statistic is the naive sum over its halves; no
    subset-sum shortcut.
    """
    xr, yr, ar, br = _rows(x), _rows(y), _rows(a), _rows(b)
    if len(xr) != len(yr):
        raise InvalidInputError("unequal target sizes")
    pool = xr + yr
    scores = [_item_score(e, ar, br) for e in pool]
    half = len(xr)
    observed = sum(scores[:half]) - sum(scores[half:])
    n_strict = 0
    n_ge = 0
    n_part = 0
    indices = set(range(len(pool)))
    for chosen in combinations(range(len(pool)), half):
        rest = indices.difference(chosen)
        stat = sum(scores[i] for i in chosen) - sum(scores[i] for i in rest)
        n_part += 1
        if stat > observed:
            n_strict += 1
        if stat >= observed:
            n_ge += 1
    if tie_rule == "strict":
        return n_strict / n_part
    return n_ge / n_part


def oracle_scveat_exact_p(x, a, b, tie_rule: str = "strict") -> float:
    """Exact one-sided p over all equal-size attribute relabelings.

    Pairwise cosines are computed once through this module's own loops;
    each relabeling then re-averages them naively per item, with no
    column-sum shortcut.
    """
    xr, ar, br = _rows(x), _rows(a), _rows(b)
    if len(ar) != len(br):
        raise InvalidInputError("unequal attribute sizes")
    attrs = ar + br
    n_a = len(ar)
    cos = [[_cosine(e, attr) for attr in attrs] for e in xr]

    def shuffled_stat(chosen, rest):
        stat = 0.0
        for row in cos:
            sa = 0.0
            for j in chosen:
                sa += row[j]
            sb = 0.0
            for j in rest:
                sb += row[j]
            stat += sa / n_a - sb / n_a
        return stat

    identity = tuple(range(n_a))
    identity_rest = tuple(range(n_a, len(attrs)))
    observed = shuffled_stat(identity, identity_rest)
    n_strict = 0
    n_ge = 0
    n_shuffles = 0
    indices = set(range(len(attrs)))
    for chosen in combinations(range(len(attrs)), n_a):
        rest = tuple(indices.difference(chosen))
        stat = shuffled_stat(chosen, rest)
        n_shuffles += 1
        if stat > observed:
            n_strict += 1
        if stat >= observed:
            n_ge += 1
    if tie_rule == "strict":
        return n_strict / n_shuffles
    return (n_ge + 1) / (n_shuffles + 1)


def random_instance(
    rng: random.Random,
    dim_range: tuple[int, int] = (2, 8),
    size_range: tuple[int, int] = (2, 6),
) -> tuple[list, list, list, list]:
    """Draw one random (X, Y, A, B) instance of bare vectors.

    Components are uniform on [-1, 1] with all-zero rows impossible by
    construction (components are continuous draws).
    """
    dim = rng.randint(*dim_range)
    n_targets = rng.randint(*size_range)
    n_attrs = rng.randint(*size_range)

    def draw(n):
        return [[rng.uniform(-1.0, 1.0) for _ in range(dim)] for _ in range(n)]

    return draw(n_targets), draw(n_targets), draw(n_attrs), draw(n_attrs)


def self_check(
    trials: int = 200,
    seed: int = 0,
    tolerance: float = 1e-12,
    dim_range: tuple[int, int] = (2, 8),
    size_range: tuple[int, int] = (2, 6),
) -> list[str]:
    """Compare the fast path against this module on random instances.

    Returns a list of mismatch descriptions; empty means every trial
    agreed (statistics and effect sizes within ``tolerance``, exact
    p-values identical).
    """
    from . import association

    rng = random.Random(seed)
    failures: list[str] = []
    cfg = association.PermutationConfig(seed=seed, exact_threshold=1_000_000)
    for trial in range(trials):
        x, y, a, b = random_instance(rng, dim_range, size_range)
        veat_stat, veat_d = oracle_veat(x, y, a, b)
        sc_stat, sc_d = oracle_scveat(x, a, b)
        checks = [
            ("veat_statistic", association.veat_statistic(x, y, a, b), veat_stat),
            ("veat_effect_size", association.veat_effect_size(x, y, a, b), veat_d),
            ("scveat_statistic", association.scveat_statistic(x, a, b), sc_stat),
            ("scveat_effect_size", association.scveat_effect_size(x, a, b), sc_d),
        ]
        for name, fast, slow in checks:
            if abs(fast - slow) > tolerance:
                failures.append(
                    f"trial {trial}: {name} fast={fast!r} oracle={slow!r}"
                )
        for rule in ("strict", "plus_one"):
            rule_cfg = association.PermutationConfig(
                seed=seed, exact_threshold=cfg.exact_threshold, tie_rule=rule
            )
            p_fast, method, _ = association.veat_p_value(x, y, a, b, rule_cfg)
            p_slow = oracle_veat_exact_p(x, y, a, b, rule)
            if method != "exact" or p_fast != p_slow:
                failures.append(
                    f"trial {trial}: veat_p[{rule}] fast={p_fast!r} "
                    f"oracle={p_slow!r} method={method}"
                )
            p_fast, method, _ = association.scveat_p_value(x, a, b, rule_cfg)
            p_slow = oracle_scveat_exact_p(x, a, b, rule)
            if method != "exact" or p_fast != p_slow:
                failures.append(
                    f"trial {trial}: scveat_p[{rule}] fast={p_fast!r} "
                    f"oracle={p_slow!r} method={method}"
                )
    return failures
