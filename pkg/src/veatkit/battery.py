"""Declarative experiment batteries over embedding archives.

A battery is a JSON config naming archives, differential and
single-category tests over concept names, demographic correlation joins,
and debias comparisons. Running one is a pure function of (archives,
config, seed): per-test seeds are derived from the battery seed and the
test name, so results do not depend on execution order or thread count,
and removing one test never changes another's numbers.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from difflib import get_close_matches

from . import __version__
from .analysis import (
    CONDITIONS,
    ComparisonResult,
    CorrelationResult,
    compare_conditions,
    pearson_r,
)
from .association import (
    PermutationConfig,
    STD_DIVISORS,
    TestResult,
    TIE_RULES,
    scveat_test,
    veat_test,
)
from .embeddings import ConceptSet, VideoEmbedding, group_by_concept, read_archive
from .errors import (
    BatteryConfigError,
    BatteryRunError,
    VeatkitError,
)
from .reference import demographic_axis_value, normalize_label

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class VeatEntry:
    name: str
    x: str
    y: str
    a: str
    b: str


@dataclass(frozen=True)
class ScveatEntry:
    name: str
    x: str
    a: str
    b: str
    condition: str | None = None
    group: str | None = None
    label: str | None = None
    scenario: str | None = None
    axis: str | None = None

    def join_label(self) -> str:
        return normalize_label(self.label if self.label is not None else self.x)

    def scenario_key(self) -> str:
        return self.scenario if self.scenario is not None else self.join_label()


@dataclass(frozen=True)
class CorrelationEntry:
    group: str
    axis: str
    source: str


@dataclass(frozen=True)
class BatteryConfig:
    schema_version: int
    archives: tuple[str, ...]
    permutation: PermutationConfig
    std_divisor: str
    veat_tests: tuple[VeatEntry, ...]
    scveat_tests: tuple[ScveatEntry, ...]
    correlations: tuple[CorrelationEntry, ...]


@dataclass(frozen=True)
class ResolvedBattery:
    """A parsed config with archives loaded and every name resolved."""

    config: BatteryConfig
    config_digest: str
    archive_digests: dict[str, str]
    concepts: dict[str, list[VideoEmbedding]]


@dataclass(frozen=True)
class NamedResult:
    """One executed test with its config identity attached."""

    name: str
    kind: str
    x: str
    a: str
    b: str
    result: TestResult
    y: str | None = None
    condition: str | None = None
    group: str | None = None
    label: str | None = None
    scenario: str | None = None
    axis: str | None = None


@dataclass(frozen=True)
class RunManifest:
    """Provenance sufficient to reproduce a run bit-for-bit.

    Identical inputs and seed give identical manifests except for the
    timestamp.
    """

    schema_version: int
    tool_version: str
    config_digest: str
    archive_digests: dict[str, str]
    seed: int
    iterations: int
    exact_threshold: int
    tie_rule: str
    std_divisor: str
    test_names: tuple[str, ...]
    timestamp: str


@dataclass(frozen=True)
class BatteryOutcome:
    tests: tuple[NamedResult, ...]
    correlations: tuple[CorrelationResult, ...]
    comparisons: tuple[ComparisonResult, ...]
    manifest: RunManifest


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise BatteryConfigError(message)


def _parse_config(raw: dict, base_dir: str) -> BatteryConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    _require(
        raw.get("schema_version") == SCHEMA_VERSION,
        f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}",
    )
    archives = raw.get("archives")
    _require(
        isinstance(archives, list) and archives and
        all(isinstance(p, str) for p in archives),
        "archives must be a non-empty list of paths",
    )
    archives = tuple(
        p if os.path.isabs(p) else os.path.join(base_dir, p) for p in archives
    )
    perm_raw = raw.get("permutation", {})
    _require(isinstance(perm_raw, dict), "permutation must be an object")
    allowed = {"seed", "iterations", "exact_threshold", "tie_rule"}
    unknown = set(perm_raw) - allowed
    _require(not unknown, f"unknown permutation keys {sorted(unknown)}")
    try:
        permutation = PermutationConfig(**perm_raw)
    except VeatkitError as exc:
        raise BatteryConfigError(f"bad permutation settings: {exc}") from exc
    std_divisor = raw.get("std_divisor", "sample")
    _require(
        std_divisor in STD_DIVISORS,
        f"std_divisor must be one of {STD_DIVISORS}, got {std_divisor!r}",
    )

    veat_tests = []
    for entry in raw.get("veat_tests", []):
        _require(isinstance(entry, dict), "veat test entries must be objects")
        missing = {"name", "x", "y", "a", "b"} - set(entry)
        _require(not missing, f"veat test missing keys {sorted(missing)}")
        unknown = set(entry) - {"name", "x", "y", "a", "b"}
        _require(not unknown,
                 f"veat test {entry.get('name')!r}: unknown keys {sorted(unknown)}")
        veat_tests.append(VeatEntry(**entry))

    scveat_tests = []
    sc_keys = {"name", "x", "a", "b", "condition", "group", "label",
               "scenario", "axis"}
    for entry in raw.get("scveat_tests", []):
        _require(isinstance(entry, dict), "scveat test entries must be objects")
        missing = {"name", "x", "a", "b"} - set(entry)
        _require(not missing, f"scveat test missing keys {sorted(missing)}")
        unknown = set(entry) - sc_keys
        _require(not unknown,
                 f"scveat test {entry.get('name')!r}: unknown keys {sorted(unknown)}")
        cond = entry.get("condition")
        _require(
            cond is None or cond in CONDITIONS,
            f"scveat test {entry['name']!r}: condition must be one of "
            f"{CONDITIONS}, got {cond!r}",
        )
        scveat_tests.append(ScveatEntry(**entry))

    names = [t.name for t in veat_tests] + [t.name for t in scveat_tests]
    dupes = sorted({n for n in names if names.count(n) > 1})
    _require(not dupes, f"duplicate test names: {dupes}")

    correlations = []
    for entry in raw.get("correlations", []):
        _require(isinstance(entry, dict), "correlation entries must be objects")
        missing = {"group", "axis", "source"} - set(entry)
        _require(not missing, f"correlation entry missing keys {sorted(missing)}")
        unknown = set(entry) - {"group", "axis", "source"}
        _require(not unknown, f"correlation entry: unknown keys {sorted(unknown)}")
        _require(
            entry["source"] in ("occupations", "awards"),
            f"correlation source must be 'occupations' or 'awards', "
            f"got {entry['source']!r}",
        )
        correlations.append(CorrelationEntry(**entry))

    return BatteryConfig(
        schema_version=SCHEMA_VERSION,
        archives=archives,
        permutation=permutation,
        std_divisor=std_divisor,
        veat_tests=tuple(veat_tests),
        scveat_tests=tuple(scveat_tests),
        correlations=tuple(correlations),
    )


def _validate_references(config: BatteryConfig, concepts: dict) -> None:
    known = sorted(concepts)
    for name, members in concepts.items():
        dims = {m.dim for m in members}
        _require(
            len(dims) == 1,
            f"concept {name!r} mixes dimensions {sorted(dims)} across archives",
        )

    def check_concept(test_name: str, role: str, concept: str) -> None:
        if concept not in concepts:
            hints = get_close_matches(concept, known, n=3)
            hint = f"; did you mean {hints}?" if hints else ""
            raise BatteryConfigError(
                f"test {test_name!r}: unknown concept {concept!r} for {role}"
                f"{hint} (available: {', '.join(known)})"
            )
        _require(
            len(concepts[concept]) >= 2,
            f"test {test_name!r}: concept {concept!r} has "
            f"{len(concepts[concept])} record(s); sets need >= 2",
        )

    for t in config.veat_tests:
        for role, concept in (("x", t.x), ("y", t.y), ("a", t.a), ("b", t.b)):
            check_concept(t.name, role, concept)
        dims = {concepts[c][0].dim for c in (t.x, t.y, t.a, t.b)}
        _require(
            len(dims) == 1,
            f"test {t.name!r}: referenced sets mix dimensions {sorted(dims)}",
        )
    for t in config.scveat_tests:
        for role, concept in (("x", t.x), ("a", t.a), ("b", t.b)):
            check_concept(t.name, role, concept)
        dims = {concepts[c][0].dim for c in (t.x, t.a, t.b)}
        _require(
            len(dims) == 1,
            f"test {t.name!r}: referenced sets mix dimensions {sorted(dims)}",
        )

    # comparison groups: any scenario with a debias condition needs control
    scenarios: dict[str, set[str]] = {}
    for t in config.scveat_tests:
        if t.condition is not None:
            scenarios.setdefault(t.scenario_key(), set()).add(t.condition)
    for scenario, conds in scenarios.items():
        _require(
            "control" in conds,
            f"comparison scenario {scenario!r} has conditions {sorted(conds)} "
            "but no control",
        )

    groups = {t.group for t in config.scveat_tests if t.group is not None}
    for corr in config.correlations:
        _require(
            corr.group in groups,
            f"correlation group {corr.group!r} matches no scveat test group "
            f"(known groups: {sorted(groups)})",
        )


def load_battery(config_path: str | os.PathLike) -> ResolvedBattery:
    """Parse a battery config and materialize every referenced concept."""
    config_path = os.fspath(config_path)
    try:
        with open(config_path, "rb") as fh:
            config_bytes = fh.read()
    except OSError as exc:
        raise BatteryConfigError(f"cannot read config {config_path}: {exc}") from exc
    try:
        raw = json.loads(config_bytes)
    except json.JSONDecodeError as exc:
        raise BatteryConfigError(f"{config_path}: invalid JSON: {exc}") from exc
    config = _parse_config(raw, os.path.dirname(os.path.abspath(config_path)))

    concepts: dict[str, list[VideoEmbedding]] = {}
    archive_digests: dict[str, str] = {}
    seen: set[tuple[str, str]] = set()
    for path in config.archives:
        try:
            with open(path, "rb") as fh:
                archive_digests[os.path.basename(path)] = hashlib.sha256(
                    fh.read()
                ).hexdigest()
            records = read_archive(path)
        except OSError as exc:
            raise BatteryConfigError(f"cannot read archive {path}: {exc}") from exc
        for rec in records:
            key = (rec.video_id, rec.concept)
            _require(
                key not in seen,
                f"duplicate (video_id, concept) {key} across archives",
            )
            seen.add(key)
        for concept, members in group_by_concept(records).items():
            concepts.setdefault(concept, []).extend(members)

    _validate_references(config, concepts)
    return ResolvedBattery(
        config=config,
        config_digest=hashlib.sha256(config_bytes).hexdigest(),
        archive_digests=archive_digests,
        concepts=concepts,
    )


def derive_seed(battery_seed: int, test_name: str) -> int:
    """Stable per-test seed from (battery seed, test name).

    Uses sha256 rather than the process-salted builtin hash so the value
    is identical across runs, platforms, and thread counts.
    """
    digest = hashlib.sha256(f"{battery_seed}:{test_name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _concept_set(battery: ResolvedBattery, name: str, role: str) -> ConceptSet:
    return ConceptSet(name, role, battery.concepts[name])


def _run_one(battery: ResolvedBattery, entry) -> NamedResult:
    cfg = dataclasses.replace(
        battery.config.permutation,
        seed=derive_seed(battery.config.permutation.seed, entry.name),
    )
    try:
        if isinstance(entry, VeatEntry):
            result = veat_test(
                _concept_set(battery, entry.x, "target"),
                _concept_set(battery, entry.y, "target"),
                _concept_set(battery, entry.a, "attribute"),
                _concept_set(battery, entry.b, "attribute"),
                cfg,
                std_divisor=battery.config.std_divisor,
            )
            return NamedResult(
                name=entry.name, kind="veat", x=entry.x, y=entry.y,
                a=entry.a, b=entry.b, result=result,
            )
        result = scveat_test(
            _concept_set(battery, entry.x, "target"),
            _concept_set(battery, entry.a, "attribute"),
            _concept_set(battery, entry.b, "attribute"),
            cfg,
            std_divisor=battery.config.std_divisor,
        )
        return NamedResult(
            name=entry.name, kind="scveat", x=entry.x, a=entry.a, b=entry.b,
            condition=entry.condition, group=entry.group,
            label=entry.join_label(), scenario=entry.scenario_key(),
            axis=entry.axis, result=result,
        )
    except VeatkitError as exc:
        raise BatteryRunError(f"test {entry.name!r}: {exc}") from exc


def _correlate(
    entry: CorrelationEntry, tests: tuple[NamedResult, ...]
) -> CorrelationResult:
    """Join control-condition effect sizes in a group to one demographic
    axis; every label must resolve and at least 3 pairs must join."""
    matched = [
        t for t in tests
        if t.kind == "scveat" and t.group == entry.group
        and t.condition in (None, "control")
    ]
    if len(matched) < 3:
        raise BatteryRunError(
            f"correlation {entry.group!r}/{entry.axis}: only {len(matched)} "
            "control-condition tests in group; need at least 3"
        )
    try:
        pairs = [
            (t.label, t.result.effect_size,
             demographic_axis_value(t.label, entry.axis, entry.source))
            for t in matched
        ]
        return pearson_r(
            xs=[p[1] for p in pairs],
            ys=[p[2] for p in pairs],
            pairs=pairs,
            group=entry.group,
            axis=entry.axis,
        )
    except VeatkitError as exc:
        raise BatteryRunError(
            f"correlation {entry.group!r}/{entry.axis}: {exc}"
        ) from exc


def _compare(tests: tuple[NamedResult, ...]) -> tuple[ComparisonResult, ...]:
    """Comparisons for every scenario that has at least one debias run."""
    by_scenario: dict[str, dict[str, TestResult]] = {}
    axes: dict[str, str] = {}
    for t in tests:
        if t.kind != "scveat" or t.condition is None:
            continue
        by_scenario.setdefault(t.scenario, {})[t.condition] = t.result
        if t.axis:
            axes[t.scenario] = t.axis
    with_debias = {
        scenario: conds
        for scenario, conds in by_scenario.items()
        if set(conds) - {"control"}
    }
    if not with_debias:
        return ()
    try:
        return tuple(compare_conditions(with_debias, axes))
    except VeatkitError as exc:
        raise BatteryRunError(f"comparison: {exc}") from exc


def run_battery(battery: ResolvedBattery, threads: int = 1) -> BatteryOutcome:
    """Execute every configured test, correlation, and comparison.

    ``threads`` > 1 runs tests concurrently; numeric output is identical
    for any thread count because each test's seed depends only on the
    battery seed and the test name, and results are assembled in config
    order.
    """
    entries = list(battery.config.veat_tests) + list(battery.config.scveat_tests)
    if threads > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tests = tuple(pool.map(lambda e: _run_one(battery, e), entries))
    else:
        tests = tuple(_run_one(battery, e) for e in entries)
    correlations = tuple(
        _correlate(entry, tests) for entry in battery.config.correlations
    )
    comparisons = _compare(tests)
    manifest = emit_provenance(battery)
    return BatteryOutcome(
        tests=tests,
        correlations=correlations,
        comparisons=comparisons,
        manifest=manifest,
    )


def emit_provenance(battery: ResolvedBattery) -> RunManifest:
    """Manifest of everything that determines the numbers."""
    cfg = battery.config
    names = tuple(t.name for t in cfg.veat_tests) + tuple(
        t.name for t in cfg.scveat_tests
    )
    return RunManifest(
        schema_version=SCHEMA_VERSION,
        tool_version=__version__,
        config_digest=battery.config_digest,
        archive_digests=dict(sorted(battery.archive_digests.items())),
        seed=cfg.permutation.seed,
        iterations=cfg.permutation.iterations,
        exact_threshold=cfg.permutation.exact_threshold,
        tie_rule=cfg.permutation.tie_rule,
        std_divisor=cfg.std_divisor,
        test_names=names,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
