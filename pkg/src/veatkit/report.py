"""Result serialization: machine tables, JSON mirror, readable summary.

Machine outputs (CSV, JSON) carry full float precision and survive
round-trips exactly; the Markdown report renders floats to 4 decimal
places and annotates significance with the usual star convention.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from pathlib import Path

from .battery import BatteryOutcome, RunManifest
from .analysis import classify_effect
from .errors import InvalidInputError

RESULTS_CSV = "results.csv"
CORRELATIONS_CSV = "correlations.csv"
COMPARISONS_CSV = "comparisons.csv"
RESULTS_JSON = "results.json"
REPORT_MD = "report.md"
MANIFEST_JSON = "manifest.json"

ABSENT = "NA"


def significance_stars(p: float) -> str:
    """The conventional star annotation: 0.001, 0.01, 0.05 thresholds."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _full(value) -> str:
    """Full-precision serialization: shortest decimal that round-trips."""
    if value is None:
        return ABSENT
    return repr(float(value))


def _human(value) -> str:
    if value is None:
        return ABSENT
    return f"{value:.4f}"


def emit_csv(outcome: BatteryOutcome, output_dir: str | os.PathLike) -> list[Path]:
    """Write results, correlations, and the long-format comparison grid.

    The comparison file is omitted entirely (not written empty) when the
    battery produced no comparisons.
    """
    if not outcome.tests:
        raise InvalidInputError("no results to emit")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / RESULTS_CSV
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["test", "kind", "condition", "group", "label", "effect_size",
             "p_value", "method", "iterations", "seed", "tie_rule",
             "classification", "statistic", "pooled_std"]
        )
        for t in outcome.tests:
            r = t.result
            writer.writerow(
                [t.name, t.kind, t.condition or ABSENT, t.group or ABSENT,
                 t.label or ABSENT, _full(r.effect_size), _full(r.p_value),
                 r.method, r.iterations, r.seed, r.tie_rule,
                 classify_effect(r.effect_size), _full(r.statistic),
                 _full(r.pooled_std)]
            )
    written.append(path)

    if outcome.correlations:
        path = out / CORRELATIONS_CSV
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["group", "axis", "r", "n"])
            for c in outcome.correlations:
                writer.writerow([c.group, c.axis, _full(c.r), c.n])
        written.append(path)

    if outcome.comparisons:
        path = out / COMPARISONS_CSV
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scenario", "condition", "axis", "effect_size"])
            for comp in outcome.comparisons:
                rows = [
                    ("control", comp.d_control),
                    ("debias1", comp.d_debias1),
                    ("debias2", comp.d_debias2),
                ]
                for condition, d in rows:
                    writer.writerow(
                        [comp.scenario, condition, comp.axis or ABSENT, _full(d)]
                    )
        written.append(path)
    return written


def _manifest_dict(manifest: RunManifest) -> dict:
    return dataclasses.asdict(manifest)


def outcome_dict(outcome: BatteryOutcome) -> dict:
    """The field-for-field JSON mirror of a battery outcome, without the
    manifest (whose timestamp would break byte-identity across reruns)."""
    return {
        "schema_version": outcome.manifest.schema_version,
        "tests": [dataclasses.asdict(t) for t in outcome.tests],
        "correlations": [dataclasses.asdict(c) for c in outcome.correlations],
        "comparisons": [dataclasses.asdict(c) for c in outcome.comparisons],
    }


def emit_json(outcome: BatteryOutcome, output_dir: str | os.PathLike) -> list[Path]:
    """Write results.json (deterministic bytes) and manifest.json."""
    if not outcome.tests:
        raise InvalidInputError("no results to emit")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / RESULTS_JSON
    with open(results_path, "w", encoding="utf-8") as fh:
        json.dump(outcome_dict(outcome), fh, sort_keys=True, indent=2)
        fh.write("\n")
    manifest_path = out / MANIFEST_JSON
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(_manifest_dict(outcome.manifest), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return [results_path, manifest_path]


def read_manifest(path: str | os.PathLike) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    raw["archive_digests"] = dict(raw["archive_digests"])
    raw["test_names"] = tuple(raw["test_names"])
    return RunManifest(**raw)


def emit_markdown(outcome: BatteryOutcome, output_dir: str | os.PathLike) -> Path:
    """Write the human-readable report with 4-decimal floats and stars."""
    if not outcome.tests:
        raise InvalidInputError("no results to emit")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["# Association test report", ""]

    lines += [
        "## Test results",
        "",
        "| test | condition | d | p | significance | magnitude |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for t in outcome.tests:
        r = t.result
        lines.append(
            f"| {t.name} | {t.condition or '-'} | {_human(r.effect_size)} | "
            f"{_human(r.p_value)} | {significance_stars(r.p_value) or '-'} | "
            f"{classify_effect(r.effect_size)} |"
        )
    lines.append("")

    if outcome.correlations:
        lines += [
            "## Demographic correlations",
            "",
            "| group | axis | r | n |",
            "| --- | --- | --- | --- |",
        ]
        for c in outcome.correlations:
            lines.append(f"| {c.group} | {c.axis} | {_human(c.r)} | {c.n} |")
        lines.append("")

    if outcome.comparisons:
        lines += [
            "## Debias comparison (effect size by condition)",
            "",
            "| scenario | axis | control | debias1 | debias2 | flip1 | flip2 |",
            "| --- | --- | --- | --- | --- | --- | --- |",
        ]
        for comp in outcome.comparisons:
            lines.append(
                f"| {comp.scenario} | {comp.axis or '-'} | "
                f"{_human(comp.d_control)} | {_human(comp.d_debias1)} | "
                f"{_human(comp.d_debias2)} | {comp.sign_flip1} | "
                f"{comp.sign_flip2} |"
            )
        lines.append("")

    lines += ["## Summary", ""]
    for t in outcome.tests:
        r = t.result
        stars = significance_stars(r.p_value)
        note = f" {stars}" if stars else " (not significant)"
        lines.append(
            f"- {t.name}: d = {_human(r.effect_size)} "
            f"({classify_effect(r.effect_size)}), p = {_human(r.p_value)}{note}"
        )
    lines.append("")

    path = out / REPORT_MD
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


def emit_all(outcome: BatteryOutcome, output_dir: str | os.PathLike) -> list[Path]:
    paths = emit_csv(outcome, output_dir)
    paths += emit_json(outcome, output_dir)
    paths.append(emit_markdown(outcome, output_dir))
    return paths
