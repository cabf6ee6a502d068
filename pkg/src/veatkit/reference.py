"""Bundled reference data: stimuli, demographics, valence norms, prompts.

These files are inputs the experiment batteries join against, shipped
with the package and checksummed at load time so silent edits fail loudly.
They are reference material, not computed results.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .analysis import CorrelationResult, DemographicRecord, pearson_r
from .errors import InvalidInputError

_DATA_FILES = (
    "stimuli.json",
    "occupations.json",
    "awards.json",
    "oasis.json",
    "prompts.json",
)


@dataclass(frozen=True)
class OasisTheme:
    theme: str
    valence_mean: float
    effect_size: float
    category: str


@dataclass(frozen=True)
class ReferenceData:
    """Everything the battery runner can join against by label."""

    stimuli: dict
    occupations: tuple[DemographicRecord, ...]
    awards: tuple[DemographicRecord, ...]
    oasis: tuple[OasisTheme, ...]
    debias_prompts: dict[str, str]
    prompt_templates: dict[str, str]


def normalize_label(label: str) -> str:
    """Join keys are lowercase with collapsed whitespace, no fuzzing."""
    return " ".join(label.lower().split())


def _read(name: str) -> bytes:
    return resources.files("veatkit.data").joinpath(name).read_bytes()


def verify_checksums() -> None:
    """Compare each bundled file against its recorded sha256."""
    recorded = json.loads(_read("checksums.json"))
    for name in _DATA_FILES:
        digest = hashlib.sha256(_read(name)).hexdigest()
        if recorded.get(name) != digest:
            raise InvalidInputError(
                f"reference data file {name} does not match its recorded "
                f"checksum; refusing to use edited reference tables"
            )


@lru_cache(maxsize=1)
def load_reference_data() -> ReferenceData:
    """Load and validate the bundled tables (cached)."""
    verify_checksums()
    stimuli = json.loads(_read("stimuli.json"))["concepts"]
    occupations = tuple(
        DemographicRecord(
            label=normalize_label(rec["label"]),
            attribute_group=rec["attribute_group"],
            pct_women=rec["pct_women"],
            pct_black=rec["pct_black"],
            pct_white=rec["pct_white"],
        )
        for rec in json.loads(_read("occupations.json"))["records"]
    )
    awards = tuple(
        DemographicRecord(
            label=normalize_label(rec["label"]),
            attribute_group=rec["attribute_group"],
            n_female=rec["n_female"],
            n_black=rec["n_black"],
            n_total=rec["n_total"],
        )
        for rec in json.loads(_read("awards.json"))["records"]
    )
    oasis = tuple(
        OasisTheme(
            theme=normalize_label(rec["theme"]),
            valence_mean=rec["valence_mean"],
            effect_size=rec["effect_size"],
            category=rec["category"],
        )
        for rec in json.loads(_read("oasis.json"))["records"]
    )
    prompts = json.loads(_read("prompts.json"))
    return ReferenceData(
        stimuli=stimuli,
        occupations=occupations,
        awards=awards,
        oasis=oasis,
        debias_prompts=prompts["debias_prompts"],
        prompt_templates=prompts["templates"],
    )


def demographic_axis_value(label: str, axis: str, source: str) -> float:
    """Axis percentage for one normalized label in one reference table.

    When a label appears under several attribute groups (e.g. an
    occupation associated with both a gender and a race) the axis value
    must be identical across them; any disagreement is an error rather
    than an arbitrary pick.
    """
    data = load_reference_data()
    if source == "occupations":
        records = [r for r in data.occupations if r.label == normalize_label(label)]
    elif source == "awards":
        records = [r for r in data.awards if r.label == normalize_label(label)]
    else:
        raise InvalidInputError(
            f"unknown demographic source {source!r}; "
            "expected 'occupations' or 'awards'"
        )
    if not records:
        table = data.occupations if source == "occupations" else data.awards
        known = ", ".join(sorted({r.label for r in table}))
        raise InvalidInputError(
            f"label {label!r} not in {source} reference data; known: {known}"
        )
    values = {rec.axis_value(axis) for rec in records}
    if len(values) != 1:
        raise InvalidInputError(
            f"label {label!r} has conflicting {axis} values {sorted(values)}"
        )
    return values.pop()


def oasis_baseline_correlation() -> CorrelationResult:
    """Pearson's r between human valence norms and measured effect sizes
    over the ten bundled validation themes."""
    data = load_reference_data()
    xs = [t.valence_mean for t in data.oasis]
    ys = [t.effect_size for t in data.oasis]
    pairs = tuple((t.theme, t.effect_size, t.valence_mean) for t in data.oasis)
    return pearson_r(xs, ys, pairs=pairs, group="oasis-validation",
                     axis="valence_mean")
