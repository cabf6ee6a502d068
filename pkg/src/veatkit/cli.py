"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error. Diagnostics go to
stderr; results go to stdout or to files under the output directory.
Permutation flags can also be supplied via a JSON config file
(``--config``); explicit flags win. The default output directory can be
set with the VEATKIT_OUTPUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .analysis import (
    classify_effect,
    compare_conditions,
    fleiss_kappa,
    pearson_r,
    read_annotations_csv,
)
from .association import (
    PermutationConfig,
    STD_DIVISORS,
    TIE_RULES,
    scveat_test,
    veat_test,
)
from .battery import load_battery, run_battery
from .embeddings import (
    ConceptSet,
    FrameSequence,
    concept_set,
    pool_frames,
    read_archive,
    write_archive,
)
from .errors import InvalidInputError, VeatkitError
from .oracle import self_check
from .reference import demographic_axis_value
from .report import emit_all, significance_stars

OUTPUT_DIR_ENV = "VEATKIT_OUTPUT_DIR"

_FLAG_DEFAULTS = {
    "seed": 0,
    "iterations": 100_000,
    "exact_threshold": 200_000,
    "tie_rule": "strict",
    "std_divisor": "sample",
}


def _add_perm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file of flag defaults")
    parser.add_argument("--seed", type=int, help="permutation seed")
    parser.add_argument("--iterations", type=int,
                        help="Monte Carlo draws when enumeration is infeasible")
    parser.add_argument("--exact-threshold", type=int, dest="exact_threshold",
                        help="max partitions to enumerate exactly")
    parser.add_argument("--tie-rule", choices=TIE_RULES, dest="tie_rule",
                        help="exact-mode handling of ties at the observed value")
    parser.add_argument("--std-divisor", choices=STD_DIVISORS, dest="std_divisor",
                        help="effect-size deviation divisor")


def _load_flag_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidInputError(f"{path}: flag config must be a JSON object")
    unknown = set(raw) - set(_FLAG_DEFAULTS) - {"output_dir"}
    if unknown:
        raise InvalidInputError(f"{path}: unknown flag keys {sorted(unknown)}")
    return raw


def _resolve(args: argparse.Namespace, key: str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    file_cfg = getattr(args, "_file_cfg", {})
    if key in file_cfg:
        return file_cfg[key]
    return _FLAG_DEFAULTS[key]


def _perm_config(args: argparse.Namespace) -> PermutationConfig:
    return PermutationConfig(
        seed=_resolve(args, "seed"),
        iterations=_resolve(args, "iterations"),
        exact_threshold=_resolve(args, "exact_threshold"),
        tie_rule=_resolve(args, "tie_rule"),
    )


def _output_dir(args: argparse.Namespace) -> str:
    if getattr(args, "output_dir", None):
        return args.output_dir
    file_cfg = getattr(args, "_file_cfg", {})
    if "output_dir" in file_cfg:
        return file_cfg["output_dir"]
    return os.environ.get(OUTPUT_DIR_ENV, ".")


def _load_concepts(args: argparse.Namespace, names: dict[str, str]):
    records = []
    for path in args.archive:
        records.extend(read_archive(path))
    sets = {}
    for role_key, role in names.items():
        sets[role_key] = concept_set(records, getattr(args, role_key), role)
    return sets


def _print_result(label: str, result) -> None:
    stars = significance_stars(result.p_value)
    print(
        f"{label}: d = {result.effect_size:.4f} "
        f"({classify_effect(result.effect_size)}), "
        f"p = {result.p_value:.6g}{' ' + stars if stars else ''}, "
        f"method = {result.method}"
        + (f", iterations = {result.iterations}" if result.iterations else "")
    )


def _cmd_pool(args: argparse.Namespace) -> int:
    embeddings = []
    with open(args.frames, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                seq = FrameSequence(
                    rec["video_id"], rec["timestamps"], rec["frames"]
                )
                embeddings.append(
                    pool_frames(
                        seq,
                        concept=rec.get("concept", ""),
                        source_path=rec.get("source_path"),
                        normalize=args.normalize_frames,
                    )
                )
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise InvalidInputError(
                    f"{args.frames} line {line_no}: bad frame record: {exc}"
                ) from exc
    write_archive(embeddings, args.out)
    print(f"pooled {len(embeddings)} video(s) -> {args.out}")
    return 0


def _cmd_veat(args: argparse.Namespace) -> int:
    sets = _load_concepts(
        args, {"x": "target", "y": "target", "a": "attribute", "b": "attribute"}
    )
    result = veat_test(
        sets["x"], sets["y"], sets["a"], sets["b"],
        _perm_config(args), std_divisor=_resolve(args, "std_divisor"),
    )
    _print_result(f"{args.x} vs {args.y} / {args.a} vs {args.b}", result)
    return 0


def _cmd_scveat(args: argparse.Namespace) -> int:
    sets = _load_concepts(
        args, {"x": "target", "a": "attribute", "b": "attribute"}
    )
    result = scveat_test(
        sets["x"], sets["a"], sets["b"],
        _perm_config(args), std_divisor=_resolve(args, "std_divisor"),
    )
    _print_result(f"{args.x} / {args.a} vs {args.b}", result)
    return 0


def _cmd_battery(args: argparse.Namespace) -> int:
    battery = load_battery(args.battery_config)
    outcome = run_battery(battery, threads=args.threads)
    paths = emit_all(outcome, _output_dir(args))
    for t in outcome.tests:
        _print_result(t.name, t.result)
    for c in outcome.correlations:
        print(f"correlation {c.group}/{c.axis}: r = {c.r:.4f} (n = {c.n})")
    print(f"wrote {len(paths)} file(s) to {_output_dir(args)}", file=sys.stderr)
    return 0


def _cmd_correlate(args: argparse.Namespace) -> int:
    with open(args.results, encoding="utf-8") as fh:
        payload = json.load(fh)
    pairs = []
    for t in payload.get("tests", []):
        if t.get("kind") != "scveat" or t.get("group") != args.group:
            continue
        if t.get("condition") not in (None, "control"):
            continue
        label = t.get("label") or t.get("x")
        value = demographic_axis_value(label, args.axis, args.source)
        pairs.append((label, t["result"]["effect_size"], value))
    if len(pairs) < 3:
        raise InvalidInputError(
            f"group {args.group!r}: only {len(pairs)} control results in "
            f"{args.results}; need at least 3"
        )
    res = pearson_r(
        [p[1] for p in pairs], [p[2] for p in pairs],
        pairs=pairs, group=args.group, axis=args.axis,
    )
    print(f"r = {res.r:.4f} (n = {res.n})")
    if args.pairs:
        for label, d, pct in res.pairs:
            print(f"  {label}: d = {d:.4f}, {args.axis} = {pct:.1f}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    with open(args.results, encoding="utf-8") as fh:
        payload = json.load(fh)
    scenarios: dict[str, dict[str, float]] = {}
    for t in payload.get("tests", []):
        if t.get("kind") != "scveat" or t.get("condition") is None:
            continue
        scenario = t.get("scenario") or t.get("label") or t.get("x")
        scenarios.setdefault(scenario, {})[t["condition"]] = t["result"][
            "effect_size"
        ]
    if not scenarios:
        raise InvalidInputError(f"{args.results}: no condition-tagged results")
    for comp in compare_conditions(scenarios):
        print(
            f"{comp.scenario}: control d = {comp.d_control:.4f} "
            f"({comp.neutrality_control})"
        )
        for cond, d, delta, flip in (
            ("debias1", comp.d_debias1, comp.delta1, comp.sign_flip1),
            ("debias2", comp.d_debias2, comp.delta2, comp.sign_flip2),
        ):
            if d is None:
                continue
            flag = ", sign flip" if flip else ""
            print(f"  {cond}: d = {d:.4f} (delta {delta:+.4f}{flag})")
    return 0


def _cmd_agreement(args: argparse.Namespace) -> int:
    records = read_annotations_csv(args.annotations)
    kappa = fleiss_kappa(records)
    print(f"fleiss_kappa = {kappa:.4f} over {len(records)} annotations")
    return 0


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    failures = self_check(trials=args.trials, seed=_resolve(args, "seed"))
    if failures:
        for f in failures:
            print(f, file=sys.stderr)
        print(f"oracle check FAILED: {len(failures)} mismatch(es)",
              file=sys.stderr)
        return 1
    print(f"oracle check passed: {args.trials} randomized instances")
    return 0


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation errors: usage text, exit 1."""

    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="veatkit",
        description="Quantify associations and biases in video embedding sets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pool", help="mean-pool frame sequences into an archive")
    p.add_argument("--frames", required=True,
                   help="JSON Lines of {video_id, concept, timestamps, frames}")
    p.add_argument("--out", required=True, help="archive path to write")
    p.add_argument("--normalize-frames", action="store_true",
                   dest="normalize_frames",
                   help="L2-normalize each frame before pooling")
    p.set_defaults(handler=_cmd_pool)

    p = sub.add_parser("veat", help="differential association test")
    p.add_argument("--archive", action="append", required=True)
    p.add_argument("--x", required=True, help="first target concept")
    p.add_argument("--y", required=True, help="second target concept")
    p.add_argument("--a", required=True, help="first attribute concept")
    p.add_argument("--b", required=True, help="second attribute concept")
    _add_perm_flags(p)
    p.set_defaults(handler=_cmd_veat)

    p = sub.add_parser("scveat", help="single-category association test")
    p.add_argument("--archive", action="append", required=True)
    p.add_argument("--x", required=True, help="target concept")
    p.add_argument("--a", required=True, help="first attribute concept")
    p.add_argument("--b", required=True, help="second attribute concept")
    _add_perm_flags(p)
    p.set_defaults(handler=_cmd_scveat)

    p = sub.add_parser("battery", help="run a battery config end to end")
    p.add_argument("battery_config", help="battery JSON config path")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--config", help="JSON file of flag defaults")
    p.set_defaults(handler=_cmd_battery)

    p = sub.add_parser("correlate",
                       help="correlate group effect sizes with demographics")
    p.add_argument("--results", required=True, help="results.json from a battery")
    p.add_argument("--group", required=True)
    p.add_argument("--axis", required=True,
                   help="e.g. pct_women, pct_white, pct_male, pct_non_black")
    p.add_argument("--source", choices=("occupations", "awards"), required=True)
    p.add_argument("--pairs", action="store_true", help="print joined pairs")
    p.set_defaults(handler=_cmd_correlate)

    p = sub.add_parser("compare", help="per-scenario debias-condition deltas")
    p.add_argument("--results", required=True, help="results.json from a battery")
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("agreement", help="Fleiss' kappa over an annotation CSV")
    p.add_argument("--annotations", required=True,
                   help="CSV with header video_id,annotator_id,category")
    p.set_defaults(handler=_cmd_agreement)

    p = sub.add_parser("oracle-check",
                       help="verify the fast path against the brute-force oracle")
    p.add_argument("--trials", type=int, default=200)
    _add_perm_flags(p)
    p.set_defaults(handler=_cmd_oracle_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._file_cfg = _load_flag_config(getattr(args, "config", None))
        return args.handler(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VeatkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
