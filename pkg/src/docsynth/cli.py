"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 generation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
from pathlib import Path

from docsynth.annotate import AnnotationFormatError, parse_annotation_json
from docsynth.diversity import DiversityError, LayoutFeatureEmbedder, load_vectors, mpcs
from docsynth.layout import LAYOUT_MODES
from docsynth.pipeline import MANIFEST_NAME, BatchFailureError, GenerationJob, generate_batch
from docsynth.schema import SchemaError, bundled_schema_path, load_schema, validate_schema

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_FAILED = 0, 1, 2, 3
EXPORTS = ("iob", "kie")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _resolve_schema(arg: str) -> Path:
    path = Path(arg)
    if path.exists():
        return path
    bundled = Path(bundled_schema_path(arg))
    if bundled.is_file():
        return bundled
    raise UsageError(f"schema {arg!r} is neither a file nor a bundled schema name")


def _exports(text: str) -> tuple[str, ...]:
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in items if x not in EXPORTS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown export {bad[0]!r}; choose from {EXPORTS}")
    return items


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="docsynth", description="Synthetic semi-structured document generator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a schema and print the report")
    p.add_argument("schema", help="schema file or bundled schema name (e.g. invoice)")
    p.add_argument("--strict", action="store_true", help="treat unknown keys as errors")

    p = sub.add_parser("generate", help="generate a batch of documents")
    p.add_argument("schema", help="schema file or bundled schema name (e.g. invoice)")
    p.add_argument("--count", type=_positive, default=10)
    p.add_argument("--seed", type=int, default=None, help="master seed (random when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--locale", default=None, help="value locale, e.g. es")
    p.add_argument("--translate", default=None, metavar="LANG", help="translate headers to LANG")
    p.add_argument("--layout", choices=LAYOUT_MODES, default="grid")
    p.add_argument("--instances-per-permutation", type=_positive, default=1, metavar="K")
    p.add_argument("--export", type=_exports, default=(), help="comma list of: iob,kie")
    p.add_argument("--debug-overlay", action="store_true",
                   help="also write box overlays and layout dumps under OUT/debug")
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--strict", action="store_true", help="treat unknown schema keys as errors")

    p = sub.add_parser("diversity", help="MPCS of a generated batch or a vector file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="directory of *.ann.json files")
    src.add_argument("--vectors", help="text file with one vector per line")
    p.add_argument("--output", help="also write the report as JSON to this file")
    return parser


def cmd_validate(args) -> int:
    path = _resolve_schema(args.schema)
    try:
        schema = load_schema(path, strict=args.strict)
    except SchemaError as exc:
        print(f"error: {exc}")
        return EXIT_INVALID
    report = validate_schema(schema, strict=args.strict)
    print(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbelow(2**31)
    print(f"master seed: {seed}")
    path = _resolve_schema(args.schema)
    try:
        schema = load_schema(path, strict=args.strict)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report = validate_schema(schema, strict=args.strict)
    if not report.ok:
        print(report, file=sys.stderr)
        return EXIT_INVALID
    job = GenerationJob(
        seed=seed, count=args.count, out_dir=args.out, locale=args.locale,
        translate=args.translate, layout=args.layout,
        instances_per_permutation=args.instances_per_permutation,
        export_iob="iob" in args.export, export_kie="kie" in args.export,
        debug_overlay=args.debug_overlay, workers=args.workers,
    )
    try:
        manifest = generate_batch(schema, job)
    except BatchFailureError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    s = manifest["summary"]
    print(f"documents: {job.count}  ok: {s['ok']}  regenerated: {s['regenerated']}  "
          f"failed: {s['failed']}")
    print(f"uniqueness ratio: {s['uniqueness_ratio']:.3f}  layout: {job.layout}")
    print(f"manifest: {Path(args.out) / MANIFEST_NAME}")
    return EXIT_OK


def _batch_vectors(directory: Path):
    files = sorted(directory.glob("*.ann.json"))
    docs = [parse_annotation_json(f.read_text(encoding="utf-8")) for f in files]
    manifest_path = directory / MANIFEST_NAME
    if manifest_path.is_file():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        keys, canvas = manifest["expected_keys"], tuple(manifest["canvas"])
    else:
        keys = sorted({a.label for d in docs for a in d} - {"Other"})
        canvas = (1240, 1754)
    embedder = LayoutFeatureEmbedder(keys, canvas)
    return [embedder.embed(d) for d in docs], embedder.provider_id


def cmd_diversity(args) -> int:
    try:
        if args.input:
            directory = Path(args.input)
            if not directory.is_dir():
                raise UsageError(f"{directory} is not a directory")
            vectors, provider = _batch_vectors(directory)
        else:
            vectors, provider = load_vectors(args.vectors), "external"
        if len(vectors) < 2:
            print(f"error: MPCS needs at least 2 inputs, got {len(vectors)}", file=sys.stderr)
            return EXIT_INVALID
        report = mpcs(vectors, provider=provider)
    except (DiversityError, AnnotationFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(report)
    if args.output:
        Path(args.output).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "generate": cmd_generate, "diversity": cmd_diversity}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
