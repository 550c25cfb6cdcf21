"""End-to-end batch generation.

Per document: freeze a permutation, fill values, plan the layout, render,
annotate and write.  Every random draw comes from a stream derived from
``(master seed, document index, attempt)``, so outputs do not depend on
worker count or scheduling.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from docsynth.annotate import (
    build_annotations,
    export_annotation_json,
    export_iob,
    export_kie_json,
    format_iob_tsv,
    format_kie_json,
)
from docsynth.layout import GRID, LAYOUT_MODES, LayoutError, plan_layout
from docsynth.render import draw_debug_overlay, render_document
from docsynth.sampling import RandomSource, freeze_permutation, permutation_fingerprint
from docsynth.schema import StochasticSchema, TranslationConfig, schema_digest, validate_schema
from docsynth.text import FontBook, PillowMetrics
from docsynth.values import DictionaryTranslator, instantiate_document

logger = logging.getLogger(__name__)

MAX_RETRIES = 3
FAILURE_THRESHOLD = 0.05
MANIFEST_NAME = "manifest.json"
STATUSES = ("ok", "regenerated", "failed")


class BatchFailureError(RuntimeError):
    def __init__(self, message: str, manifest: dict):
        super().__init__(message)
        self.manifest = manifest


@dataclass(frozen=True)
class GenerationJob:
    seed: int
    count: int
    out_dir: str
    locale: str | None = None
    translate: str | None = None
    layout: str = GRID
    instances_per_permutation: int = 1
    export_iob: bool = False
    export_kie: bool = False
    debug_overlay: bool = False
    workers: int = 1
    max_retries: int = MAX_RETRIES
    failure_threshold: float = FAILURE_THRESHOLD

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.layout not in LAYOUT_MODES:
            raise ValueError(f"layout must be one of {LAYOUT_MODES}")
        if self.instances_per_permutation < 1:
            raise ValueError("instances_per_permutation must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class DocumentRecord:
    index: int
    stream: int
    name: str
    status: str = "failed"
    retries: int = 0
    fingerprint: str | None = None
    value_digest: str | None = None
    files: dict = field(default_factory=dict)
    error: str | None = None
    value_locales: dict = field(default_factory=dict)
    header_translation: dict = field(default_factory=dict)
    respilled: list = field(default_factory=list)
    font_delta: int = 0
    entity_count: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def document_name(doc_type: str, index: int) -> str:
    return f"{doc_type}_{index:06}"


_metrics_cache: dict[int, PillowMetrics] = {}


def _metrics_for(schema: StochasticSchema) -> PillowMetrics:
    book = FontBook.for_common(schema.common)
    if id(book) not in _metrics_cache:
        _metrics_cache[id(book)] = PillowMetrics(book)
    return _metrics_cache[id(book)]


def _value_digest(instance) -> str:
    values = [[e.name, list(e.values)] for g in instance.groups for e in g.entities]
    return hashlib.sha256(json.dumps(values, ensure_ascii=False).encode()).hexdigest()


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def generate_one(schema: StochasticSchema, job: GenerationJob, index: int, *,
                 registry=None, translator=None) -> DocumentRecord:
    """Generate, annotate and write document ``index`` of ``job``.

    Layout failures are retried up to ``job.max_retries`` times on fresh
    derived streams.  Any other error fails only this document.
    """
    stream = index // job.instances_per_permutation
    name = document_name(schema.doc_type_name, index)
    record = DocumentRecord(index, stream, name)
    out = Path(job.out_dir)
    common = schema.common
    locale = job.locale or common.faker_locale
    translation = (TranslationConfig(True, job.translate) if job.translate
                   else common.translation)
    if translation.enable and translator is None:
        translator = DictionaryTranslator()
    try:
        metrics = _metrics_for(schema)
        for attempt in range(job.max_retries + 1):
            record.retries = attempt
            perm_rng = RandomSource(job.seed, stream).derive("freeze", attempt)
            doc_rng = RandomSource(job.seed, index).derive("document", attempt)
            perm = freeze_permutation(schema, perm_rng, check=False)
            instance = instantiate_document(perm, schema, doc_rng.derive("values"),
                                            registry=registry, translator=translator,
                                            locale=locale, translation=translation)
            try:
                plan = plan_layout(instance, common.structural, metrics, mode=job.layout,
                                   rng=doc_rng.derive("layout"),
                                   font_size_bounds=common.font_size)
            except LayoutError as exc:
                record.error = f"layout: {exc}"
                continue
            break
        else:
            record.status = "failed"
            return record

        image, rendered = render_document(instance, plan, metrics)
        annotations = build_annotations(rendered, common.expected_keys)
        files = {"image": f"{name}.png", "annotation": f"{name}.ann.json"}
        image.save(out / files["image"], format="PNG", compress_level=1)
        _write(out / files["annotation"], export_annotation_json(annotations))
        if job.export_iob:
            files["iob"] = f"{name}.iob.tsv"
            _write(out / files["iob"], format_iob_tsv(export_iob(annotations)))
        if job.export_kie:
            files["kie"] = f"{name}.kie.json"
            _write(out / files["kie"], format_kie_json(export_kie_json(annotations,
                                                                       common.expected_keys)))
        if job.debug_overlay:
            debug = out / "debug"
            debug.mkdir(exist_ok=True)
            draw_debug_overlay(image, rendered).save(debug / f"{name}.overlay.png", format="PNG")
            _write(debug / f"{name}.layout.json", json.dumps(plan.to_dict(), indent=2) + "\n")
            files["debug_overlay"] = f"debug/{name}.overlay.png"
            files["layout_dump"] = f"debug/{name}.layout.json"

        record.files = files
        record.status = "ok" if record.retries == 0 else "regenerated"
        record.error = None
        record.fingerprint = permutation_fingerprint(perm)
        record.value_digest = _value_digest(instance)
        record.value_locales = dict(sorted(instance.value_sources.items()))
        record.header_translation = {"hit": instance.header_translation.get("hit", 0),
                                     "miss": instance.header_translation.get("miss", 0)}
        record.respilled = list(plan.respilled)
        record.font_delta = plan.font_delta
        record.entity_count = len(annotations)
    except Exception as exc:  # crash isolation: one bad document never stops the batch
        logger.exception("document %d failed", index)
        record.status = "failed"
        record.error = f"{type(exc).__name__}: {exc}"
    return record


_worker_state: dict = {}


def _init_worker(schema: StochasticSchema, job: GenerationJob) -> None:
    logging.getLogger("docsynth").setLevel(logging.ERROR)
    _worker_state["schema"] = schema
    _worker_state["job"] = job


def _work(index: int) -> DocumentRecord:
    return generate_one(_worker_state["schema"], _worker_state["job"], index)


def uniqueness_ratio(records) -> float:
    prints = [r.fingerprint for r in records if r.fingerprint is not None]
    return len(set(prints)) / len(prints) if prints else 0.0


def generate_batch(schema: StochasticSchema, job: GenerationJob, *, registry=None) -> dict:
    """Generate ``job.count`` documents and write ``manifest.json``.

    Raises :class:`BatchFailureError` (after writing the manifest) when more
    than ``job.failure_threshold`` of the documents failed.
    """
    report = validate_schema(schema, registry)
    if not report.ok:
        raise ValueError("invalid schema: " + "; ".join(report.errors))
    out = Path(job.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    indices = range(job.count)
    if job.workers == 1 or registry is not None:
        records = [generate_one(schema, job, i, registry=registry) for i in indices]
    else:
        chunk = max(1, job.count // (job.workers * 8))
        with ProcessPoolExecutor(job.workers, initializer=_init_worker,
                                 initargs=(schema, job)) as pool:
            records = list(pool.map(_work, indices, chunksize=chunk))
    records.sort(key=lambda r: r.index)

    counts = {s: sum(r.status == s for r in records) for s in STATUSES}
    manifest = {
        "schema_digest": schema_digest(schema),
        "master_seed": job.seed,
        "layout_mode": job.layout,
        "doc_type": schema.doc_type_name,
        "canvas": [schema.common.structural.canvas_width, schema.common.structural.canvas_height],
        "expected_keys": list(schema.common.expected_keys),
        "locale": job.locale or schema.common.faker_locale,
        "translate": job.translate,
        "instances_per_permutation": job.instances_per_permutation,
        "count": job.count,
        "summary": {**counts, "uniqueness_ratio": uniqueness_ratio(records)},
        "records": [r.to_dict() for r in records],
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
    failed = counts["failed"] / job.count
    if failed > job.failure_threshold:
        causes = sorted({r.error for r in records if r.error})[:5]
        raise BatchFailureError(
            f"{counts['failed']} of {job.count} documents failed "
            f"({failed:.1%} > {job.failure_threshold:.0%}); causes: {causes}", manifest)
    return manifest


def load_manifest(out_dir: str | os.PathLike) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text(encoding="utf-8"))
