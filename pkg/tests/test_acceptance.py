"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line, repeated in the terminal summary.
"""
from __future__ import annotations

import contextlib
import itertools
import json
import math
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from conftest import DATA, listing_entities, rendered_fixture_docs
from docsynth.annotate import build_annotations, export_annotation_json, parse_annotation_json
from docsynth.cli import main
from docsynth.diversity import LayoutFeatureEmbedder, mpcs
from docsynth.layout import Rect
from docsynth.pipeline import GenerationJob, generate_batch
from docsynth.sampling import RandomSource, TableLayout, freeze_permutation, permutation_fingerprint
from docsynth.values import DictionaryTranslator

SIGMAS = 4


@contextlib.contextmanager
def criterion(log, number, title):
    """Record one PASS/FAIL line for the enclosed checks and print it."""
    detail = {}
    start = time.perf_counter()
    try:
        yield detail
    except BaseException as exc:
        line = f"FAIL criterion {number}: {title} ({type(exc).__name__}: {str(exc)[:160]})"
        print(line)
        log.append(line)
        raise
    note = ", ".join(f"{k}={v}" for k, v in detail.items())
    line = f"PASS criterion {number}: {title} [{time.perf_counter() - start:.1f}s] {note}"
    print(line)
    log.append(line)


def within_sigmas(count, n, p):
    sd = math.sqrt(n * p * (1 - p))
    return abs(count - n * p) <= SIGMAS * sd + 1e-9


# 1 ----------------------------------------------------------------------------

def test_criterion_1_listing_golden_replay(acceptance_log):
    with criterion(acceptance_log, 1, "annotation listing golden replay") as d:
        start = time.perf_counter()
        text = export_annotation_json(build_annotations(listing_entities(),
                                                        ["InsurerName", "MemberName"]))
        assert json.loads(text) == json.loads((DATA / "annotation_listing.json").read_text())
        assert all(list(r) == ["entity", "children", "class"] for r in json.loads(text))
        first = json.loads(text)[0]
        (x, _), (w, _), _ = first["entity"]
        (cx, _), (cw, _), _ = first["children"][-1]
        assert cx + cw == x + w == 509 == 344 + 165
        assert time.perf_counter() - start < 1.0
        d["union"] = "344+165=132+377=509"


# 2 ----------------------------------------------------------------------------

def test_criterion_2_geometry_suite(acceptance_log, invoice_schema, pillow_metrics):
    with criterion(acceptance_log, 2, "geometry suite over 500 documents") as d:
        start = time.perf_counter()
        s = invoice_schema.common.structural
        canvas = Rect(0, 0, s.canvas_width, s.canvas_height)
        boxes = pins = 0
        for inst, plan, image, rendered in rendered_fixture_docs(
                invoice_schema, pillow_metrics, 500, 2024):
            for ent in rendered:
                tb = [t.box for t in ent.tokens]
                x0, y0 = min(b.x for b in tb), min(b.y for b in tb)
                x1, y1 = max(b.right for b in tb), max(b.bottom for b in tb)
                assert ent.box == Rect(x0, y0, x1 - x0, y1 - y0)
                assert canvas.contains(ent.box) and all(canvas.contains(b) for b in tb)
                boxes += 1
            rects = list(plan.rects.values())
            assert all(canvas.contains(r) for r in rects)
            for a, b in itertools.combinations(rects, 2):
                assert a.intersection_area(b) == 0
            for g in inst.groups:
                if g.frozen.grid_position is not None:
                    grid = plan.grids[plan.placed_section[g.name]]
                    assert grid.cell_of(g.name) == g.frozen.grid_position
                    pins += 1
        elapsed = time.perf_counter() - start
        assert elapsed < 120
        assert pins > 0
        d["entity_boxes"] = boxes
        d["pinned_checked"] = pins


# 3 ----------------------------------------------------------------------------

def test_criterion_3_sampling_statistics(acceptance_log, invoice_schema):
    with criterion(acceptance_log, 3, "sampling statistics over 10,000 freezes") as d:
        start = time.perf_counter()
        n = 10_000
        groups = invoice_schema.entity_groups
        survived = Counter()
        entity_hits = Counter()
        segments = {g.name: Counter() for g in groups}
        alignment = {g.name: Counter() for g in groups}
        tables = Counter()
        orientation = {g.name: Counter() for g in groups}
        canvas = Counter()
        separators = Counter()
        table_count = 0
        for i in range(n):
            perm = freeze_permutation(invoice_schema, RandomSource(3, i), check=False)
            canvas[perm.style.canvas_color] += 1
            for fg in perm.groups:
                survived[fg.name] += 1
                segments[fg.name][fg.segment] += 1
                alignment[fg.name][fg.alignment] += 1
                for fe in fg.entities:
                    entity_hits[fg.name, fe.name] += 1
                if isinstance(fg.layout, TableLayout):
                    tables[fg.name] += 1
                    orientation[fg.name][fg.layout.orientation] += 1
                    separators[fg.layout.style.separator] += 1
                    table_count += 1

        checks = 0
        chi_min = 1.0
        for g in groups:
            p_none = math.prod(1 - e.presence_probability for e in g.entities)
            rate = g.presence_probability * (1 - p_none)
            assert within_sigmas(survived[g.name], n, rate), g.name
            checks += 1
            m = survived[g.name]
            for e in g.entities:
                # presence given that the group survived freezing
                p = e.presence_probability / (1 - p_none)
                assert within_sigmas(entity_hits[g.name, e.name], m, min(p, 1.0)), e.name
                checks += 1
            total = sum(p for _, p in g.segment_dist)
            support = [(k, p / total) for k, p in g.segment_dist if p > 0]
            if len(support) > 1:
                observed = [segments[g.name][k] for k, _ in support]
                expected = [m * p for _, p in support]
                pval = stats.chisquare(observed, expected).pvalue
                assert pval > 0.01, (g.name, pval)
                chi_min = min(chi_min, pval)
                checks += 1
            p_table = g.tabulate.create_prob
            assert within_sigmas(tables[g.name], m, p_table), g.name
            for opts, counts, k in ((g.group_alignment, alignment[g.name], m),
                                    (g.tabulate.tab_types, orientation[g.name], tables[g.name])):
                if len(opts) > 1 and k:
                    for o in opts:
                        assert within_sigmas(counts[o], k, 1 / len(opts)), (g.name, o)
                        checks += 1
        for counts, opts, k in ((canvas, invoice_schema.common.canvas_color_options, n),
                                (separators, invoice_schema.common.table_config.separator_styles,
                                 table_count)):
            for o in opts:
                assert within_sigmas(counts[o], k, 1 / len(opts)), o
                checks += 1
        assert time.perf_counter() - start < 60
        d["checks"] = checks
        d["min_chi2_p"] = f"{chi_min:.3f}"


# 4 ----------------------------------------------------------------------------

def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_4_parallel_determinism(acceptance_log, invoice_schema, tmp_path):
    with criterion(acceptance_log, 4, "1 vs 8 workers byte-identical on 200 documents") as d:
        start = time.perf_counter()
        m1 = generate_batch(invoice_schema, GenerationJob(seed=11, count=200, out_dir=str(tmp_path / "w1")))
        m8 = generate_batch(invoice_schema, GenerationJob(seed=11, count=200, out_dir=str(tmp_path / "w8"),
                                                          workers=8))
        a, b = _tree(tmp_path / "w1"), _tree(tmp_path / "w8")
        assert a.keys() == b.keys()
        assert [k for k in a if a[k] != b[k]] == []
        key = lambda r: json.dumps(r, sort_keys=True)  # noqa: E731
        assert sorted(map(key, m1["records"])) == sorted(map(key, m8["records"]))
        assert time.perf_counter() - start < 120
        d["files"] = len(a)


# 5 ----------------------------------------------------------------------------

def test_criterion_5_uniqueness(acceptance_log, invoice_schema):
    with criterion(acceptance_log, 5, "permutation uniqueness over 1,000 freezes") as d:
        prints = {permutation_fingerprint(freeze_permutation(invoice_schema, RandomSource(5, i),
                                                             check=False))
                  for i in range(1000)}
        ratio = len(prints) / 1000
        d["ratio"] = f"{ratio:.3f}"
        assert ratio >= 0.95


# 6 ----------------------------------------------------------------------------

def test_criterion_6_multilinguality(acceptance_log, invoice_schema, tmp_path, capsys):
    with criterion(acceptance_log, 6, "--locale es --translate es two-flag switch") as d:
        out = tmp_path / "es"
        assert main(["generate", "invoice", "--count", "20", "--seed", "6", "--out", str(out),
                     "--locale", "es", "--translate", "es"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        hits = values = 0
        for r in manifest["records"]:
            assert r["status"] != "failed"
            assert set(r["value_locales"]) == {"es"}
            assert r["header_translation"]["miss"] == 0
            hits += r["header_translation"]["hit"]
            values += r["value_locales"]["es"]
        # every English header string used by the schema has a Spanish entry
        table = DictionaryTranslator().table("es")
        english = {h for g in invoice_schema.entity_groups for h in g.headers}
        english |= {h for g in invoice_schema.entity_groups for e in g.entities for h in e.headers}
        assert english <= set(table)
        spanish = set(table.values())
        other = [a.text for f in sorted(out.glob("*.ann.json"))
                 for a in parse_annotation_json(f.read_text()) if a.label == "Other"]
        assert any(t in spanish for t in other)
        assert not any(t in english - spanish for t in other)
        assert hits > 0
        d["headers_translated"] = hits
        d["es_values"] = values


# 7 ----------------------------------------------------------------------------

def _batch_vectors(schema, out: Path, **job):
    manifest = generate_batch(schema, GenerationJob(out_dir=str(out), **job))
    emb = LayoutFeatureEmbedder(manifest["expected_keys"], tuple(manifest["canvas"]))
    return [emb.embed(parse_annotation_json((out / r["files"]["annotation"]).read_text()))
            for r in manifest["records"]]


def test_criterion_7_mpcs_suite(acceptance_log, invoice_schema, tmp_path):
    with criterion(acceptance_log, 7, "MPCS duplicated, hand oracle and diversity ordering") as d:
        dup = mpcs([[0.2, 0.7, -1.5]] * 6)
        assert abs(dup.mean - 1.0) <= 1e-9
        hand = mpcs([(1, 0), (1, 0), (0, 1)])
        # cosines 1, 0, 0
        assert abs(hand.mean - 1 / 3) <= 1e-9
        assert abs(hand.std - math.sqrt(2) / 3) <= 1e-9
        count = 40
        randomized = mpcs(_batch_vectors(invoice_schema, tmp_path / "rand", seed=70, count=count))
        frozen = mpcs(_batch_vectors(invoice_schema, tmp_path / "one", seed=70, count=count,
                                     instances_per_permutation=count))
        d["randomized"] = f"{randomized.mean:.3f}±{randomized.std:.3f}"
        d["single_permutation"] = f"{frozen.mean:.3f}±{frozen.std:.3f}"
        assert randomized.mean < frozen.mean


# 8 ----------------------------------------------------------------------------

def test_criterion_8_random_layout_ablation(acceptance_log, tmp_path, capsys):
    with criterion(acceptance_log, 8, "--layout random ablation runs end to end") as d:
        out = tmp_path / "random"
        assert main(["generate", "invoice", "--count", "20", "--seed", "8", "--out", str(out),
                     "--layout", "random", "--debug-overlay"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["layout_mode"] == "random"
        w, h = manifest["canvas"]
        ok = 0
        for r in manifest["records"]:
            assert r["status"] != "failed"
            dump = json.loads((out / r["files"]["layout_dump"]).read_text())
            assert dump["mode"] == "random"
            rects = [Rect(*g["rect"]) for g in dump["groups"]]
            assert all(Rect(0, 0, w, h).contains(x) for x in rects)
            for a, b in itertools.combinations(rects, 2):
                assert a.intersection_area(b) == 0
            assert parse_annotation_json((out / r["files"]["annotation"]).read_text())
            ok += 1
        d["documents"] = ok


# 9 ----------------------------------------------------------------------------

def test_criterion_9_throughput(acceptance_log, invoice_schema, tmp_path):
    with criterion(acceptance_log, 9, "single-worker throughput at 1240x1754") as d:
        s = invoice_schema.common.structural
        assert (s.canvas_width, s.canvas_height) == (1240, 1754)
        generate_batch(invoice_schema, GenerationJob(seed=1, count=3, out_dir=str(tmp_path / "warm")))
        count = 100
        start = time.perf_counter()
        generate_batch(invoice_schema, GenerationJob(seed=99, count=count, out_dir=str(tmp_path / "t")))
        rate = count / (time.perf_counter() - start)
        d["docs_per_s"] = f"{rate:.1f}"
        assert rate >= 10
