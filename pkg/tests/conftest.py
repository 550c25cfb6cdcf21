from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest

from docsynth import load_bundled_schema, parse_schema
from docsynth.text import FontBook, PillowMetrics, StubMetrics

DATA = Path(__file__).parent / "data"
ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_logs():
    logging.getLogger("docsynth").setLevel(logging.ERROR)
    yield


@pytest.fixture(scope="session")
def invoice_schema():
    return load_bundled_schema("invoice")


@pytest.fixture(scope="session")
def pillow_metrics(invoice_schema):
    return PillowMetrics(FontBook.for_common(invoice_schema.common))


@pytest.fixture
def stub_metrics():
    return StubMetrics(10, 20)


def schema_dict(groups=None, **common):
    """A small valid schema as a JSON-ready dict."""
    if groups is None:
        groups = [group_dict("G", [entity_dict("e1")])]
    doc = {"structural_config": {"num_segments": 2, "segment_size": [2, 2]},
           "entity_groups": groups}
    doc.update(common)
    return doc


def group_dict(name, entities, **kw):
    g = {"name": name, "entities": entities, "probability": 1, "headerProbability": 0}
    g.update(kw)
    return g


def entity_dict(name, type_="company", **kw):
    e = {"name": name, "type": type_, "probability": 1, "header": [name.title()]}
    e.update(kw)
    return e


def make_schema(groups=None, **common):
    return parse_schema(json.dumps(schema_dict(groups, **common)))


def rendered_fixture_docs(schema, metrics, n, seed, **layout_kw):
    """Yield (instance, plan, image, rendered entities) for ``n`` fixture documents."""
    from docsynth.layout import plan_layout
    from docsynth.render import render_document
    from docsynth.sampling import RandomSource, freeze_permutation
    from docsynth.values import instantiate_document

    common = schema.common
    for i in range(n):
        rng = RandomSource(seed, i)
        perm = freeze_permutation(schema, rng.derive("freeze"), check=False)
        inst = instantiate_document(perm, schema, rng.derive("values"))
        plan = plan_layout(inst, common.structural, metrics, rng=rng.derive("layout"),
                           font_size_bounds=common.font_size, **layout_kw)
        image, rendered = render_document(inst, plan, metrics)
        yield inst, plan, image, rendered


def listing_entities():
    """The two annotated entities of the reference listing, as rendered entities.

    Entity boxes are the hand-computed bounding union of the token boxes.
    """
    from docsynth.layout import Rect
    from docsynth.render import RenderedEntity, RenderedToken

    def entity(label, tokens):
        boxes = [Rect(*xywh) for xywh, _ in tokens]
        x0, y0 = min(b.x for b in boxes), min(b.y for b in boxes)
        x1, y1 = max(b.x + b.w for b in boxes), max(b.y + b.h for b in boxes)
        toks = tuple(RenderedToken(t, b) for (_, t), b in zip(tokens, boxes))
        return RenderedEntity(label, " ".join(t for _, t in tokens), Rect(x0, y0, x1 - x0, y1 - y0),
                              toks, "value", "Listing")

    return [
        entity("InsurerName", [((132, 38, 206, 27), "SecureTrust"), ((344, 38, 165, 27), "Insurance")]),
        entity("MemberName", [((387, 205, 42, 11), "Scott"), ((432, 205, 60, 11), "Williams")]),
    ]
