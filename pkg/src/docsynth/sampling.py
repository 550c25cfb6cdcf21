"""Freeze a stochastic schema into a concrete document permutation.

Every random draw goes through :class:`RandomSource`, whose only primitive
is :meth:`random.Random.random` seeded from a hash of
``(seed, stream, *substreams)``.  That primitive is reproducible across
platforms and Python versions, so identical seeds give identical
permutations everywhere.
"""
from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import asdict, dataclass, replace
from typing import Any, Hashable, Mapping, Sequence, TypeVar

from docsynth.schema import (
    RANDOM,
    CommonConfig,
    EntityGroupDef,
    StochasticSchema,
    TabulateSpec,
    normalize_segment_dist,
    validate_schema,
)
from docsynth.text import FontBook, FontSpec

T = TypeVar("T")
K = TypeVar("K", bound=Hashable)

MAX_EMPTY_RETRIES = 10


class SamplingError(Exception):
    pass


class EmptyDocumentError(SamplingError):
    pass


class RandomSource:
    """Deterministic random stream addressed by (seed, stream, substreams)."""

    def __init__(self, seed: int, stream: int = 0, *substreams: Any):
        self.seed = int(seed)
        self.stream = int(stream)
        self.substreams = tuple(substreams)
        key = json.dumps([self.seed, self.stream, list(self.substreams)], default=str)
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        self._rng = random.Random(int.from_bytes(digest[:16], "big"))

    def derive(self, *names: Any) -> "RandomSource":
        return RandomSource(self.seed, self.stream, *self.substreams, *names)

    def random(self) -> float:
        return self._rng.random()

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return min(int(self._rng.random() * n), n - 1)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        return lo + self.below(hi - lo + 1)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self._rng.random()

    def choice(self, options: Sequence[T]) -> T:
        if not options:
            raise ValueError("cannot choose from an empty sequence")
        return options[self.below(len(options))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


# --------------------------------------------------------------------------
# Frozen document outline
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TableStyle:
    header_face: str
    header_color: str
    row_face: str
    row_color: str
    separator: str
    separator_color: str
    cell_padding: int


@dataclass(frozen=True)
class Stacked:
    kind: str = "stacked"


@dataclass(frozen=True)
class TableLayout:
    orientation: str
    row_count: int
    empty_row_count: int = 0
    style: TableStyle | None = None
    kind: str = "table"


LayoutMode = Stacked | TableLayout


@dataclass(frozen=True)
class StyleChoice:
    canvas_color: str
    group_header_font: FontSpec
    entity_header_font: FontSpec
    entity_value_font: FontSpec


@dataclass(frozen=True)
class FrozenEntity:
    name: str
    entity_type: str
    header: str | None
    align: str
    header_align: str
    value_font: FontSpec | None = None
    header_font: FontSpec | None = None


@dataclass(frozen=True)
class FrozenGroup:
    name: str
    segment: int
    header: str | None
    layout: LayoutMode
    grid_position: tuple[int, int] | None
    alignment: str
    entities: tuple[FrozenEntity, ...]

    @property
    def is_table(self) -> bool:
        return isinstance(self.layout, TableLayout)


@dataclass(frozen=True)
class DocumentPermutation:
    groups: tuple[FrozenGroup, ...]
    style: StyleChoice
    doc_type: str

    def group(self, name: str) -> FrozenGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)


def permutation_fingerprint(perm: DocumentPermutation) -> str:
    """Hex digest of the canonical serialization of the frozen groups."""
    canonical = json.dumps([asdict(g) for g in perm.groups], sort_keys=True,
                           separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Sampling primitives
# --------------------------------------------------------------------------

def sample_presence(p: float, rng: RandomSource) -> bool:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return rng.random() < p


def sample_from_distribution(dist: Mapping[K, float] | Sequence[tuple[K, float]],
                             rng: RandomSource) -> K:
    """Inverse-CDF draw over the distribution's key order."""
    items = list(dist.items()) if isinstance(dist, Mapping) else list(dist)
    if not items:
        raise ValueError("empty distribution")
    u = rng.random()
    acc = 0.0
    for key, p in items:
        acc += p
        if u < acc:
            return key
    # float round-off: fall back to the last key with positive mass
    for key, p in reversed(items):
        if p > 0:
            return key
    return items[-1][0]


def sample_uniform_choice(options: Sequence[T], rng: RandomSource) -> T:
    if not options:
        raise ValueError("no options to choose from")
    return rng.choice(options)


def _count(value: int | str, bounds: tuple[int, int], rng: RandomSource) -> int:
    if value == RANDOM:
        return rng.randint(*bounds)
    return int(value)


def sample_table_layout(spec: TabulateSpec, bounds: tuple[int, int], rng: RandomSource,
                        empty_bounds: tuple[int, int] = (0, 2)) -> LayoutMode:
    if not sample_presence(spec.create_prob, rng):
        return Stacked()
    orientation = sample_uniform_choice(spec.tab_types, rng)
    rows = _count(spec.rows, bounds, rng)
    empty = _count(spec.num_empty_rows, empty_bounds, rng)
    return TableLayout(orientation, rows, empty)


def apply_shuffle_groups(entities: Sequence[T], shuffle_groups: Sequence[Sequence[str]],
                         rng: RandomSource, key=lambda e: e) -> list[T]:
    """Permute members of each subgroup among the subgroup's own positions.

    ``key`` maps an item to its name; members not present in ``entities``
    are ignored.
    """
    out = list(entities)
    names = [key(e) for e in out]
    seen: set[str] = set()
    for sub in shuffle_groups:
        overlap = seen.intersection(sub)
        if overlap:
            raise ValueError(f"entities {sorted(overlap)} appear in more than one subgroup")
        seen.update(sub)
        idx = [i for i, n in enumerate(names) if n in sub]
        members = [out[i] for i in idx]
        order = list(range(len(idx)))
        rng.shuffle(order)
        for slot, src in zip(idx, order):
            out[slot] = members[src]
    return out


def _sample_font(faces: Sequence[str], common: CommonConfig, rng: RandomSource) -> FontSpec:
    face = sample_uniform_choice(faces, rng)
    color = sample_uniform_choice(common.font_colors, rng)
    size = rng.randint(*common.font_size)
    return FontSpec(face, size, color)


def sample_global_style(common: CommonConfig, rng: RandomSource,
                        book: FontBook | None = None) -> StyleChoice:
    book = book or FontBook.for_common(common)
    canvas = sample_uniform_choice(common.canvas_color_options, rng)
    group_header = _sample_font(book.header_faces, common, rng)
    entity_header = _sample_font(book.header_faces, common, rng)
    value = _sample_font(book.entity_faces, common, rng)
    return StyleChoice(canvas, group_header, entity_header, value)


def sample_table_style(common: CommonConfig, rng: RandomSource, book: FontBook) -> TableStyle:
    t = common.table_config
    return TableStyle(
        header_face=sample_uniform_choice(t.header_font_faces or book.header_faces, rng),
        header_color=sample_uniform_choice(t.header_font_colors, rng),
        row_face=sample_uniform_choice(t.row_font_faces or book.entity_faces, rng),
        row_color=sample_uniform_choice(t.row_font_colors, rng),
        separator=sample_uniform_choice(t.separator_styles, rng),
        separator_color=sample_uniform_choice(t.separator_colors, rng),
        cell_padding=t.cell_padding,
    )


# --------------------------------------------------------------------------
# Freezing
# --------------------------------------------------------------------------

@dataclass
class _Draft:
    definition: EntityGroupDef
    segment: int
    layout: LayoutMode
    header: str | None
    present: list  # EntityDef


def _fallback_header(name: str) -> str:
    return name.replace("_", " ").strip().title()


def _freeze_once(schema: StochasticSchema, rng: RandomSource, book: FontBook) -> DocumentPermutation:
    common = schema.common
    s = common.structural
    drafts: list[_Draft] = []

    for g in schema.entity_groups:
        if not sample_presence(g.presence_probability, rng):
            continue
        segment = sample_from_distribution(normalize_segment_dist(g.segment_dist), rng)
        layout = sample_table_layout(g.tabulate, (s.min_rows, s.max_rows), rng,
                                     (s.min_empty_rows, s.max_empty_rows))
        header = None
        if sample_presence(g.header_probability, rng) and g.headers:
            header = sample_uniform_choice(g.headers, rng)
        present = [e for e in g.entities if sample_presence(e.presence_probability, rng)]
        if present:
            drafts.append(_Draft(g, segment, layout, header, present))

    headers_on = sample_presence(common.show_entity_headers_probability, rng)

    groups: list[FrozenGroup] = []
    for d in drafts:
        g = d.definition
        tabular = isinstance(d.layout, TableLayout)
        entities = []
        for e in d.present:
            header = None
            # tables always carry column/row headers
            if headers_on or e.add_header or tabular:
                header = (sample_uniform_choice(e.headers, rng) if e.headers
                          else _fallback_header(e.name))
            align = sample_uniform_choice(e.align, rng)
            header_align = sample_uniform_choice(e.header_align, rng)
            entities.append(FrozenEntity(e.name, e.entity_type, header, align, header_align))
        alignment = sample_uniform_choice(g.group_alignment, rng)
        entities = apply_shuffle_groups(entities, g.entity_shuffle_groups, rng,
                                        key=lambda fe: fe.name)
        groups.append(FrozenGroup(g.name, d.segment, d.header, d.layout, g.grid_position,
                                  alignment, tuple(entities)))

    style = sample_global_style(common, rng, book)
    resolved = []
    for fg in groups:
        layout = fg.layout
        if isinstance(layout, TableLayout):
            layout = replace(layout, style=sample_table_style(common, rng, book))
        definition = schema.group(fg.name)
        ents = tuple(replace(fe,
                             value_font=_apply_variance(style.entity_value_font,
                                                        definition.entity(fe.name).font_variance),
                             header_font=style.entity_header_font)
                     for fe in fg.entities)
        resolved.append(replace(fg, layout=layout, entities=ents))
    return DocumentPermutation(tuple(resolved), style, schema.doc_type_name)


def _apply_variance(base: FontSpec, variance) -> FontSpec:
    if variance is None:
        return base
    return FontSpec(variance.face or base.face, variance.size or base.size,
                    variance.color or base.color)


def freeze_permutation(schema: StochasticSchema, rng: RandomSource, *,
                       check: bool = True) -> DocumentPermutation:
    """Sample every stochastic attribute of ``schema``.

    Draw order is fixed: group presence, segment, tabulation, group header,
    entity presence (per group); the document-wide entity-header switch;
    entity headers and alignments, group alignment and subgroup shuffles
    (per group); then the global style and per-table styles.  Documents
    with no groups are redrawn from the same stream up to
    ``MAX_EMPTY_RETRIES`` times.
    """
    if check:
        report = validate_schema(schema)
        if not report.ok:
            raise SamplingError("invalid schema: " + "; ".join(report.errors))
    book = FontBook.for_common(schema.common)
    for _ in range(MAX_EMPTY_RETRIES):
        perm = _freeze_once(schema, rng, book)
        if perm.groups:
            return perm
    raise EmptyDocumentError(f"no entity group was sampled in {MAX_EMPTY_RETRIES} attempts")


def expected_group_rate(g: EntityGroupDef) -> float:
    """Probability that a group survives freezing (present with >= 1 entity)."""
    p_none = math.prod(1.0 - e.presence_probability for e in g.entities)
    return g.presence_probability * (1.0 - p_none)
