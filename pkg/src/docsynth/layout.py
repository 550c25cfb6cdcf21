"""Dynamic virtual grid layout.

The page is split into ``num_segments`` horizontal bands of equal height.
Each band holds a virtual grid of ``segment_size`` cells; groups sampled
into a band are assigned to cells (pinned groups first, the rest in
row-major order) and the grid's rows and columns are then sized to their
content.  Empty rows and columns collapse to zero.  A band that cannot hold
its groups first retries with smaller fonts, then moves its last unpinned
group to the next band with a free cell; when that fails the document is
rejected with :class:`LayoutError` and regenerated upstream.

A random baseline places whole groups at random non-overlapping positions
on the canvas instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from docsynth.sampling import RandomSource, StyleChoice, TableLayout
from docsynth.schema import StructuralConfig
from docsynth.text import FontSpec, TextMetrics, measure_text, tokenize_words

GRID = "grid"
RANDOM_BASELINE = "random"
LAYOUT_MODES = (GRID, RANDOM_BASELINE)
BASELINE_ATTEMPTS = 1000
FONT_SHRINK_STEP = 2


class LayoutError(Exception):
    """The document cannot be laid out; regenerate it."""


class GridOverflowError(LayoutError):
    def __init__(self, section: int, unplaced: Sequence[str]):
        super().__init__(f"section {section}: no free cell for {list(unplaced)}")
        self.section = section
        self.unplaced = tuple(unplaced)


class SectionOverflowError(LayoutError):
    pass


class PinConflictError(LayoutError):
    pass


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    def intersection_area(self, other: "Rect") -> int:
        dx = min(self.right, other.right) - max(self.x, other.x)
        dy = min(self.bottom, other.bottom) - max(self.y, other.y)
        return dx * dy if dx > 0 and dy > 0 else 0

    def contains(self, other: "Rect") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and other.right <= self.right and other.bottom <= self.bottom)

    def expanded(self, pad: int) -> "Rect":
        return Rect(self.x - pad, self.y - pad, self.w + 2 * pad, self.h + 2 * pad)

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True)
class TextRun:
    """One line of text at a position relative to the group origin."""

    x: int
    y: int
    text: str
    font: FontSpec
    width: int
    height: int
    role: str
    label: str
    key: tuple


@dataclass(frozen=True)
class Rule:
    x0: int
    y0: int
    x1: int
    y1: int
    color: str


@dataclass(frozen=True)
class MeasuredGroup:
    name: str
    width: int
    height: int
    runs: tuple[TextRun, ...] = ()
    rules: tuple[Rule, ...] = ()
    segment: int = 0
    grid_position: tuple[int, int] | None = None
    alignment: str = "left"


# --------------------------------------------------------------------------
# Measurement
# --------------------------------------------------------------------------

def _align_offset(align: str, space: int, used: int) -> int:
    if align == "right":
        return space - used
    if align == "center":
        return (space - used) // 2
    return 0


def _lines(text: str) -> list[str]:
    return [" ".join(words) for words in tokenize_words(text)]


class _Sizer:
    def __init__(self, metrics: TextMetrics, font_delta: int, min_size: int):
        self.metrics = metrics
        self.font_delta = font_delta
        self.min_size = min_size

    def font(self, font: FontSpec) -> FontSpec:
        if self.font_delta <= 0 or font.size <= self.min_size:
            return font
        return font.resized(max(self.min_size, font.size - self.font_delta))

    def measure(self, line: str, font: FontSpec) -> tuple[FontSpec, int, int]:
        font = self.metrics.covering(line, font)
        w, h = measure_text(line, font, self.metrics)
        return font, w, h


def _measure_stacked(group, style: StyleChoice, sz: _Sizer, s: StructuralConfig):
    gname = group.name
    blocks: list[tuple[int, int, list[TextRun]]] = []
    if group.header_text:
        font, w, h = sz.measure(group.header_text, sz.font(style.group_header_font))
        blocks.append((w, h, [TextRun(0, 0, group.header_text, font, w, h, "group_header",
                                      gname, (gname, gname, "group_header", 0))]))
    for ent in group.entities:
        runs = []
        x = 0
        height = 0
        if ent.header_text:
            font, w, h = sz.measure(ent.header_text, sz.font(ent.frozen.header_font))
            runs.append(TextRun(0, 0, ent.header_text, font, w, h, "entity_header", ent.name,
                                (gname, ent.name, "entity_header", 0)))
            x = w + s.intra_group_x_offset
            height = h
        y = 0
        width = x
        for line in _lines(ent.values[0]):
            font, w, h = sz.measure(line, sz.font(ent.frozen.value_font))
            runs.append(TextRun(x, y, line, font, w, h, "value", ent.name,
                                (gname, ent.name, "value", 0)))
            y += h
            width = max(width, x + w)
        blocks.append((width, max(height, y), runs))
    return blocks, ()


def _measure_table(group, style: StyleChoice, sz: _Sizer, s: StructuralConfig):
    layout: TableLayout = group.frozen.layout
    ts = layout.style
    pad = ts.cell_padding
    gname = group.name
    horizontal = layout.orientation == "horizontal"
    n_data = layout.row_count
    n_lines = n_data + layout.empty_row_count

    # cells[i][j]: i = entity index, j = 0 header, 1..n data, n+1.. empty
    cells: list[list[tuple[list, str] | None]] = []
    blank_h = 0
    for ent in group.entities:
        hfont = FontSpec(ts.header_face, ent.frozen.header_font.size, ts.header_color)
        rfont = FontSpec(ts.row_face, ent.frozen.value_font.size, ts.row_color)
        hfont, rfont = sz.font(hfont), sz.font(rfont)
        blank_h = max(blank_h, sz.metrics.line_height(rfont))
        row = []
        header = ent.header_text or ""
        items = []
        for line in _lines(header):
            items.append((line, *sz.measure(line, hfont)))
        row.append((items, ent.frozen.header_align, "entity_header", 0))
        for k in range(n_data):
            items = [(line, *sz.measure(line, rfont)) for line in _lines(ent.values[k])]
            row.append((items, ent.frozen.align, "value", k))
        row.extend([None] * layout.empty_row_count)
        cells.append(row)

    def content(cell):
        if cell is None:
            return 0, blank_h
        items = cell[0]
        return max((it[2] for it in items), default=0), sum(it[3] for it in items) or blank_h

    n_ent = len(cells)
    n_pos = 1 + n_lines
    # grid coordinates: (table_row, table_col)
    if horizontal:
        n_rows, n_cols = n_pos, n_ent
        at = lambda r, c: cells[c][r]  # noqa: E731
    else:
        n_rows, n_cols = n_ent, n_pos
        at = lambda r, c: cells[r][c]  # noqa: E731
    blank_w = 3 * blank_h
    col_w = []
    for c in range(n_cols):
        widths = [content(at(r, c))[0] if at(r, c) is not None else 0 for r in range(n_rows)]
        w = max(widths)
        if w == 0:
            w = blank_w
        col_w.append(w + 2 * pad)
    row_h = [max(content(at(r, c))[1] for c in range(n_cols)) + 2 * pad for r in range(n_rows)]
    xs = [0]
    for w in col_w:
        xs.append(xs[-1] + w)
    ys = [0]
    for h in row_h:
        ys.append(ys[-1] + h)

    runs = []
    for r in range(n_rows):
        for c in range(n_cols):
            cell = at(r, c)
            if cell is None:
                continue
            items, align, role, k = cell
            ent = group.entities[c if horizontal else r]
            inner = col_w[c] - 2 * pad
            y = ys[r] + pad
            for line, font, w, h in items:
                x = xs[c] + pad + _align_offset(align, inner, w)
                runs.append(TextRun(x, y, line, font, w, h, role, ent.name,
                                    (gname, ent.name, role, k)))
                y += h

    tw, th = xs[-1], ys[-1]
    rules = []
    color = ts.separator_color
    if ts.separator in ("grid", "horizontal"):
        for y in ys:
            yy = min(y, th - 1)
            rules.append(Rule(0, yy, tw - 1, yy, color))
    if ts.separator == "grid":
        for x in xs:
            xx = min(x, tw - 1)
            rules.append(Rule(xx, 0, xx, th - 1, color))
    if ts.separator == "header":
        if horizontal:
            rules.append(Rule(0, ys[1] - 1, tw - 1, ys[1] - 1, color))
        else:
            rules.append(Rule(xs[1] - 1, 0, xs[1] - 1, th - 1, color))
    return (tw, th, runs), tuple(rules)


def measure_group(group, style: StyleChoice, metrics: TextMetrics, structural: StructuralConfig,
                  font_delta: int = 0, min_font_size: int = 1) -> MeasuredGroup:
    """Lay out a group's text relative to its own origin and return its extent.

    ``group`` is a :class:`~docsynth.values.instance.GroupInstance`.
    """
    sz = _Sizer(metrics, font_delta, min_font_size)
    s = structural
    frozen = group.frozen
    rules: tuple[Rule, ...] = ()
    if isinstance(frozen.layout, TableLayout):
        header_blocks = []
        if group.header_text:
            font, w, h = sz.measure(group.header_text, sz.font(style.group_header_font))
            header_blocks.append((w, h, [TextRun(0, 0, group.header_text, font, w, h,
                                                 "group_header", group.name,
                                                 (group.name, group.name, "group_header", 0))]))
        table, rules = _measure_table(group, style, sz, s)
        blocks = header_blocks + [table]
    else:
        blocks, rules = _measure_stacked(group, style, sz, s)

    width = max(b[0] for b in blocks)
    runs: list[TextRun] = []
    y = 0
    table_dx = table_dy = 0
    for i, (bw, bh, block_runs) in enumerate(blocks):
        if i:
            y += s.intra_group_y_offset
        dx = _align_offset(frozen.alignment, width, bw)
        for r in block_runs:
            runs.append(TextRun(r.x + dx, r.y + y, r.text, r.font, r.width, r.height, r.role,
                                r.label, r.key))
        table_dx, table_dy = dx, y
        y += bh
    if rules:
        rules = tuple(Rule(r.x0 + table_dx, r.y0 + table_dy, r.x1 + table_dx, r.y1 + table_dy,
                           r.color) for r in rules)
    return MeasuredGroup(group.name, width, y, tuple(runs), rules, frozen.segment,
                         frozen.grid_position, frozen.alignment)


# --------------------------------------------------------------------------
# Virtual grid
# --------------------------------------------------------------------------

@dataclass
class VirtualGrid:
    section: int
    rows: int
    cols: int
    cells: dict[tuple[int, int], str] = field(default_factory=dict)
    row_heights: list[int] = field(default_factory=list)
    col_widths: list[int] = field(default_factory=list)
    row_gap: int = 0
    col_gap: int = 0

    def cell_of(self, name: str) -> tuple[int, int]:
        for cell, n in self.cells.items():
            if n == name:
                return cell
        raise KeyError(name)

    def extent(self) -> tuple[int, int]:
        used_cols = sum(1 for w in self.col_widths if w > 0)
        used_rows = sum(1 for h in self.row_heights if h > 0)
        return (sum(self.col_widths) + self.col_gap * max(0, used_cols - 1),
                sum(self.row_heights) + self.row_gap * max(0, used_rows - 1))


def assign_cells(groups: Sequence[MeasuredGroup], shape: tuple[int, int],
                 pinned: Mapping[str, tuple[int, int]] | None = None,
                 section: int = 0) -> VirtualGrid:
    """Put pinned groups in their cells, then fill free cells row-major."""
    rows, cols = shape
    if pinned is None:
        pinned = {g.name: g.grid_position for g in groups if g.grid_position is not None}
    grid = VirtualGrid(section, rows, cols)
    for g in groups:
        cell = pinned.get(g.name)
        if cell is None:
            continue
        if not (0 <= cell[0] < rows and 0 <= cell[1] < cols):
            raise PinConflictError(f"group {g.name!r} pinned outside the {rows}x{cols} grid")
        if cell in grid.cells:
            raise PinConflictError(f"groups {grid.cells[cell]!r} and {g.name!r} are both "
                                   f"pinned to {cell}")
        grid.cells[cell] = g.name
    free = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in grid.cells]
    unpinned = [g.name for g in groups if g.name not in pinned]
    for name, cell in zip(unpinned, free):
        grid.cells[cell] = name
    if len(unpinned) > len(free):
        raise GridOverflowError(section, unpinned[len(free):])
    return grid


def section_rect(section: int, structural: StructuralConfig) -> Rect:
    """Usable area of a section band (band minus page margin and padding)."""
    s = structural
    band = s.section_height
    top = section * band + s.section_padding
    return Rect(s.margin, top, s.canvas_width - 2 * s.margin, band - 2 * s.section_padding)


def column_gap(structural: StructuralConfig) -> int:
    return int(round(structural.space_width_weight * structural.intra_group_x_offset))


def size_grid(grid: VirtualGrid, measured: Mapping[str, MeasuredGroup], section: Rect,
              structural: StructuralConfig) -> VirtualGrid:
    """Size rows and columns to the largest group they hold.

    Gaps between non-empty rows (``inter_group_y_offset``) and columns shrink
    proportionally when the band is too small; content that still does not
    fit raises :class:`SectionOverflowError`.
    """
    heights = [0] * grid.rows
    widths = [0] * grid.cols
    for (r, c), name in grid.cells.items():
        g = measured[name]
        heights[r] = max(heights[r], g.height)
        widths[c] = max(widths[c], g.width)

    def gap(content: int, count: int, wanted: int, space: int, what: str) -> int:
        if content > space:
            raise SectionOverflowError(f"section {grid.section}: {what} content {content}px "
                                       f"exceeds {space}px")
        if count <= 1:
            return wanted
        return min(wanted, (space - content) // (count - 1))

    used_rows = sum(1 for h in heights if h > 0)
    used_cols = sum(1 for w in widths if w > 0)
    row_gap = gap(sum(heights), used_rows, structural.inter_group_y_offset, section.h, "row")
    col_gap = gap(sum(widths), used_cols, column_gap(structural), section.w, "column")
    return VirtualGrid(grid.section, grid.rows, grid.cols, dict(grid.cells), heights, widths,
                       row_gap, col_gap)


def grid_rects(grid: VirtualGrid, measured: Mapping[str, MeasuredGroup],
               section: Rect) -> dict[str, Rect]:
    """Concrete group rectangles for a sized grid.

    Horizontal slack is shared equally by the non-empty columns; groups are
    aligned inside their cell and sit at the top of their row.
    """
    used_cols = [c for c in range(grid.cols) if grid.col_widths[c] > 0]
    used_rows = [r for r in range(grid.rows) if grid.row_heights[r] > 0]
    content_w, _ = grid.extent()
    slack = section.w - content_w
    share, rest = divmod(slack, len(used_cols)) if used_cols else (0, 0)
    col_x: dict[int, tuple[int, int]] = {}
    x = section.x
    for i, c in enumerate(used_cols):
        w = grid.col_widths[c] + share + (rest if i == len(used_cols) - 1 else 0)
        col_x[c] = (x, w)
        x += w + grid.col_gap
    row_y: dict[int, int] = {}
    y = section.y
    for r in used_rows:
        row_y[r] = y
        y += grid.row_heights[r] + grid.row_gap
    rects = {}
    for (r, c), name in grid.cells.items():
        g = measured[name]
        cx, cw = col_x[c]
        rects[name] = Rect(cx + _align_offset(g.alignment, cw, g.width), row_y[r], g.width, g.height)
    return rects


# --------------------------------------------------------------------------
# Planning
# --------------------------------------------------------------------------

@dataclass
class LayoutPlan:
    mode: str
    rects: dict[str, Rect]
    grids: dict[int, VirtualGrid]
    measured: dict[str, MeasuredGroup]
    placed_section: dict[str, int]
    canvas_size: tuple[int, int]
    font_delta: int = 0
    respilled: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        """Structured dump for debugging and geometry checks."""
        return {
            "mode": self.mode,
            "canvas": list(self.canvas_size),
            "font_delta": self.font_delta,
            "respilled": list(self.respilled),
            "sections": [
                {"section": sid, "rows": g.rows, "cols": g.cols,
                 "cells": [{"cell": list(cell), "group": name} for cell, name in sorted(g.cells.items())],
                 "row_heights": g.row_heights, "col_widths": g.col_widths,
                 "row_gap": g.row_gap, "col_gap": g.col_gap}
                for sid, g in sorted(self.grids.items())
            ],
            "groups": [
                {"group": name, "rect": rect.as_list(),
                 "sampled_section": self.measured[name].segment,
                 "placed_section": self.placed_section.get(name)}
                for name, rect in self.rects.items()
            ],
        }


def _place_grid(measured: list[MeasuredGroup], s: StructuralConfig):
    by_name = {g.name: g for g in measured}
    sections: dict[int, list[str]] = {i: [] for i in range(s.num_segments)}
    for g in measured:
        sections[g.segment].append(g.name)
    visited = {g.name: {g.segment} for g in measured}
    capacity = s.segment_size[0] * s.segment_size[1]
    respilled: list[str] = []

    for _ in range(len(measured) * s.num_segments + 1):
        grids: dict[int, VirtualGrid] = {}
        failure = None
        for sid in range(s.num_segments):
            names = sections[sid]
            if not names:
                continue
            rect = section_rect(sid, s)
            try:
                grid = assign_cells([by_name[n] for n in names], s.segment_size, section=sid)
                grids[sid] = size_grid(grid, by_name, rect, s)
            except (GridOverflowError, SectionOverflowError) as exc:
                failure = (sid, exc)
                break
        if failure is None:
            rects: dict[str, Rect] = {}
            placed = {}
            for sid, grid in grids.items():
                rects.update(grid_rects(grid, by_name, section_rect(sid, s)))
                for name in grid.cells.values():
                    placed[name] = sid
            return grids, rects, placed, tuple(respilled)

        sid, exc = failure
        movable = [n for n in sections[sid] if by_name[n].grid_position is None]
        if not movable:
            raise LayoutError(f"section {sid} overflows and holds only pinned groups") from exc
        victim = movable[-1]
        target = None
        for step in range(1, s.num_segments):
            t = (sid + step) % s.num_segments
            if t not in visited[victim] and len(sections[t]) < capacity:
                target = t
                break
        if target is None:
            raise LayoutError(f"no section can take group {victim!r}") from exc
        sections[sid].remove(victim)
        sections[target].append(victim)
        visited[victim].add(target)
        respilled.append(victim)
    raise LayoutError("respill did not converge")


def _place_random(measured: list[MeasuredGroup], s: StructuralConfig, rng: RandomSource):
    rects: dict[str, Rect] = {}
    for g in measured:
        x_hi = s.canvas_width - s.margin - g.width
        y_hi = s.canvas_height - s.section_padding - g.height
        if x_hi < s.margin or y_hi < s.section_padding:
            raise LayoutError(f"group {g.name!r} does not fit on the canvas")
        for _ in range(BASELINE_ATTEMPTS):
            cand = Rect(rng.randint(s.margin, x_hi), rng.randint(s.section_padding, y_hi),
                        g.width, g.height)
            probe = cand.expanded(s.intra_group_y_offset)
            if all(probe.intersection_area(r) == 0 for r in rects.values()):
                rects[g.name] = cand
                break
        else:
            raise LayoutError(f"no free position for group {g.name!r} after "
                              f"{BASELINE_ATTEMPTS} attempts")
    return rects


def plan_layout(instance, structural: StructuralConfig, metrics: TextMetrics, *,
                mode: str = GRID, rng: RandomSource | None = None,
                font_size_bounds: tuple[int, int] = (1, 1000),
                shrink_step: int = FONT_SHRINK_STEP) -> LayoutPlan:
    """Measure every group of ``instance`` and give each a canvas rectangle."""
    if mode not in LAYOUT_MODES:
        raise ValueError(f"unknown layout mode {mode!r}")
    if mode == RANDOM_BASELINE and rng is None:
        raise ValueError("the random baseline needs a RandomSource")
    style = instance.permutation.style
    canvas = (structural.canvas_width, structural.canvas_height)
    last_error: LayoutError | None = None
    for delta in (0, shrink_step):
        measured = [measure_group(g, style, metrics, structural, delta, font_size_bounds[0])
                    for g in instance.groups]
        try:
            if mode == GRID:
                grids, rects, placed, respilled = _place_grid(measured, structural)
                return LayoutPlan(mode, rects, grids, {m.name: m for m in measured}, placed,
                                  canvas, delta, respilled)
            rects = _place_random(measured, structural, rng.derive("baseline", delta))
            return LayoutPlan(mode, rects, {}, {m.name: m for m in measured}, {}, canvas, delta)
        except LayoutError as exc:
            last_error = exc
    raise last_error
