"""Rasterize a planned document and record word-level boxes.

Boxes come from the same glyph metrics the layout used, never from pixel
scanning, so a token box is exactly where the engine placed the word.
"""
from __future__ import annotations

from dataclasses import dataclass

from PIL import Image, ImageDraw

from docsynth.layout import LayoutPlan, Rect
from docsynth.text import PillowMetrics, layout_tokens, measure_text, tokenize_words

__all__ = [
    "RenderedToken", "RenderedEntity", "render_document", "draw_debug_overlay",
    "tokenize_words", "measure_text",
]

ROLES = ("value", "entity_header", "group_header")
DEBUG_COLOR = (255, 0, 0)


@dataclass(frozen=True)
class RenderedToken:
    text: str
    box: Rect


@dataclass(frozen=True)
class RenderedEntity:
    label: str
    text: str
    box: Rect
    tokens: tuple[RenderedToken, ...]
    role: str
    group: str

    @property
    def lines(self) -> list[str]:
        return self.text.split("\n")


def _union(boxes: list[Rect]) -> Rect:
    x0 = min(b.x for b in boxes)
    y0 = min(b.y for b in boxes)
    x1 = max(b.right for b in boxes)
    y1 = max(b.bottom for b in boxes)
    return Rect(x0, y0, x1 - x0, y1 - y0)


def render_document(instance, plan: LayoutPlan, metrics: PillowMetrics, *,
                    debug_overlay: bool = False) -> tuple[Image.Image, list[RenderedEntity]]:
    """Draw every planned group onto a fresh canvas.

    Returns the RGB image and one :class:`RenderedEntity` per visible value
    or header, in drawing order.  Empty table cells produce no entity.
    """
    style = instance.permutation.style
    image = Image.new("RGB", plan.canvas_size, style.canvas_color)
    draw = ImageDraw.Draw(image)

    pending: dict[tuple, list] = {}
    for group in instance.groups:
        rect = plan.rects[group.name]
        measured = plan.measured[group.name]
        for rule in measured.rules:
            draw.line([(rect.x + rule.x0, rect.y + rule.y0), (rect.x + rule.x1, rect.y + rule.y1)],
                      fill=rule.color, width=1)
        for run in measured.runs:
            x0, y0 = rect.x + run.x, rect.y + run.y
            font = metrics.font(run.font)
            tokens = []
            for tb in layout_tokens(run.text, run.font, metrics):
                draw.text((x0 + tb.pen_x, y0), tb.text, font=font, fill=run.font.color, anchor="la")
                tokens.append(RenderedToken(tb.text, Rect(x0 + tb.x, y0, tb.width, run.height)))
            entry = pending.setdefault(run.key, [run.label, run.role, group.name, [], []])
            entry[3].append(run.text)
            entry[4].extend(tokens)

    entities = []
    for label, role, gname, lines, tokens in pending.values():
        if not tokens:
            continue
        entities.append(RenderedEntity(label, "\n".join(lines), _union([t.box for t in tokens]),
                                       tuple(tokens), role, gname))
    if debug_overlay:
        image = draw_debug_overlay(image, entities)
    return image, entities


def draw_debug_overlay(image: Image.Image, entities: list[RenderedEntity]) -> Image.Image:
    """Copy of ``image`` with entity and token boxes outlined in red."""
    out = image.copy()
    draw = ImageDraw.Draw(out)
    for ent in entities:
        b = ent.box
        draw.rectangle([b.x, b.y, b.right - 1, b.bottom - 1], outline=DEBUG_COLOR, width=2)
        for tok in ent.tokens:
            t = tok.box
            draw.rectangle([t.x, t.y, t.right - 1, t.bottom - 1], outline=DEBUG_COLOR, width=1)
    return out
