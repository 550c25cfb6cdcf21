"""Annotation export: entity JSON, word-level IOB records and KIE targets."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from docsynth.layout import Rect

OTHER = "Other"


class AnnotationFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    box: Rect
    text: str
    children: tuple[tuple[Rect, str], ...]
    label: str

    def to_json(self) -> dict:
        # key order is part of the format
        return {
            "entity": [[self.box.x, self.box.y], [self.box.w, self.box.h], self.text],
            "children": [[[b.x, b.y], [b.w, b.h], t] for b, t in self.children],
            "class": self.label,
        }

    @classmethod
    def from_json(cls, obj) -> "Annotation":
        try:
            (x, y), (w, h), text = obj["entity"]
            children = tuple((Rect(int(cx), int(cy), int(cw), int(ch)), str(ct))
                             for (cx, cy), (cw, ch), ct in obj["children"])
            return cls(Rect(int(x), int(y), int(w), int(h)), str(text), children, str(obj["class"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise AnnotationFormatError(f"malformed annotation record: {exc}") from exc


@dataclass(frozen=True)
class IOBToken:
    text: str
    box: Rect
    tag: str


def build_annotations(rendered: Iterable, expected_keys: Sequence[str]) -> list[Annotation]:
    """One annotation per rendered entity.

    Values keep their entity name as class when it is an expected key;
    headers and unexpected names become ``Other``.
    """
    keys = set(expected_keys)
    out = []
    for ent in rendered:
        label = ent.label if ent.role == "value" and ent.label in keys else OTHER
        out.append(Annotation(ent.box, ent.text,
                              tuple((t.box, t.text) for t in ent.tokens), label))
    return out


def export_annotation_json(annotations: Iterable[Annotation]) -> str:
    """JSON array with one record per line."""
    rows = [json.dumps(a.to_json(), ensure_ascii=False) for a in annotations]
    if not rows:
        return "[]\n"
    return "[\n" + ",\n".join(rows) + "\n]\n"


def parse_annotation_json(text: str) -> list[Annotation]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationFormatError(f"annotation file is not JSON: {exc}") from exc
    if not isinstance(data, list):
        raise AnnotationFormatError("annotation file must hold a JSON array")
    return [Annotation.from_json(obj) for obj in data]


def _same_line(a: Rect, b_top: int, b_bottom: int) -> bool:
    overlap = min(a.bottom, b_bottom) - max(a.y, b_top)
    return overlap > 0.5 * min(a.h, b_bottom - b_top)


def reading_order(boxes: Sequence[Rect]) -> list[int]:
    """Indices of ``boxes`` in reading order.

    Boxes are clustered into lines by vertical overlap (more than half the
    smaller height), lines run top to bottom and boxes left to right.
    """
    order = sorted(range(len(boxes)), key=lambda i: (boxes[i].y, boxes[i].x))
    lines: list[tuple[int, int, list[int]]] = []
    for i in order:
        b = boxes[i]
        if lines and _same_line(b, lines[-1][0], lines[-1][1]):
            top, bottom, members = lines[-1]
            members.append(i)
            lines[-1] = (min(top, b.y), max(bottom, b.bottom), members)
        else:
            lines.append((b.y, b.bottom, [i]))
    out = []
    for _, _, members in lines:
        out.extend(sorted(members, key=lambda i: (boxes[i].x, boxes[i].y)))
    return out


def _entity_anchor(a: Annotation) -> Rect:
    return a.children[0][0] if a.children else a.box


def order_annotations(annotations: Sequence[Annotation]) -> list[Annotation]:
    """Annotations sorted by the reading position of their first token."""
    idx = reading_order([_entity_anchor(a) for a in annotations])
    return [annotations[i] for i in idx]


def export_iob(annotations: Sequence[Annotation]) -> list[IOBToken]:
    """Word-level IOB records.

    Entities are visited in reading order and each contributes its tokens
    contiguously, so every chunk starts with ``B-`` and ``I-`` never follows
    a different class.
    """
    out = []
    for ann in order_annotations(annotations):
        child_idx = reading_order([b for b, _ in ann.children])
        for n, i in enumerate(child_idx):
            box, text = ann.children[i]
            if ann.label == OTHER:
                tag = "O"
            else:
                tag = ("B-" if n == 0 else "I-") + ann.label
            out.append(IOBToken(text, box, tag))
    return out


def format_iob_tsv(tokens: Iterable[IOBToken]) -> str:
    rows = [f"{t.text}\t{t.box.x}\t{t.box.y}\t{t.box.w}\t{t.box.h}\t{t.tag}" for t in tokens]
    return "\n".join(rows) + ("\n" if rows else "")


def parse_iob_tsv(text: str) -> list[IOBToken]:
    out = []
    for line in text.splitlines():
        if not line:
            continue
        word, x, y, w, h, tag = line.split("\t")
        out.append(IOBToken(word, Rect(int(x), int(y), int(w), int(h)), tag))
    return out


def iob_chunks(tokens: Iterable[IOBToken]) -> dict[str, list[str]]:
    """Per-class chunk texts rebuilt from IOB tags, in token order."""
    chunks: dict[str, list[str]] = {}
    current: list[str] | None = None
    for t in tokens:
        if t.tag.startswith("B-"):
            current = chunks.setdefault(t.tag[2:], [])
            current.append(t.text)
        elif t.tag.startswith("I-"):
            if current is None:
                raise AnnotationFormatError(f"I- tag without a preceding chunk at {t.text!r}")
            current[-1] += " " + t.text
        else:
            current = None
    return chunks


def _flat(text: str) -> str:
    return " ".join(text.split())


def export_kie_json(annotations: Sequence[Annotation], expected_keys: Sequence[str]) -> dict[str, str]:
    """Key to value map over ``expected_keys``; repeated keys joined with ``|``."""
    values: dict[str, list[str]] = {k: [] for k in expected_keys}
    for ann in order_annotations(annotations):
        if ann.label in values:
            values[ann.label].append(_flat(ann.text))
    return {k: "|".join(v) for k, v in values.items()}


def format_kie_json(target: dict[str, str]) -> str:
    return json.dumps(target, indent=2, ensure_ascii=False) + "\n"
