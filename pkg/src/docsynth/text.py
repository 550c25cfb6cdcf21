"""Fonts, glyph metrics and word-level text geometry.

Measurement and rendering share :func:`layout_tokens`, so the boxes the
layout engine reserves are exactly the boxes the renderer records.  Token
boxes are derived from advance widths and FreeType ink extents, never from
scanning pixels.
"""
from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Protocol

from PIL import ImageFont

logger = logging.getLogger(__name__)

FONT_DIR_ENV = "DOCSYNTH_FONT_DIR"
FALLBACK_FACE = "DejaVuSans"
_FONT_SUFFIXES = (".ttf", ".otf")
TOKEN_CACHE_LIMIT = 20000


def bundled_font_dir() -> Path:
    return Path(str(resources.files("docsynth") / "data" / "fonts"))


@dataclass(frozen=True)
class FontSpec:
    face: str
    size: int
    color: str

    def resized(self, size: int) -> "FontSpec":
        return FontSpec(self.face, size, self.color)


def list_font_faces(font_dir: str | os.PathLike) -> tuple[str, ...]:
    """Face names (file stems) of every font file in ``font_dir``, sorted."""
    path = Path(font_dir)
    if not path.is_dir():
        raise FileNotFoundError(f"font directory {str(path)!r} does not exist")
    faces = sorted(p.stem for p in path.iterdir() if p.suffix.lower() in _FONT_SUFFIXES)
    if not faces:
        raise ValueError(f"font directory {str(path)!r} contains no fonts")
    return tuple(faces)


class FontBook:
    """Resolves face names to font files for one schema's font directories."""

    def __init__(self, entity_dir: str | os.PathLike, header_dir: str | os.PathLike | None = None):
        self.entity_dir = Path(entity_dir)
        self.header_dir = Path(header_dir) if header_dir else self.entity_dir
        self.entity_faces = list_font_faces(self.entity_dir)
        self.header_faces = list_font_faces(self.header_dir)
        self._paths: dict[str, str] = {}
        for d in (bundled_font_dir(), self.header_dir, self.entity_dir):
            for p in sorted(d.iterdir()):
                if p.suffix.lower() in _FONT_SUFFIXES:
                    self._paths[p.stem] = str(p)

    @classmethod
    def for_common(cls, common) -> "FontBook":
        return _font_book(common.font_dir, common.header_font_dir,
                          os.environ.get(FONT_DIR_ENV, ""))

    def path(self, face: str) -> str:
        try:
            return self._paths[face]
        except KeyError:
            raise FileNotFoundError(f"font face {face!r} not found") from None


@lru_cache(maxsize=16)
def _font_book(font_dir: str, header_dir: str, env_override: str) -> FontBook:
    entity_dir = env_override or font_dir or str(bundled_font_dir())
    return FontBook(entity_dir, env_override or header_dir or None)


def tokenize_words(value: str) -> list[list[str]]:
    """Split a value into lines of whitespace-free words.

    >>> tokenize_words("SecureTrust Insurance")
    [['SecureTrust', 'Insurance']]
    """
    lines = []
    for line in value.split("\n"):
        words = line.split()
        if words:
            lines.append(words)
    return lines


class TextMetrics(Protocol):
    def line_height(self, font: FontSpec) -> int: ...

    def advance(self, text: str, font: FontSpec) -> float: ...

    def ink(self, text: str, font: FontSpec) -> tuple[int, int]:
        """Horizontal ink extent (left, right) relative to the pen origin."""
        ...

    def covering(self, text: str, font: FontSpec) -> FontSpec:
        """``font`` or a fallback face that has glyphs for every char of ``text``."""
        ...


class StubMetrics:
    """Fixed-size glyph metrics, handy for arithmetic checks."""

    def __init__(self, glyph_width: int = 10, glyph_height: int = 20):
        self.glyph_width = glyph_width
        self.glyph_height = glyph_height

    def line_height(self, font):
        return self.glyph_height

    def advance(self, text, font):
        return float(len(text) * self.glyph_width)

    def ink(self, text, font):
        return 0, len(text) * self.glyph_width

    def covering(self, text, font):
        return font


@lru_cache(maxsize=256)
def _truetype(path: str, size: int) -> ImageFont.FreeTypeFont:
    # BASIC layout keeps output identical with or without libraqm
    return ImageFont.truetype(path, size, layout_engine=ImageFont.Layout.BASIC)


@lru_cache(maxsize=64)
def _cmap(path: str) -> frozenset[int]:
    from fontTools.ttLib import TTFont
    with TTFont(path, lazy=True) as tt:
        return frozenset(tt.getBestCmap() or ())


class PillowMetrics:
    """Metrics from FreeType via Pillow, resolved through a :class:`FontBook`."""

    def __init__(self, book: FontBook, fallback_face: str = FALLBACK_FACE):
        self.book = book
        self.fallback_face = fallback_face
        # layout_tokens results; measurement and rendering ask for the same lines
        self.token_cache: dict = {}
        self._advance: dict = {}
        self._ink: dict = {}

    def font(self, font: FontSpec) -> ImageFont.FreeTypeFont:
        return _truetype(self.book.path(font.face), font.size)

    def line_height(self, font):
        ascent, descent = self.font(font).getmetrics()
        return ascent + descent

    def advance(self, text, font):
        key = (text, font.face, font.size)
        hit = self._advance.get(key)
        if hit is None:
            hit = self._advance[key] = self.font(font).getlength(text)
        return hit

    def ink(self, text, font):
        key = (text, font.face, font.size)
        hit = self._ink.get(key)
        if hit is None:
            left, _, right, _ = self.font(font).getbbox(text, anchor="la")
            hit = self._ink[key] = (left, right)
        return hit

    def clear_caches(self) -> None:
        self.token_cache.clear()
        self._advance.clear()
        self._ink.clear()

    def covering(self, text, font):
        chars = {ord(ch) for ch in text if not ch.isspace()}
        if chars <= _cmap(self.book.path(font.face)):
            return font
        if font.face != self.fallback_face:
            logger.warning("face %s lacks glyphs for %r; using %s", font.face, text,
                           self.fallback_face)
            return FontSpec(self.fallback_face, font.size, font.color)
        raise ValueError(f"no font covers the glyphs of {text!r}")


@dataclass(frozen=True)
class TokenBox:
    text: str
    x: int          # box left, relative to the run origin
    width: int
    pen_x: int      # where the word is drawn, relative to the run origin


def layout_tokens(line: str, font: FontSpec, metrics: TextMetrics) -> tuple[TokenBox, ...]:
    """Position each word of a single line.

    The run's box starts at x=0: the pen is shifted right when the first
    glyph overhangs its origin.  Each word box is the union of its advance
    box and its ink box.
    """
    cache = getattr(metrics, "token_cache", None)
    if cache is not None:
        hit = cache.get((line, font))
        if hit is not None:
            return hit
    words = line.split()
    if not words:
        return ()
    first_left, _ = metrics.ink(words[0], font)
    shift = -min(0, first_left)
    out = []
    start = 0
    for word in words:
        idx = line.index(word, start)
        start = idx + len(word)
        pen = shift + round(metrics.advance(line[:idx], font)) if idx else shift
        left, right = metrics.ink(word, font)
        box_left = pen + min(0, left)
        box_right = pen + max(math.ceil(metrics.advance(word, font)), right)
        out.append(TokenBox(word, box_left, box_right - box_left, pen))
    out = tuple(out)
    if cache is not None:
        if len(cache) > TOKEN_CACHE_LIMIT:
            metrics.clear_caches()
        cache[(line, font)] = out
    return out


def measure_text(text: str, font: FontSpec, metrics: TextMetrics) -> tuple[int, int]:
    """Width and height in pixels of a single-line run."""
    tokens = layout_tokens(text, font, metrics)
    width = max((t.x + t.width for t in tokens), default=0)
    return width, metrics.line_height(font)
