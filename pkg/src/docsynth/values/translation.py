"""Header translation through a pluggable provider.

Only header texts are translated; entity values are produced directly in
the target locale by the value generators.
"""
from __future__ import annotations

import csv
import logging
from collections import Counter
from importlib import resources
from pathlib import Path
from typing import Protocol

logger = logging.getLogger(__name__)


class TranslationError(RuntimeError):
    pass


class TranslationProvider(Protocol):
    def translate(self, text: str, target_lang: str) -> str | None:
        """Translated text, or None when the provider cannot translate it."""
        ...


def load_dictionary(path: str | Path) -> dict[str, str]:
    """Read a two-column ``source<TAB>target`` file."""
    table = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: expected two tab-separated columns, got {row!r}")
            table[row[0].strip()] = row[1].strip()
    return table


class DictionaryTranslator:
    """Lookup-table provider backed by bundled or user TSV dictionaries."""

    def __init__(self, dictionaries: dict[str, dict[str, str]] | None = None,
                 search_dirs: list[str | Path] | None = None):
        self._tables = {k.lower(): dict(v) for k, v in (dictionaries or {}).items()}
        self._dirs = [Path(d) for d in (search_dirs or [])]
        self._dirs.append(Path(str(resources.files("docsynth") / "data" / "translations")))

    def table(self, lang: str) -> dict[str, str]:
        lang = lang.lower()
        if lang not in self._tables:
            for d in self._dirs:
                path = d / f"{lang}.tsv"
                if path.is_file():
                    self._tables[lang] = load_dictionary(path)
                    break
            else:
                raise TranslationError(f"no translation dictionary for {lang!r}")
        return self._tables[lang]

    def translate(self, text: str, target_lang: str) -> str | None:
        return self.table(target_lang).get(text.strip())


def translate_text(text: str, target_lang: str, provider: TranslationProvider | None, *,
                   enable: bool = True, lenient: bool = True,
                   trace: Counter | None = None) -> str:
    """Translate a header text, passing it through unchanged when disabled.

    Untranslatable text is returned unchanged with a warning in lenient
    mode and raises :class:`TranslationError` otherwise.  ``trace`` counts
    ``hit`` and ``miss`` outcomes.
    """
    if not enable:
        return text
    if provider is None:
        raise TranslationError("translation enabled but no provider configured")
    try:
        result = provider.translate(text, target_lang)
    except TranslationError:
        if not lenient:
            raise
        result = None
    if result is None:
        if trace is not None:
            trace["miss"] += 1
        if not lenient:
            raise TranslationError(f"cannot translate {text!r} to {target_lang!r}")
        logger.warning("no %s translation for %r; keeping source text", target_lang, text)
        return text
    if trace is not None:
        trace["hit"] += 1
    return result
