"""Per-locale word lists and number/date conventions."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path


class UnsupportedLocaleError(LookupError):
    pass


@dataclass(frozen=True)
class LocaleFormats:
    date_formats: tuple[str, ...]
    phone_formats: tuple[str, ...]
    decimal_sep: str
    thousands_sep: str
    currency_suffix: bool
    default_currency: str
    address_unit: tuple[str, ...]
    country: str


FORMATS: dict[str, LocaleFormats] = {
    "en": LocaleFormats(
        date_formats=("{mm}/{dd}/{yyyy}", "{month} {d}, {yyyy}", "{yyyy}-{mm}-{dd}",
                      "{d} {mon} {yyyy}", "{mon} {dd}, {yyyy}"),
        phone_formats=("(###) ###-####", "###-###-####", "+1 ### ### ####", "###.###.####"),
        decimal_sep=".", thousands_sep=",", currency_suffix=False, default_currency="$",
        address_unit=("Suite {n}", "Apt {n}", "Unit {n}", "Floor {n}"),
        country="United States",
    ),
    "es": LocaleFormats(
        date_formats=("{dd}/{mm}/{yyyy}", "{d} de {month} de {yyyy}", "{dd}-{mm}-{yyyy}",
                      "{d} {mon} {yyyy}", "{dd}.{mm}.{yyyy}"),
        phone_formats=("+34 ### ### ###", "9## ### ###", "6## ## ## ##", "(+34) ### ## ## ##"),
        decimal_sep=",", thousands_sep=".", currency_suffix=True, default_currency="€",
        address_unit=("Piso {n}", "{n}º B", "Puerta {n}", "Local {n}"),
        country="España",
    ),
}


def locale_data_dir() -> Path:
    return Path(str(resources.files("docsynth") / "data" / "locales"))


def base_locale(tag: str) -> str:
    """``'es_ES'`` -> ``'es'``; tags are matched on their language part."""
    return tag.replace("-", "_").split("_")[0].lower()


@dataclass
class LocaleBundle:
    """Word lists and formats of one locale.

    Every draw through :meth:`pick` is counted in ``draws`` so callers can
    audit which bundle produced a document's values.
    """

    locale: str
    lists: dict[str, tuple[str, ...]]
    formats: LocaleFormats
    draws: Counter = field(default_factory=Counter)

    def pick(self, list_name: str, rng) -> str:
        self.draws[list_name] += 1
        return rng.choice(self.lists[list_name])


def available_locales() -> tuple[str, ...]:
    root = locale_data_dir()
    return tuple(sorted(p.name for p in root.iterdir() if p.is_dir() and p.name in FORMATS))


@lru_cache(maxsize=None)
def _load_lists(locale: str) -> dict[str, tuple[str, ...]]:
    root = locale_data_dir() / locale
    lists = {}
    for path in sorted(root.glob("*.txt")):
        with open(path, encoding="utf-8") as fh:
            lists[path.stem] = tuple(line.strip() for line in fh if line.strip())
    return lists


def load_locale(tag: str) -> LocaleBundle:
    locale = base_locale(tag)
    if locale not in FORMATS or not (locale_data_dir() / locale).is_dir():
        raise UnsupportedLocaleError(f"locale {tag!r} is not supported "
                                     f"(available: {', '.join(available_locales())})")
    return LocaleBundle(locale, _load_lists(locale), FORMATS[locale])
