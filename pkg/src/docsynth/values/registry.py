from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping

from docsynth.values.builtin import BUILTIN_GENERATORS
from docsynth.values.locale import LocaleBundle, UnsupportedLocaleError, base_locale, load_locale

Generator = Callable[..., str]


class UnknownEntityTypeError(LookupError):
    pass


class DuplicateGeneratorError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    locale: str = "en"
    format: str | None = None
    min_length: int | None = None
    max_length: int | None = None
    min_value: float | None = None
    max_value: float | None = None

    @classmethod
    def for_entity(cls, locale: str, entity_def) -> "GeneratorParams":
        c = dict(entity_def.constraints) if entity_def is not None else {}
        return cls(
            locale=locale,
            format=entity_def.format if entity_def is not None else None,
            min_length=int(c["min_length"]) if "min_length" in c else None,
            max_length=int(c["max_length"]) if "max_length" in c else None,
            min_value=c.get("min_value"),
            max_value=c.get("max_value"),
        )


@dataclass
class ConsistentPatternState:
    """Per-document choices of pattern tokens (e.g. one currency symbol).

    ``value_sources`` counts generated values per locale bundle.
    """

    patterns: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    chosen: dict[str, str] = field(default_factory=dict)
    value_sources: Counter = field(default_factory=Counter)

    def token(self, group: str, rng, default: str | None = None) -> str | None:
        if group not in self.chosen:
            options = self.patterns.get(group)
            if not options:
                return default
            self.chosen[group] = rng.choice(options)
        return self.chosen[group]


class ValueGeneratorRegistry:
    """Maps entity types to generator functions.

    Generator bundles (the schema's ``fake_value_generator_class``) are
    named sets of per-type overrides layered on the base types.
    """

    def __init__(self, generators: Mapping[str, Generator] | None = None):
        self._types: dict[str, Generator] = dict(generators or {})
        self._bundles: dict[str, dict[str, Generator]] = {"default": {}}
        self._locales: dict[str, LocaleBundle] = {}

    def register(self, key: str, generator: Generator | Mapping[str, Generator], *,
                 override: bool = False) -> "ValueGeneratorRegistry":
        """Register an entity-type generator, or a bundle when given a mapping."""
        if isinstance(generator, Mapping):
            if key in self._bundles and not override:
                raise DuplicateGeneratorError(f"generator bundle {key!r} already registered")
            self._bundles[key] = dict(generator)
        else:
            if key in self._types and not override:
                raise DuplicateGeneratorError(f"entity type {key!r} already registered")
            self._types[key] = generator
        return self

    def has_bundle(self, key: str) -> bool:
        return key in self._bundles

    def has_type(self, entity_type: str, bundle: str = "default") -> bool:
        return entity_type in self._types or entity_type in self._bundles.get(bundle, {})

    def generator_for(self, entity_type: str, bundle: str = "default") -> Generator:
        overrides = self._bundles.get(bundle, {})
        if entity_type in overrides:
            return overrides[entity_type]
        try:
            return self._types[entity_type]
        except KeyError:
            raise UnknownEntityTypeError(f"no generator registered for {entity_type!r}") from None

    def supports_locale(self, tag: str) -> bool:
        try:
            self.locale_bundle(tag)
        except UnsupportedLocaleError:
            return False
        return True

    def locale_bundle(self, tag: str) -> LocaleBundle:
        key = base_locale(tag)
        if key not in self._locales:
            self._locales[key] = load_locale(tag)
        return self._locales[key]

    def copy(self) -> "ValueGeneratorRegistry":
        other = ValueGeneratorRegistry(self._types)
        other._bundles = {k: dict(v) for k, v in self._bundles.items()}
        return other


def _make_default() -> ValueGeneratorRegistry:
    reg = ValueGeneratorRegistry(BUILTIN_GENERATORS)
    reg.register("invoice", {})
    return reg


default_registry = _make_default()


def register_generator(key: str, generator, *, registry: ValueGeneratorRegistry | None = None,
                       override: bool = False) -> ValueGeneratorRegistry:
    registry = default_registry if registry is None else registry
    return registry.register(key, generator, override=override)


def generate_value(entity_type: str, params: GeneratorParams, state: ConsistentPatternState,
                   rng, *, registry: ValueGeneratorRegistry | None = None,
                   bundle: str = "default") -> str:
    """Produce one fake value for ``entity_type`` in ``params.locale``."""
    registry = default_registry if registry is None else registry
    fn = registry.generator_for(entity_type, bundle)
    locale_bundle = registry.locale_bundle(params.locale)
    text = fn(params, locale_bundle, state, rng)
    if params.max_length is not None and len(text) > params.max_length:
        text = text[: params.max_length].rstrip()
    if not text.strip():
        raise ValueError(f"generator for {entity_type!r} produced an empty value")
    state.value_sources[locale_bundle.locale] += 1
    return text
