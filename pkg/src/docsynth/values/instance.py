from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from docsynth.sampling import DocumentPermutation, FrozenEntity, FrozenGroup, RandomSource, TableLayout
from docsynth.schema import StochasticSchema, TranslationConfig
from docsynth.values.registry import (
    ConsistentPatternState,
    GeneratorParams,
    ValueGeneratorRegistry,
    default_registry,
    generate_value,
)
from docsynth.values.translation import DictionaryTranslator, TranslationProvider, translate_text


@dataclass(frozen=True)
class EntityInstance:
    frozen: FrozenEntity
    header_text: str | None
    values: tuple[str, ...]

    @property
    def name(self) -> str:
        return self.frozen.name


@dataclass(frozen=True)
class GroupInstance:
    frozen: FrozenGroup
    header_text: str | None
    entities: tuple[EntityInstance, ...]

    @property
    def name(self) -> str:
        return self.frozen.name


@dataclass
class DocumentInstance:
    permutation: DocumentPermutation
    groups: tuple[GroupInstance, ...]
    locale: str
    value_sources: Counter = field(default_factory=Counter)
    header_translation: Counter = field(default_factory=Counter)
    pattern_tokens: dict = field(default_factory=dict)

    def group(self, name: str) -> GroupInstance:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)


def instantiate_document(perm: DocumentPermutation, schema: StochasticSchema, rng: RandomSource,
                         *, registry: ValueGeneratorRegistry | None = None,
                         translator: TranslationProvider | None = None,
                         locale: str | None = None,
                         translation: TranslationConfig | None = None,
                         lenient: bool = True) -> DocumentInstance:
    """Fill a permutation with fake values and (optionally) translated headers.

    ``locale`` and ``translation`` override the schema's common config.
    """
    registry = default_registry if registry is None else registry
    common = schema.common
    locale = locale or common.faker_locale
    translation = translation or common.translation
    if translation.enable and translator is None:
        translator = DictionaryTranslator()
    state = ConsistentPatternState(patterns=dict(common.consistent_patterns_for_values))
    trace: Counter = Counter()

    def header(text: str | None) -> str | None:
        if text is None:
            return None
        return translate_text(text, translation.target_lang_code, translator,
                              enable=translation.enable, lenient=lenient, trace=trace)

    groups = []
    for fg in perm.groups:
        definition = schema.group(fg.name)
        n_values = fg.layout.row_count if isinstance(fg.layout, TableLayout) else 1
        entities = []
        for fe in fg.entities:
            params = GeneratorParams.for_entity(locale, definition.entity(fe.name))
            values = tuple(generate_value(fe.entity_type, params, state, rng, registry=registry,
                                          bundle=common.generator_key)
                           for _ in range(n_values))
            entities.append(EntityInstance(fe, header(fe.header), values))
        groups.append(GroupInstance(fg, header(fg.header), tuple(entities)))
    return DocumentInstance(perm, tuple(groups), locale, state.value_sources, trace,
                            dict(state.chosen))
