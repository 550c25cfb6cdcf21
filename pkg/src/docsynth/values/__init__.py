"""Locale-aware fake values and header translation."""
from docsynth.values.locale import LocaleBundle, UnsupportedLocaleError, available_locales, load_locale
from docsynth.values.registry import (
    ConsistentPatternState,
    DuplicateGeneratorError,
    GeneratorParams,
    UnknownEntityTypeError,
    ValueGeneratorRegistry,
    default_registry,
    generate_value,
    register_generator,
)
from docsynth.values.translation import (
    DictionaryTranslator,
    TranslationError,
    TranslationProvider,
    load_dictionary,
    translate_text,
)

__all__ = [
    "ConsistentPatternState", "DictionaryTranslator", "DuplicateGeneratorError",
    "GeneratorParams", "LocaleBundle", "TranslationError", "TranslationProvider",
    "UnknownEntityTypeError", "UnsupportedLocaleError", "ValueGeneratorRegistry",
    "available_locales", "default_registry", "generate_value", "load_dictionary",
    "load_locale", "register_generator", "translate_text",
    "DocumentInstance", "EntityInstance", "GroupInstance", "instantiate_document",
]


def __getattr__(name):
    # instance imports sampling, which imports schema; keep this lazy to
    # avoid a cycle when schema validation pulls in the registry
    if name in ("DocumentInstance", "EntityInstance", "GroupInstance", "instantiate_document"):
        from docsynth.values import instance
        return getattr(instance, name)
    raise AttributeError(name)
