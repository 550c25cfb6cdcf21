from __future__ import annotations

import logging
import re
from collections import Counter

import pytest

from conftest import entity_dict, group_dict, make_schema
from docsynth.sampling import RandomSource, freeze_permutation
from docsynth.values import (
    ConsistentPatternState,
    DictionaryTranslator,
    DuplicateGeneratorError,
    GeneratorParams,
    TranslationError,
    UnknownEntityTypeError,
    UnsupportedLocaleError,
    ValueGeneratorRegistry,
    default_registry,
    generate_value,
    instantiate_document,
    translate_text,
)

BUILTIN = ["name", "company", "address_multi_line", "date", "phone", "email",
           "currency_amount", "alphanumeric_id", "integer_quantity", "free_text"]


@pytest.mark.parametrize("locale", ["en", "es"])
@pytest.mark.parametrize("entity_type", BUILTIN)
def test_builtin_types_produce_text(entity_type, locale):
    state = ConsistentPatternState()
    rng = RandomSource(3, 1)
    for _ in range(30):
        v = generate_value(entity_type, GeneratorParams(locale), state, rng)
        assert v.strip()
    assert state.value_sources == Counter({locale: 30})


def test_company_has_company_shape():
    rng = RandomSource(0)
    for _ in range(50):
        v = generate_value("company", GeneratorParams("en"), ConsistentPatternState(), rng)
        words = v.split()
        assert words and any(ch.isalpha() for ch in v)


def test_address_has_one_to_four_lines():
    rng = RandomSource(4)
    counts = Counter()
    for _ in range(300):
        v = generate_value("address_multi_line", GeneratorParams("en"), ConsistentPatternState(), rng)
        counts[len(v.split("\n"))] += 1
    assert set(counts) <= {1, 2, 3, 4}
    assert len(counts) > 1


def test_currency_symbol_consistent_within_document():
    state = ConsistentPatternState(patterns={"currency": ("$", "€", "£")})
    rng = RandomSource(8)
    values = [generate_value("currency_amount", GeneratorParams("en"), state, rng) for _ in range(10)]
    symbols = {v[0] for v in values}
    assert len(symbols) == 1 and symbols <= {"$", "€", "£"}


def test_currency_symbols_vary_across_documents():
    n = 1000
    counts = Counter()
    for doc in range(n):
        state = ConsistentPatternState(patterns={"currency": ("$", "€", "£")})
        generate_value("currency_amount", GeneratorParams("en"), state, RandomSource(1, doc))
        counts[state.chosen["currency"]] += 1
    # 4 sigma below 1/3 for n=1000 is about 0.273, comfortably above the 20% floor
    for sym in "$€£":
        assert counts[sym] / n >= 0.20


def test_max_length_constraint():
    rng = RandomSource(2)
    for _ in range(100):
        v = generate_value("alphanumeric_id", GeneratorParams("en", max_length=5),
                           ConsistentPatternState(), rng)
        assert len(v) <= 5


def test_format_hint_for_ids():
    v = generate_value("alphanumeric_id", GeneratorParams("en", format="??-####"),
                       ConsistentPatternState(), RandomSource(5))
    assert re.fullmatch(r"[A-Z]{2}-\d{4}", v)


def test_unknown_type_and_locale():
    with pytest.raises(UnknownEntityTypeError):
        generate_value("vin_number", GeneratorParams("en"), ConsistentPatternState(), RandomSource(0))
    with pytest.raises(UnsupportedLocaleError):
        generate_value("company", GeneratorParams("xx"), ConsistentPatternState(), RandomSource(0))


def test_register_custom_generator_dispatches():
    reg = default_registry.copy()
    reg.register("vin_number", lambda params, bundle, state, rng: "1HGCM82633A004352")
    v = generate_value("vin_number", GeneratorParams("en"), ConsistentPatternState(),
                       RandomSource(0), registry=reg)
    assert v == "1HGCM82633A004352"
    with pytest.raises(DuplicateGeneratorError):
        reg.register("vin_number", lambda *a: "x")


def test_override_builtin_date():
    reg = default_registry.copy()

    def iso_date(params, bundle, state, rng):
        return f"{rng.randint(2000, 2030)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"

    with pytest.raises(DuplicateGeneratorError):
        reg.register("date", iso_date)
    reg.register("date", iso_date, override=True)
    rng = RandomSource(6)
    for _ in range(100):
        v = generate_value("date", GeneratorParams("en"), ConsistentPatternState(), rng, registry=reg)
        assert re.fullmatch(r"\d{4}-\d{2}-\d{2}", v)
    # the shared registry is untouched
    assert default_registry.generator_for("date") is not iso_date


def test_generator_bundle_overrides_type():
    reg = ValueGeneratorRegistry(dict(default_registry._types))
    reg.register("acme", {"company": lambda *a: "ACME"})
    v = generate_value("company", GeneratorParams("en"), ConsistentPatternState(), RandomSource(0),
                       registry=reg, bundle="acme")
    assert v == "ACME"


class _Spy:
    def __init__(self):
        self.calls = 0

    def translate(self, text, lang):
        self.calls += 1
        return None


def test_translation_disabled_passes_through():
    spy = _Spy()
    assert translate_text("Delivery Address", "es", spy, enable=False) == "Delivery Address"
    assert spy.calls == 0


def test_fixture_dictionary_lookup():
    assert translate_text("Delivery Address", "es", DictionaryTranslator()) == "Dirección de Entrega"


def test_untranslatable_lenient_and_strict(caplog):
    trace = Counter()
    with caplog.at_level(logging.WARNING, logger="docsynth"):
        out = translate_text("Flux Capacitor", "es", DictionaryTranslator(), trace=trace)
    assert out == "Flux Capacitor"
    assert trace["miss"] == 1
    assert "Flux Capacitor" in caplog.text
    with pytest.raises(TranslationError):
        translate_text("Flux Capacitor", "es", DictionaryTranslator(), lenient=False)


def test_missing_language_dictionary():
    with pytest.raises(TranslationError):
        translate_text("Total", "xx", DictionaryTranslator(), lenient=False)


def test_every_fixture_header_has_spanish_entry(invoice_schema):
    table = DictionaryTranslator().table("es")
    for g in invoice_schema.entity_groups:
        for h in g.headers:
            assert h in table
        for e in g.entities:
            for h in e.headers:
                assert h in table


def test_instance_locale_routing_and_translation(invoice_schema):
    for i in range(30):
        perm = freeze_permutation(invoice_schema, RandomSource(2, i), check=False)
        inst = instantiate_document(perm, invoice_schema, RandomSource(2, i).derive("v"),
                                    locale="es", translation=invoice_schema.common.translation.__class__(True, "es"))
        assert set(inst.value_sources) == {"es"}
        assert inst.header_translation["miss"] == 0


def test_values_only_for_present_entities():
    s = make_schema([group_dict("G", [entity_dict("a"), entity_dict("b", probability=0)])])
    perm = freeze_permutation(s, RandomSource(0))
    inst = instantiate_document(perm, s, RandomSource(0))
    assert [e.name for e in inst.groups[0].entities] == ["a"]
    assert sum(inst.value_sources.values()) == 1


def test_table_entities_get_one_value_per_row():
    s = make_schema([group_dict("T", [entity_dict("a"), entity_dict("b")],
                                tabulate={"create": 1, "rows": 4, "tabType": ["horizontal"]})])
    inst = instantiate_document(freeze_permutation(s, RandomSource(0)), s, RandomSource(1))
    assert all(len(e.values) == 4 for e in inst.groups[0].entities)


def test_instantiation_is_deterministic(invoice_schema):
    perm = freeze_permutation(invoice_schema, RandomSource(5, 5))
    a = instantiate_document(perm, invoice_schema, RandomSource(5, 5).derive("v"))
    b = instantiate_document(perm, invoice_schema, RandomSource(5, 5).derive("v"))
    assert a.groups == b.groups
