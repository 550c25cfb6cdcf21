from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, entity_dict, group_dict, make_schema, schema_dict
from docsynth.schema import (
    RANDOM,
    MissingFieldError,
    SchemaSyntaxError,
    SegmentSumError,
    UnknownKeyError,
    normalize_segment_dist,
    parse_schema,
    schema_digest,
    serialize_schema,
    validate_schema,
)


def _fragment():
    return parse_schema((DATA / "delivery_details_fragment.json").read_text())


def test_listing_fragment_parses_with_listed_values():
    g = _fragment().group("DeliveryDetails")
    assert g.presence_probability == 0.5
    assert g.header_probability == 1
    assert g.tabulate.create_prob == 0.3
    assert g.tabulate.rows == 1
    assert g.tabulate.tab_types == ("horizontal", "vertical")
    assert [e.name for e in g.entities] == ["customer_delivery_name", "customer_delivery_address"]
    assert g.entity("customer_delivery_address").presence_probability == 0.5
    assert g.entity("customer_delivery_address").entity_type == "address_multi_line"
    assert g.headers == ("Delivery Information", "Delivery Info", "Delivery Details")


def test_minimal_schema_gets_defaults():
    s = make_schema()
    g = s.entity_groups[0]
    assert g.tabulate.create_prob == 0
    assert g.grid_position is None
    assert g.entities[0].align == ("left",)
    assert s.common.expected_keys == ("e1",)
    # no segment block: uniform over all segments
    assert dict(g.segment_dist) == {0: 0.5, 1: 0.5}


def test_header_probability_defaults_to_common_switch():
    raw = schema_dict([{"name": "G", "header": ["H"], "entities": [entity_dict("e")]}],
                      show_entity_headers_probability=0.25)
    assert parse_schema(json.dumps(raw)).group("G").header_probability == 0.25


def test_random_rows_sentinel():
    s = make_schema([group_dict("T", [entity_dict("e")],
                                tabulate={"create": 1, "rows": "random", "numEmptyRows": "random"})])
    assert s.group("T").tabulate.rows == RANDOM
    assert s.group("T").tabulate.num_empty_rows == RANDOM


def test_translation_flag_accepts_string_booleans():
    s = make_schema(translation={"enable": "True", "target_lang_code": "es"})
    assert s.common.translation.enable is True
    assert s.common.translation.target_lang_code == "es"


def test_syntax_error_reports_position():
    with pytest.raises(SchemaSyntaxError) as exc:
        parse_schema('{"entity_groups": [\n  {"name": }\n]}')
    assert exc.value.line == 2


def test_missing_entity_groups():
    with pytest.raises(MissingFieldError):
        parse_schema("{}")


def test_unknown_key_warns_or_rejects():
    raw = json.dumps(schema_dict(colour="red"))
    assert parse_schema(raw).unknown_keys == ("colour",)
    with pytest.raises(UnknownKeyError):
        parse_schema(raw, strict=True)


def test_bundled_fixture_validates_cleanly(invoice_schema):
    report = validate_schema(invoice_schema)
    assert report.ok, report.errors
    # the listing's own segment block sums to 0.99
    assert any("DeliveryDetails" in r for r in report.renormalized)


def test_listing_segment_block_warns_but_passes():
    s = make_schema([group_dict("D", [entity_dict("e")],
                                segment={"0": .3, "1": .3, "2": .3, "4": .03, "5": .03, "6": .03})],
                    structural_config={"num_segments": 7})
    report = validate_schema(s)
    assert report.ok
    assert any("0.9900" in w for w in report.warnings)


def test_segment_sum_out_of_tolerance_names_group():
    s = make_schema([group_dict("Broken", [entity_dict("e")], segment={"0": 0.5, "1": 0.2})])
    report = validate_schema(s)
    assert not report.ok
    assert any("Broken" in e and "0.7000" in e for e in report.errors)


def test_dangling_shuffle_reference():
    s = make_schema([group_dict("G", [entity_dict("a"), entity_dict("b")],
                                entityShuffleGroups=[["a", "zzz"]])])
    report = validate_schema(s)
    assert any("G" in e and "zzz" in e for e in report.errors)


def test_overlapping_shuffle_groups_rejected():
    s = make_schema([group_dict("G", [entity_dict("a"), entity_dict("b"), entity_dict("c")],
                                entityShuffleGroups=[["a", "b"], ["b", "c"]])])
    assert not validate_schema(s).ok


def test_unregistered_generator_bundle_named():
    s = make_schema(fake_value_generator_class="acme.VinGenerator")
    report = validate_schema(s)
    assert any("acme.VinGenerator" in e for e in report.errors)


def test_unknown_entity_type_and_locale():
    s = make_schema([group_dict("G", [entity_dict("e", type_="vin_number")])], faker_locale="xx_YY")
    errors = " ".join(validate_schema(s).errors)
    assert "vin_number" in errors and "xx_YY" in errors


def test_pin_outside_grid_rejected():
    s = make_schema([group_dict("G", [entity_dict("e")], gridPosition=[5, 0])])
    assert not validate_schema(s).ok


def test_add_header_without_headers_rejected():
    s = make_schema([group_dict("G", [entity_dict("e", header=[], addHeader=True)])])
    assert not validate_schema(s).ok


@pytest.mark.parametrize("dist, divisor", [
    ({0: .3, 1: .3, 2: .3, 4: .03, 5: .03, 6: .03}, 0.99),
    ({0: 1.0}, 1.0),
    ({0: .5, 1: .5, 2: .02}, 1.02),
])
def test_normalize_segment_dist(dist, divisor):
    out = normalize_segment_dist(dist)
    assert math.isclose(math.fsum(out.values()), 1.0, abs_tol=1e-9)
    for k, p in dist.items():
        assert math.isclose(out[k], p / divisor, rel_tol=1e-12)


def test_normalize_rejects_far_sum():
    with pytest.raises(SegmentSumError):
        normalize_segment_dist({0: 0.5, 1: 0.2})


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=7))
def test_normalized_sum_is_one(weights):
    total = sum(weights)
    dist = {i: w / total * 1.03 for i, w in enumerate(weights)}
    assert math.isclose(math.fsum(normalize_segment_dist(dist).values()), 1.0, abs_tol=1e-9)


_names = st.text("abcdefghij_", min_size=1, max_size=8)


@st.composite
def _schemas(draw):
    n_groups = draw(st.integers(1, 3))
    groups = []
    for gi in range(n_groups):
        ents = [entity_dict(f"e{gi}_{i}", probability=draw(st.sampled_from([0.25, 0.5, 1])),
                            header=draw(st.lists(_names, min_size=1, max_size=3)),
                            align=draw(st.lists(st.sampled_from(["left", "right", "center"]),
                                                min_size=1, max_size=3, unique=True)))
                for i in range(draw(st.integers(1, 3)))]
        g = group_dict(f"G{gi}", ents, probability=draw(st.sampled_from([0.5, 1])),
                       header=draw(st.lists(_names, max_size=2)),
                       segment={"0": 0.4, "1": 0.6})
        if draw(st.booleans()):
            g["tabulate"] = {"create": 0.5, "rows": draw(st.sampled_from([1, 3, "random"])),
                             "tabType": ["horizontal"]}
        groups.append(g)
    return schema_dict(groups)


@settings(max_examples=40, deadline=None)
@given(_schemas())
def test_parse_serialize_round_trip(raw):
    first = parse_schema(json.dumps(raw))
    second = parse_schema(serialize_schema(first))
    assert second == first
    assert parse_schema(serialize_schema(second)) == second
    assert schema_digest(first) == schema_digest(second)
