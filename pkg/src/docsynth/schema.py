"""Stochastic schema model: parsing, validation and serialization.

A schema is a JSON document describing entity groups whose presence,
placement, headers, table format and styling are random variables.  The
key names follow the established schema layout (``entity_groups``,
``segment``, ``tabulate``, ``headerProbability`` ...) so existing schema
files load unmodified.  Parsed schemas are immutable and safe to share
between worker processes.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

ALIGNMENTS = ("left", "right", "center")
TAB_TYPES = ("horizontal", "vertical")
SEPARATOR_STYLES = ("grid", "horizontal", "header", "none")
RANDOM = "random"

#: Tolerance on the sum of a segment distribution before it is rejected.
SEGMENT_SUM_TOLERANCE = 0.05


class SchemaError(Exception):
    """Base class for schema parsing failures."""


class SchemaSyntaxError(SchemaError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"{msg} (line {line}, column {column})")
        self.line = line
        self.column = column


class MissingFieldError(SchemaError):
    pass


class UnknownKeyError(SchemaError):
    pass


class SegmentSumError(ValueError):
    pass


# --------------------------------------------------------------------------
# Model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FontVariance:
    face: str | None = None
    size: int | None = None
    color: str | None = None


@dataclass(frozen=True)
class EntityDef:
    name: str
    entity_type: str
    presence_probability: float = 1.0
    headers: tuple[str, ...] = ()
    align: tuple[str, ...] = ("left",)
    header_align: tuple[str, ...] = ("left",)
    font_variance: FontVariance | None = None
    add_header: bool | None = None
    format: str | None = None
    constraints: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class TabulateSpec:
    create_prob: float = 0.0
    rows: int | str = 1
    num_empty_rows: int | str = 0
    tab_types: tuple[str, ...] = TAB_TYPES


@dataclass(frozen=True)
class EntityGroupDef:
    name: str
    segment_dist: tuple[tuple[int, float], ...]
    tabulate: TabulateSpec
    headers: tuple[str, ...]
    header_probability: float
    presence_probability: float
    grid_position: tuple[int, int] | None
    group_alignment: tuple[str, ...]
    entities: tuple[EntityDef, ...]
    entity_shuffle_groups: tuple[tuple[str, ...], ...] = ()

    def entity(self, name: str) -> EntityDef:
        for e in self.entities:
            if e.name == name:
                return e
        raise KeyError(name)


@dataclass(frozen=True)
class StructuralConfig:
    num_segments: int = 1
    segment_size: tuple[int, int] = (2, 3)
    canvas_width: int = 1240
    canvas_height: int = 1754
    intra_group_y_offset: int = 6
    intra_group_x_offset: int = 12
    inter_group_y_offset: int = 16
    space_width_weight: float = 2.0
    # bounds for "random" row counts
    min_rows: int = 1
    max_rows: int = 8
    min_empty_rows: int = 0
    max_empty_rows: int = 2
    # page geometry
    margin: int = 40
    section_padding: int = 8

    @property
    def section_height(self) -> int:
        return self.canvas_height // self.num_segments


@dataclass(frozen=True)
class TableStyleConfig:
    header_font_faces: tuple[str, ...] = ()
    header_font_colors: tuple[str, ...] = ("#000000",)
    row_font_faces: tuple[str, ...] = ()
    row_font_colors: tuple[str, ...] = ("#000000",)
    separator_styles: tuple[str, ...] = ("grid",)
    separator_colors: tuple[str, ...] = ("#000000",)
    cell_padding: int = 4


@dataclass(frozen=True)
class TranslationConfig:
    enable: bool = False
    target_lang_code: str = ""


@dataclass(frozen=True)
class CommonConfig:
    faker_locale: str = "en"
    translation: TranslationConfig = TranslationConfig()
    generator_key: str = "default"
    structural: StructuralConfig = StructuralConfig()
    font_colors: tuple[str, ...] = ("#000000",)
    font_size: tuple[int, int] = (12, 18)
    font_dir: str = ""
    header_font_dir: str = ""
    canvas_color_options: tuple[str, ...] = ("#ffffff",)
    table_config: TableStyleConfig = TableStyleConfig()
    show_entity_headers_probability: float = 0.5
    consistent_patterns_for_values: tuple[tuple[str, tuple[str, ...]], ...] = ()
    expected_keys: tuple[str, ...] = ()

    def pattern_group(self, name: str) -> tuple[str, ...]:
        for key, tokens in self.consistent_patterns_for_values:
            if key == name:
                return tokens
        return ()


@dataclass(frozen=True)
class StochasticSchema:
    doc_type_name: str
    common: CommonConfig
    entity_groups: tuple[EntityGroupDef, ...]
    unknown_keys: tuple[str, ...] = field(default=(), compare=False)

    def group(self, name: str) -> EntityGroupDef:
        for g in self.entity_groups:
            if g.name == name:
                return g
        raise KeyError(name)

    @property
    def segment_ids(self) -> tuple[int, ...]:
        return tuple(range(self.common.structural.num_segments))


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_TOP_KEYS = {
    "doc_type", "entity_groups", "faker_locale", "translation",
    "fake_value_generator_class", "structural_config", "font_colors",
    "font_size", "font_dir", "canvas_color_options", "table_config",
    "show_entity_headers_probability", "consistent_patterns_for_values",
    "expected_keys",
}
_GROUP_KEYS = {
    "name", "segment", "tabulate", "header", "headerProbability",
    "probability", "gridPosition", "groupAlignment", "entities",
    "entityShuffleGroups",
}
_ENTITY_KEYS = {
    "name", "type", "probability", "header", "align", "header_align",
    "headerAlign", "fontVariance", "addHeader", "format", "constraints",
}
_TABULATE_KEYS = {"create", "rows", "numEmptyRows", "tabType"}
_STRUCTURAL_KEYS = {
    "num_segments", "segment_size", "canvas_width", "canvas_height",
    "intra_group_y_offset", "intra_group_x_offset", "inter_group_y_offset",
    "space_width_weight", "min_rows", "max_rows", "min_empty_rows",
    "max_empty_rows", "margin", "section_padding",
}
_TABLE_KEYS = {
    "header_font_faces", "header_font_colors", "row_font_faces",
    "row_font_colors", "separator_styles", "separator_colors", "cell_padding",
}
_FONT_VARIANCE_KEYS = {"face", "size", "color"}
_TRANSLATION_KEYS = {"enable", "target_lang_code"}
_CONSTRAINT_KEYS = {"min_length", "max_length", "min_value", "max_value"}


class _Reader:
    """Collects unknown keys while walking the raw JSON tree."""

    def __init__(self, strict: bool):
        self.strict = strict
        self.unknown: list[str] = []

    def check_keys(self, obj: Mapping[str, Any], allowed: set[str], path: str) -> None:
        for key in obj:
            if key not in allowed:
                where = f"{path}.{key}" if path else key
                if self.strict:
                    raise UnknownKeyError(f"unknown key {where!r}")
                logger.warning("ignoring unknown schema key %r", where)
                self.unknown.append(where)


def _require(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise MissingFieldError(f"missing required field {path}.{key}" if path else
                                f"missing required field {key!r}")
    return obj[key]


def _as_mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise SchemaError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _as_list(value: Any, path: str) -> list:
    if isinstance(value, str) or not isinstance(value, Sequence):
        raise SchemaError(f"{path}: expected a list, got {type(value).__name__}")
    return list(value)


def _str_tuple(value: Any, path: str) -> tuple[str, ...]:
    if isinstance(value, str):
        return (value,)
    return tuple(str(v) for v in _as_list(value, path))


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _int(value: Any, path: str) -> int:
    num = _number(value, path)
    if num != int(num):
        raise SchemaError(f"{path}: expected an integer, got {value!r}")
    return int(num)


def _bool(value: Any, path: str) -> bool:
    # booleans are sometimes written as strings ("True")
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false", "1", "0", "yes", "no"):
        return value.strip().lower() in ("true", "1", "yes")
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    raise SchemaError(f"{path}: expected a boolean, got {value!r}")


def _count_or_random(value: Any, path: str) -> int | str:
    if isinstance(value, str):
        if value.strip().lower() == RANDOM:
            return RANDOM
        raise SchemaError(f"{path}: expected an integer or 'random', got {value!r}")
    return _int(value, path)


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        stripped = text.strip()
        # a bare `"entity_groups": [...]` fragment is accepted as-is
        if stripped.startswith('"'):
            try:
                return json.loads("{" + stripped.rstrip(",") + "}")
            except json.JSONDecodeError:
                pass
        raise SchemaSyntaxError(exc.msg, exc.lineno, exc.colno) from None


def _parse_tabulate(raw: Any, path: str, rd: _Reader) -> TabulateSpec:
    raw = _as_mapping(raw, path)
    rd.check_keys(raw, _TABULATE_KEYS, path)
    return TabulateSpec(
        create_prob=_number(raw.get("create", 0.0), f"{path}.create"),
        rows=_count_or_random(raw.get("rows", 1), f"{path}.rows"),
        num_empty_rows=_count_or_random(raw.get("numEmptyRows", 0), f"{path}.numEmptyRows"),
        tab_types=_str_tuple(raw.get("tabType", list(TAB_TYPES)), f"{path}.tabType"),
    )


def _parse_font_variance(raw: Any, path: str, rd: _Reader) -> FontVariance:
    raw = _as_mapping(raw, path)
    rd.check_keys(raw, _FONT_VARIANCE_KEYS, path)
    size = raw.get("size")
    return FontVariance(
        face=None if raw.get("face") is None else str(raw["face"]),
        size=None if size is None else _int(size, f"{path}.size"),
        color=None if raw.get("color") is None else str(raw["color"]),
    )


def _parse_entity(raw: Any, path: str, rd: _Reader) -> EntityDef:
    raw = _as_mapping(raw, path)
    rd.check_keys(raw, _ENTITY_KEYS, path)
    name = str(_require(raw, "name", path))
    etype = str(_require(raw, "type", path))
    header_align = raw.get("header_align", raw.get("headerAlign", ["left"]))
    constraints = ()
    if "constraints" in raw:
        craw = _as_mapping(raw["constraints"], f"{path}.constraints")
        rd.check_keys(craw, _CONSTRAINT_KEYS, f"{path}.constraints")
        constraints = tuple(sorted(
            (k, _number(v, f"{path}.constraints.{k}")) for k, v in craw.items()
            if k in _CONSTRAINT_KEYS))
    return EntityDef(
        name=name,
        entity_type=etype,
        presence_probability=_number(raw.get("probability", 1.0), f"{path}.probability"),
        headers=_str_tuple(raw.get("header", []), f"{path}.header"),
        align=_str_tuple(raw.get("align", ["left"]), f"{path}.align"),
        header_align=_str_tuple(header_align, f"{path}.header_align"),
        font_variance=(_parse_font_variance(raw["fontVariance"], f"{path}.fontVariance", rd)
                       if raw.get("fontVariance") is not None else None),
        add_header=(_bool(raw["addHeader"], f"{path}.addHeader")
                    if raw.get("addHeader") is not None else None),
        format=None if raw.get("format") is None else str(raw["format"]),
        constraints=constraints,
    )


def _parse_group(raw: Any, path: str, rd: _Reader, common: CommonConfig) -> EntityGroupDef:
    raw = _as_mapping(raw, path)
    rd.check_keys(raw, _GROUP_KEYS, path)
    name = str(_require(raw, "name", path))
    entities_raw = _as_list(_require(raw, "entities", path), f"{path}.entities")
    entities = tuple(_parse_entity(e, f"{path}.entities[{i}]", rd)
                     for i, e in enumerate(entities_raw))

    if "segment" in raw:
        seg_raw = _as_mapping(raw["segment"], f"{path}.segment")
        segment = []
        for key, prob in seg_raw.items():
            try:
                seg_id = int(key)
            except ValueError:
                raise SchemaError(f"{path}.segment: segment id {key!r} is not an integer") from None
            segment.append((seg_id, _number(prob, f"{path}.segment.{key}")))
        segment_dist = tuple(segment)
    else:
        n = common.structural.num_segments
        segment_dist = tuple((i, 1.0 / n) for i in range(n))

    grid_position = None
    if raw.get("gridPosition") is not None:
        pos = _as_list(raw["gridPosition"], f"{path}.gridPosition")
        if len(pos) != 2:
            raise SchemaError(f"{path}.gridPosition: expected [row, col]")
        grid_position = (_int(pos[0], f"{path}.gridPosition"), _int(pos[1], f"{path}.gridPosition"))

    shuffle = tuple(_str_tuple(sub, f"{path}.entityShuffleGroups")
                    for sub in _as_list(raw.get("entityShuffleGroups", []), f"{path}.entityShuffleGroups"))

    return EntityGroupDef(
        name=name,
        segment_dist=segment_dist,
        tabulate=(_parse_tabulate(raw["tabulate"], f"{path}.tabulate", rd)
                  if raw.get("tabulate") is not None else TabulateSpec()),
        headers=_str_tuple(raw.get("header", []), f"{path}.header"),
        header_probability=_number(raw.get("headerProbability",
                                           common.show_entity_headers_probability),
                                   f"{path}.headerProbability"),
        presence_probability=_number(raw.get("probability", 1.0), f"{path}.probability"),
        grid_position=grid_position,
        group_alignment=_str_tuple(raw.get("groupAlignment", ["left"]), f"{path}.groupAlignment"),
        entities=entities,
        entity_shuffle_groups=shuffle,
    )


def _parse_structural(raw: Any, rd: _Reader) -> StructuralConfig:
    raw = _as_mapping(raw, "structural_config")
    rd.check_keys(raw, _STRUCTURAL_KEYS, "structural_config")
    base = StructuralConfig()
    kwargs: dict[str, Any] = {}
    for key in _STRUCTURAL_KEYS:
        if key not in raw:
            continue
        p = f"structural_config.{key}"
        if key == "segment_size":
            rows, cols = _as_list(raw[key], p)
            kwargs[key] = (_int(rows, p), _int(cols, p))
        elif key == "space_width_weight":
            kwargs[key] = _number(raw[key], p)
        else:
            kwargs[key] = _int(raw[key], p)
    return StructuralConfig(**{**base.__dict__, **kwargs})


def _parse_table_config(raw: Any, rd: _Reader) -> TableStyleConfig:
    raw = _as_mapping(raw, "table_config")
    rd.check_keys(raw, _TABLE_KEYS, "table_config")
    kwargs: dict[str, Any] = {}
    for key in _TABLE_KEYS:
        if key not in raw:
            continue
        if key == "cell_padding":
            kwargs[key] = _int(raw[key], f"table_config.{key}")
        else:
            kwargs[key] = _str_tuple(raw[key], f"table_config.{key}")
    return TableStyleConfig(**kwargs)


def _parse_patterns(raw: Any) -> tuple[tuple[str, tuple[str, ...]], ...]:
    path = "consistent_patterns_for_values"
    if isinstance(raw, Mapping):
        return tuple((str(k), _str_tuple(v, f"{path}.{k}")) for k, v in raw.items())
    items = _as_list(raw, path)
    if not items:
        return ()
    if all(isinstance(i, str) for i in items):
        # a flat token list is the currency group
        return (("currency", tuple(items)),)
    groups = []
    for i, sub in enumerate(items):
        groups.append(("currency" if i == 0 else f"pattern_{i}", _str_tuple(sub, path)))
    return tuple(groups)


def _parse_common(raw: Mapping[str, Any], rd: _Reader) -> CommonConfig:
    kwargs: dict[str, Any] = {}
    if "faker_locale" in raw:
        kwargs["faker_locale"] = str(raw["faker_locale"])
    if "translation" in raw:
        tr = _as_mapping(raw["translation"], "translation")
        rd.check_keys(tr, _TRANSLATION_KEYS, "translation")
        kwargs["translation"] = TranslationConfig(
            enable=_bool(tr.get("enable", False), "translation.enable"),
            target_lang_code=str(tr.get("target_lang_code", "")),
        )
    if "fake_value_generator_class" in raw:
        kwargs["generator_key"] = str(raw["fake_value_generator_class"])
    if "structural_config" in raw:
        kwargs["structural"] = _parse_structural(raw["structural_config"], rd)
    if "font_colors" in raw:
        kwargs["font_colors"] = _str_tuple(raw["font_colors"], "font_colors")
    if "font_size" in raw:
        fs = raw["font_size"]
        if isinstance(fs, Mapping):
            lo, hi = _require(fs, "min", "font_size"), _require(fs, "max", "font_size")
        else:
            lo, hi = _as_list(fs, "font_size")
        kwargs["font_size"] = (_int(lo, "font_size"), _int(hi, "font_size"))
    if "font_dir" in raw:
        fd = raw["font_dir"]
        if isinstance(fd, Mapping):
            kwargs["font_dir"] = str(fd.get("entity", ""))
            kwargs["header_font_dir"] = str(fd.get("header", ""))
        else:
            kwargs["font_dir"] = str(fd)
    if "canvas_color_options" in raw:
        kwargs["canvas_color_options"] = _str_tuple(raw["canvas_color_options"], "canvas_color_options")
    if "table_config" in raw:
        kwargs["table_config"] = _parse_table_config(raw["table_config"], rd)
    if "show_entity_headers_probability" in raw:
        kwargs["show_entity_headers_probability"] = _number(
            raw["show_entity_headers_probability"], "show_entity_headers_probability")
    if "consistent_patterns_for_values" in raw:
        kwargs["consistent_patterns_for_values"] = _parse_patterns(raw["consistent_patterns_for_values"])
    if "expected_keys" in raw:
        kwargs["expected_keys"] = _str_tuple(raw["expected_keys"], "expected_keys")
    return CommonConfig(**kwargs)


def parse_schema(text: str, strict: bool = False) -> StochasticSchema:
    """Parse schema JSON text into a :class:`StochasticSchema`.

    Unknown keys raise :class:`UnknownKeyError` when ``strict`` is set and
    are otherwise logged and recorded on ``schema.unknown_keys``.  When
    ``expected_keys`` is absent every entity name becomes an expected key.
    """
    raw = _as_mapping(_load_json(text), "schema")
    rd = _Reader(strict)
    rd.check_keys(raw, _TOP_KEYS, "")
    common = _parse_common(raw, rd)
    groups_raw = _as_list(_require(raw, "entity_groups", ""), "entity_groups")
    groups = tuple(_parse_group(g, f"entity_groups[{i}]", rd, common)
                   for i, g in enumerate(groups_raw))
    if not common.expected_keys:
        names = []
        for g in groups:
            names.extend(e.name for e in g.entities if e.name not in names)
        common = CommonConfig(**{**common.__dict__, "expected_keys": tuple(names)})
    return StochasticSchema(
        doc_type_name=str(raw.get("doc_type", "document")),
        common=common,
        entity_groups=groups,
        unknown_keys=tuple(rd.unknown),
    )


def load_schema(path, strict: bool = False) -> StochasticSchema:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read(), strict=strict)


def bundled_schema_path(name: str = "invoice") -> str:
    from importlib import resources
    return str(resources.files("docsynth") / "data" / "schemas" / f"{name}.json")


def load_bundled_schema(name: str = "invoice") -> StochasticSchema:
    return load_schema(bundled_schema_path(name))


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def _entity_to_json(e: EntityDef) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": e.name,
        "type": e.entity_type,
        "probability": e.presence_probability,
        "header": list(e.headers),
        "align": list(e.align),
        "header_align": list(e.header_align),
    }
    if e.font_variance is not None:
        out["fontVariance"] = {k: v for k, v in e.font_variance.__dict__.items() if v is not None}
    if e.add_header is not None:
        out["addHeader"] = e.add_header
    if e.format is not None:
        out["format"] = e.format
    if e.constraints:
        out["constraints"] = dict(e.constraints)
    return out


def _group_to_json(g: EntityGroupDef) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": g.name,
        "segment": {str(k): v for k, v in g.segment_dist},
        "tabulate": {
            "create": g.tabulate.create_prob,
            "rows": g.tabulate.rows,
            "numEmptyRows": g.tabulate.num_empty_rows,
            "tabType": list(g.tabulate.tab_types),
        },
        "header": list(g.headers),
        "entities": [_entity_to_json(e) for e in g.entities],
        "headerProbability": g.header_probability,
        "probability": g.presence_probability,
        "groupAlignment": list(g.group_alignment),
    }
    if g.grid_position is not None:
        out["gridPosition"] = list(g.grid_position)
    if g.entity_shuffle_groups:
        out["entityShuffleGroups"] = [list(s) for s in g.entity_shuffle_groups]
    return out


def schema_to_dict(schema: StochasticSchema) -> dict[str, Any]:
    c = schema.common
    s = c.structural
    font_dir: Any = c.font_dir
    if c.header_font_dir:
        font_dir = {"entity": c.font_dir, "header": c.header_font_dir}
    return {
        "doc_type": schema.doc_type_name,
        "faker_locale": c.faker_locale,
        "translation": {"enable": c.translation.enable,
                        "target_lang_code": c.translation.target_lang_code},
        "fake_value_generator_class": c.generator_key,
        "structural_config": {**s.__dict__, "segment_size": list(s.segment_size)},
        "font_colors": list(c.font_colors),
        "font_size": list(c.font_size),
        "font_dir": font_dir,
        "canvas_color_options": list(c.canvas_color_options),
        "table_config": {k: (list(v) if isinstance(v, tuple) else v)
                         for k, v in c.table_config.__dict__.items()},
        "show_entity_headers_probability": c.show_entity_headers_probability,
        "consistent_patterns_for_values": {k: list(v) for k, v in c.consistent_patterns_for_values},
        "expected_keys": list(c.expected_keys),
        "entity_groups": [_group_to_json(g) for g in schema.entity_groups],
    }


def serialize_schema(schema: StochasticSchema) -> str:
    return json.dumps(schema_to_dict(schema), indent=2, ensure_ascii=False)


def schema_digest(schema: StochasticSchema) -> str:
    import hashlib
    canonical = json.dumps(schema_to_dict(schema), sort_keys=True, ensure_ascii=False,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

def normalize_segment_dist(dist: Mapping[int, float] | Iterable[tuple[int, float]],
                           tolerance: float = SEGMENT_SUM_TOLERANCE) -> dict[int, float]:
    """Rescale a segment distribution so it sums to one.

    Raises :class:`SegmentSumError` if the raw sum is further than
    ``tolerance`` from 1.
    """
    items = list(dist.items()) if isinstance(dist, Mapping) else list(dist)
    total = math.fsum(p for _, p in items)
    if not items or abs(total - 1.0) > tolerance:
        raise SegmentSumError(f"segment probabilities sum to {total:.4f}, "
                              f"outside 1 ± {tolerance}")
    return {k: p / total for k, p in items}


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    renormalized: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        lines = [f"error: {e}" for e in self.errors]
        lines += [f"warning: {w}" for w in self.warnings]
        if not lines:
            lines.append("schema is valid")
        return "\n".join(lines)


def _is_prob(p: float) -> bool:
    return 0.0 <= p <= 1.0


def _check_color(color: str, where: str, report: ValidationReport) -> None:
    from PIL import ImageColor
    try:
        ImageColor.getrgb(color)
    except ValueError:
        report.errors.append(f"{where}: unrecognised color {color!r}")


def validate_schema(schema: StochasticSchema, registry=None, strict: bool = False) -> ValidationReport:
    """Check every schema invariant and collect errors and warnings.

    Validation never raises; a schema is usable iff ``report.ok``.
    """
    if registry is None:
        from docsynth.values import default_registry
        registry = default_registry
    report = ValidationReport()
    c = schema.common
    s = c.structural

    for key in schema.unknown_keys:
        (report.errors if strict else report.warnings).append(f"unknown key {key!r}")

    # common configuration
    if s.num_segments < 1:
        report.errors.append("structural_config.num_segments must be >= 1")
    for name in ("canvas_width", "canvas_height"):
        if getattr(s, name) <= 0:
            report.errors.append(f"structural_config.{name} must be > 0")
    if min(s.segment_size) < 1:
        report.errors.append("structural_config.segment_size must be positive")
    for name in ("intra_group_y_offset", "intra_group_x_offset", "inter_group_y_offset",
                 "margin", "section_padding"):
        if getattr(s, name) < 0:
            report.errors.append(f"structural_config.{name} must be >= 0")
    if s.space_width_weight < 0:
        report.errors.append("structural_config.space_width_weight must be >= 0")
    if not 1 <= s.min_rows <= s.max_rows:
        report.errors.append("structural_config row bounds must satisfy 1 <= min_rows <= max_rows")
    if not 0 <= s.min_empty_rows <= s.max_empty_rows:
        report.errors.append("structural_config empty-row bounds are inconsistent")
    if c.font_size[0] > c.font_size[1] or c.font_size[0] < 1:
        report.errors.append(f"font_size bounds {c.font_size} are invalid")
    if not c.expected_keys:
        report.errors.append("expected_keys must not be empty")
    if not _is_prob(c.show_entity_headers_probability):
        report.errors.append("show_entity_headers_probability must be in [0, 1]")
    for opt in ("font_colors", "canvas_color_options"):
        values = getattr(c, opt)
        if not values:
            report.errors.append(f"{opt} must not be empty")
        for col in values:
            _check_color(col, opt, report)
    t = c.table_config
    for opt in ("header_font_colors", "row_font_colors", "separator_styles", "separator_colors"):
        if not getattr(t, opt):
            report.errors.append(f"table_config.{opt} must not be empty")
    for col in t.header_font_colors + t.row_font_colors + t.separator_colors:
        _check_color(col, "table_config", report)
    for style in t.separator_styles:
        if style not in SEPARATOR_STYLES:
            report.errors.append(f"table_config.separator_styles: unknown style {style!r}")
    if t.cell_padding < 0:
        report.errors.append("table_config.cell_padding must be >= 0")
    if not registry.has_bundle(c.generator_key):
        report.errors.append(f"fake_value_generator_class {c.generator_key!r} is not registered")
    if not registry.supports_locale(c.faker_locale):
        report.errors.append(f"faker_locale {c.faker_locale!r} is not supported")

    from docsynth.text import FontBook
    try:
        FontBook.for_common(c)
    except (FileNotFoundError, ValueError) as exc:
        report.errors.append(f"font_dir: {exc}")

    # entity groups
    if not schema.entity_groups:
        report.errors.append("schema must define at least one entity group")
    seen_groups: set[str] = set()
    pins: dict[tuple[int, int], list[str]] = {}
    rows, cols = s.segment_size
    for g in schema.entity_groups:
        where = f"group {g.name!r}"
        if g.name in seen_groups:
            report.errors.append(f"duplicate group name {g.name!r}")
        seen_groups.add(g.name)
        for label, p in (("probability", g.presence_probability),
                         ("headerProbability", g.header_probability),
                         ("tabulate.create", g.tabulate.create_prob)):
            if not _is_prob(p):
                report.errors.append(f"{where}: {label} {p} is outside [0, 1]")
        for seg, p in g.segment_dist:
            if not _is_prob(p):
                report.errors.append(f"{where}: segment {seg} probability {p} is outside [0, 1]")
            if not 0 <= seg < s.num_segments:
                report.errors.append(f"{where}: segment {seg} does not exist "
                                     f"(num_segments={s.num_segments})")
        total = math.fsum(p for _, p in g.segment_dist)
        if not g.segment_dist:
            report.errors.append(f"{where}: empty segment distribution")
        elif abs(total - 1.0) > SEGMENT_SUM_TOLERANCE:
            report.errors.append(f"{where}: segment probabilities sum to {total:.4f}, "
                                 f"outside 1 ± {SEGMENT_SUM_TOLERANCE}")
        elif abs(total - 1.0) > 1e-9:
            report.warnings.append(f"{where}: segment probabilities sum to {total:.4f}; "
                                   "renormalized")
            report.renormalized.append(g.name)
        tab = g.tabulate
        if isinstance(tab.rows, int) and tab.rows < 1:
            report.errors.append(f"{where}: tabulate.rows must be >= 1")
        if isinstance(tab.num_empty_rows, int) and tab.num_empty_rows < 0:
            report.errors.append(f"{where}: tabulate.numEmptyRows must be >= 0")
        if not tab.tab_types or any(t_ not in TAB_TYPES for t_ in tab.tab_types):
            report.errors.append(f"{where}: tabType must be a non-empty subset of {TAB_TYPES}")
        if g.header_probability > 0 and not g.headers:
            report.errors.append(f"{where}: headerProbability > 0 but no headers listed")
        if not g.group_alignment or any(a not in ALIGNMENTS for a in g.group_alignment):
            report.errors.append(f"{where}: groupAlignment must be a non-empty subset of {ALIGNMENTS}")
        if g.grid_position is not None:
            r, col = g.grid_position
            if not (0 <= r < rows and 0 <= col < cols):
                report.errors.append(f"{where}: gridPosition {g.grid_position} is outside "
                                     f"the {rows}x{cols} segment grid")
            else:
                pins.setdefault(g.grid_position, []).append(g.name)
        if not g.entities:
            report.errors.append(f"{where}: no entities defined")
        names = [e.name for e in g.entities]
        if len(set(names)) != len(names):
            report.errors.append(f"{where}: duplicate entity names")
        for e in g.entities:
            ewhere = f"{where} entity {e.name!r}"
            if not _is_prob(e.presence_probability):
                report.errors.append(f"{ewhere}: probability {e.presence_probability} is outside [0, 1]")
            if not registry.has_type(e.entity_type, c.generator_key):
                report.errors.append(f"{ewhere}: entity type {e.entity_type!r} has no registered generator")
            for label, opts in (("align", e.align), ("header_align", e.header_align)):
                if not opts or any(a not in ALIGNMENTS for a in opts):
                    report.errors.append(f"{ewhere}: {label} must be a non-empty subset of {ALIGNMENTS}")
            if e.add_header and not e.headers:
                report.errors.append(f"{ewhere}: addHeader set but no headers listed")
            elif not e.headers and (c.show_entity_headers_probability > 0 or tab.create_prob > 0):
                report.warnings.append(f"{ewhere}: no headers listed; the entity name is used "
                                       "where a header is required")
            if e.font_variance is not None and e.font_variance.color is not None:
                _check_color(e.font_variance.color, f"{ewhere} fontVariance", report)
            if e.font_variance is not None and e.font_variance.size is not None \
                    and e.font_variance.size < 1:
                report.errors.append(f"{ewhere}: fontVariance.size must be >= 1")
        seen_members: set[str] = set()
        for sub in g.entity_shuffle_groups:
            for member in sub:
                if member not in names:
                    report.errors.append(f"{where}: entityShuffleGroups references unknown "
                                         f"entity {member!r}")
                if member in seen_members:
                    report.errors.append(f"{where}: entity {member!r} appears in more than one "
                                         "shuffle group")
                seen_members.add(member)
    for cell, members in pins.items():
        if len(members) > 1:
            report.warnings.append(f"groups {members} share gridPosition {cell}; "
                                   "documents where they meet in one segment are regenerated")
    return report
