"""Synthetic semi-structured document generator with word-level annotations."""
from docsynth.schema import (
    SchemaError,
    StochasticSchema,
    ValidationReport,
    bundled_schema_path,
    load_bundled_schema,
    load_schema,
    parse_schema,
    validate_schema,
)
from docsynth.sampling import DocumentPermutation, RandomSource, freeze_permutation

__version__ = "0.1.0"

__all__ = [
    "DocumentPermutation", "RandomSource", "SchemaError", "StochasticSchema",
    "ValidationReport", "bundled_schema_path", "freeze_permutation",
    "load_bundled_schema", "load_schema", "parse_schema", "validate_schema",
]
