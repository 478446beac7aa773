"""Benchmark ingestion: native-format parsers, unified model, sampling, batching."""

from .parsers import (
    CorpusParseError,
    ParseResult,
    parse_counterfact,
    parse_dataset,
    parse_mquake,
    parse_rippleedits,
    parse_zsre,
    render_fact_statement,
)
from .sampling import EditBatch, balanced_quotas, build_edit_batches, sample_examples
from .types import (
    DATASETS,
    KINDS_BY_DATASET,
    DatasetExample,
    EditRequest,
    FactTriple,
    TestCaseKind,
    TestQuery,
)
from .unified import dump_examples, example_from_dict, example_to_dict, load_examples

__all__ = [
    "DATASETS",
    "KINDS_BY_DATASET",
    "CorpusParseError",
    "DatasetExample",
    "EditBatch",
    "EditRequest",
    "FactTriple",
    "ParseResult",
    "TestCaseKind",
    "TestQuery",
    "balanced_quotas",
    "build_edit_batches",
    "dump_examples",
    "example_from_dict",
    "example_to_dict",
    "load_examples",
    "parse_counterfact",
    "parse_dataset",
    "parse_mquake",
    "parse_rippleedits",
    "parse_zsre",
    "render_fact_statement",
    "sample_examples",
]
