from .aggregate import (
    accuracy_curves,
    aggregate,
    control_deltas,
    control_table,
    format_table,
)
from .config import ENV_LM_URL, ENV_RESULTS_DIR, ConfigError, RunConfig, load_config
from .rating import (
    RatingSessionStore,
    build_rating_app,
    judgments_to_truths,
    rating_items_from_jsonl,
    rating_items_to_jsonl,
)
from .results import (
    ControlRow,
    ResultStore,
    RunRecord,
    ScoreRow,
    content_hash,
    dump_rows,
    load_rows,
)
from .runner import build_base_lm, run_sweep

__all__ = [
    "ENV_LM_URL",
    "ENV_RESULTS_DIR",
    "ConfigError",
    "ControlRow",
    "RatingSessionStore",
    "ResultStore",
    "RunConfig",
    "RunRecord",
    "ScoreRow",
    "accuracy_curves",
    "aggregate",
    "build_base_lm",
    "build_rating_app",
    "content_hash",
    "control_deltas",
    "control_table",
    "dump_rows",
    "format_table",
    "judgments_to_truths",
    "load_config",
    "load_rows",
    "rating_items_from_jsonl",
    "rating_items_to_jsonl",
    "run_sweep",
]
