"""Evaluation engine for in-context knowledge editing of language models.

Subpackages split along the pipeline: `corpus` ingests editing
benchmarks into one JSONL shape, `lm` talks to scoring backends (plus a
scriptable mock), `editors` assembles edited prompts, `scoring` and
`control` measure edit success and collateral damage, `analysis` and
`judge` post-process matching validity, and `harness` orchestrates runs.
"""

__version__ = "0.1.0"

from . import analysis, control, corpus, editors, harness, judge, lm, scoring

__all__ = [
    "__version__",
    "analysis",
    "control",
    "corpus",
    "editors",
    "harness",
    "judge",
    "lm",
    "scoring",
]
