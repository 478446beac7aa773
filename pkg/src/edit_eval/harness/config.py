"""Run configuration: the full description of a sweep, validated up front.

Validation happens before any model call; in particular the scoring
method applicability matrix is enforced here, so asking for MC on a
dataset without answer alternatives fails as a config error, not a
runtime one.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from ..editors import EditorKind
from ..scoring import METHODS_BY_DATASET, MethodInapplicableError, ScoringMethod, check_method_applicable

ENV_LM_URL = "EDIT_EVAL_LM_URL"
ENV_RESULTS_DIR = "EDIT_EVAL_RESULTS_DIR"


class ConfigError(ValueError):
    """Invalid run configuration."""


def parse_editor_spec(spec: str) -> tuple[EditorKind, str | None]:
    """Editor specs are kind names; external editors are "external:<variant>"."""
    if spec.startswith("external:"):
        variant = spec.split(":", 1)[1]
        if not variant:
            raise ConfigError("external editor spec needs a variant: external:<tag>")
        return EditorKind.EXTERNAL, variant
    try:
        kind = EditorKind(spec)
    except ValueError:
        raise ConfigError(f"unknown editor {spec!r}") from None
    if kind is EditorKind.EXTERNAL:
        raise ConfigError("external editor spec needs a variant: external:<tag>")
    return kind, None


@dataclass(frozen=True)
class RunConfig:
    corpus_paths: dict[str, str]  # dataset name -> unified corpus JSONL path
    editors: tuple[str, ...] = ("no_edit", "in_context", "context_retriever")
    batch_sizes: tuple[int, ...] = (1, 16, 64, 512, 2048)
    scoring_methods: tuple[str, ...] = ("auto",)  # "auto" = all applicable per dataset
    generate_length: int = 20
    sample_n: int = 2048
    seed: int = 0
    knn: int = 4
    lm_url: str | None = None
    mock_script_path: str | None = None
    context_window: int = 2048
    control_task_paths: tuple[str, ...] = ()
    concurrency: int = 1
    generation_budget: int = 64
    redact_generated_text: bool = False
    results_dir: str = "results"

    def __post_init__(self) -> None:
        if not self.corpus_paths:
            raise ConfigError("at least one dataset corpus is required")
        for dataset in self.corpus_paths:
            if dataset not in METHODS_BY_DATASET:
                raise ConfigError(f"unknown dataset {dataset!r}")
        if not self.editors:
            raise ConfigError("at least one editor is required")
        for editor in self.editors:
            parse_editor_spec(editor)
        if not self.batch_sizes:
            raise ConfigError("at least one batch size is required")
        if any(size < 1 for size in self.batch_sizes):
            raise ConfigError("batch sizes must be >= 1")
        if list(self.batch_sizes) != sorted(self.batch_sizes):
            raise ConfigError("batch_sizes must be sorted ascending")
        if self.generate_length < 1:
            raise ConfigError("generate_length must be >= 1")
        if self.sample_n < 0:
            raise ConfigError("sample_n must be >= 0")
        if self.knn < 1:
            raise ConfigError("knn must be >= 1")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.generation_budget < 1:
            raise ConfigError("generation_budget must be >= 1")
        if (self.lm_url is None) == (self.mock_script_path is None):
            raise ConfigError("exactly one of lm_url or mock_script_path is required")
        if self.mock_script_path is not None and any(
            editor.startswith("external:") for editor in self.editors
        ):
            raise ConfigError("external editor variants require a remote lm_url backend")
        for method in self.scoring_methods:
            if method == "auto":
                continue
            for dataset in self.corpus_paths:
                try:
                    check_method_applicable(method, dataset)
                except MethodInapplicableError as exc:
                    raise ConfigError(str(exc)) from None

    @property
    def datasets(self) -> tuple[str, ...]:
        return tuple(sorted(self.corpus_paths))

    def methods_for(self, dataset: str) -> tuple[ScoringMethod, ...]:
        if self.scoring_methods == ("auto",):
            return METHODS_BY_DATASET[dataset]
        return tuple(ScoringMethod(method) for method in self.scoring_methods)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["corpus_paths"] = dict(self.corpus_paths)
        for key in ("editors", "batch_sizes", "scoring_methods", "control_task_paths"):
            data[key] = list(data[key])
        return data


def load_config(path: str | Path) -> RunConfig:
    """Read a JSON run config; relative paths resolve against the file's directory.

    EDIT_EVAL_LM_URL supplies lm_url when the file names no model source;
    EDIT_EVAL_RESULTS_DIR overrides a missing results_dir.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    base = path.parent

    def resolve(p: str) -> str:
        return str((base / p) if not os.path.isabs(p) else Path(p))

    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    corpus_paths = data.get("corpus_paths")
    if not isinstance(corpus_paths, dict):
        raise ConfigError("corpus_paths must map dataset names to file paths")
    data["corpus_paths"] = {name: resolve(p) for name, p in corpus_paths.items()}
    if data.get("mock_script_path"):
        data["mock_script_path"] = resolve(data["mock_script_path"])
    data["control_task_paths"] = tuple(resolve(p) for p in data.get("control_task_paths", ()))
    for key in ("editors", "batch_sizes", "scoring_methods"):
        if key in data:
            data[key] = tuple(data[key])
    if not data.get("lm_url") and not data.get("mock_script_path"):
        env_url = os.environ.get(ENV_LM_URL)
        if env_url:
            data["lm_url"] = env_url
    if "results_dir" in data:
        data["results_dir"] = resolve(data["results_dir"])
    else:
        data["results_dir"] = os.environ.get(ENV_RESULTS_DIR, str(base / "results"))
    return RunConfig(**data)
