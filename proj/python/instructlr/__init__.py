"""Python access to the instructlr core: rule engine, metrics, annotation merge, cost model
and the pipeline runner."""

from __future__ import annotations

import json
import os
from typing import Iterable, Optional, Sequence

from . import _core
from ._core import ConfigError, Error, ParseError, SchemaError, gleu, krippendorff_alpha, percent

__all__ = [
    "ConfigError",
    "Error",
    "ParseError",
    "SchemaError",
    "RuleEngine",
    "annotation_agreement",
    "cost_table",
    "dataset_stats",
    "gleu",
    "import_annotations",
    "krippendorff_alpha",
    "merge_annotations",
    "parse_checker_output",
    "percent",
    "run_pipeline",
    "scenario_cost",
]


class RuleEngine:
    """Zarma rule checks over the shipped lexicon and glossary."""

    def __init__(self, data_dir: str | os.PathLike, lang: str = "dje") -> None:
        self._engine = _core.RuleEngine(os.fspath(data_dir), lang)

    def check(self, sentence: str) -> list[dict]:
        return json.loads(self._engine._check(sentence))

    def suggest(self, sentence: str) -> list[dict]:
        return json.loads(self._engine._suggest(sentence))


def parse_checker_output(text: str) -> dict:
    """Checker verdict with its triage status."""
    return json.loads(_core._parse_checker_output(text))


def scenario_cost(scenario: dict) -> dict:
    return json.loads(_core._scenario_cost(json.dumps(scenario)))


def cost_table(scenarios: str | os.PathLike, preset: str = "") -> list[dict]:
    return json.loads(_core._cost_table(os.fspath(scenarios), preset))


def import_annotations(csv_text: str, annotator: str, known_ids: Iterable[str] = ()) -> dict:
    """Validated records and per-row errors from a filled review sheet."""
    return json.loads(_core._import_annotations(csv_text, annotator, set(known_ids)))


def merge_annotations(records: Sequence[dict]) -> list[dict]:
    return json.loads(_core._merge_annotations(json.dumps(list(records))))


def annotation_agreement(records: Sequence[dict], items: int = 0) -> dict:
    return json.loads(_core._annotation_agreement(json.dumps(list(records)), items))


def dataset_stats(jsonl_path: str | os.PathLike) -> dict:
    return json.loads(_core._dataset_stats(os.fspath(jsonl_path)))


def run_pipeline(config: str | os.PathLike, only: Optional[Iterable[str]] = None, force: bool = False) -> dict:
    """Runs the configured stages and returns the run report."""
    return json.loads(_core._run_pipeline(os.fspath(config), set(only or ()), force))
