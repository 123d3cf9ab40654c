"""JSONL corpus I/O, corpus statistics and difficulty-based selection."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import ExportError
from .filters import equal_width_bins
from .qa import QAPair, TaskType, qa_from_record, qa_to_record

log = logging.getLogger(__name__)


def dumps_record(record: dict) -> str:
    """Canonical one-line JSON: sorted keys, UTF-8 text, no spaces."""
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def export_jsonl(pairs: Iterable[QAPair], sink: IO[str]) -> int:
    written = 0
    for qa in pairs:
        line = dumps_record(qa_to_record(qa)) + "\n"
        try:
            sink.write(line)
        except (OSError, ValueError) as exc:
            raise ExportError(f"write failed: {exc}", written) from exc
        written += 1
    return written


def import_jsonl(source: IO[str], diagnostics: list[str] | None = None) -> list[QAPair]:
    """Read QA records; bad lines are skipped and reported by line number."""
    pairs = []
    try:
        lines = list(source)
    except (OSError, UnicodeDecodeError) as exc:
        raise OSError(f"cannot read QA source: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            pairs.append(qa_from_record(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            msg = f"line {lineno}: {exc}"
            log.warning(msg)
            if diagnostics is not None:
                diagnostics.append(msg)
    return pairs


@dataclass(frozen=True)
class GradedSample:
    qa_id: str
    group_rewards: tuple[int, ...]

    def __post_init__(self):
        if not self.group_rewards:
            raise ValueError("need at least one graded response")
        if any(r not in (0, 1) for r in self.group_rewards):
            raise ValueError("grades must be 0 or 1")


@dataclass(frozen=True)
class DifficultySplit:
    kept: tuple[GradedSample, ...]
    dropped_easy: tuple[GradedSample, ...]
    dropped_hard: tuple[GradedSample, ...]


def difficulty_sample(graded: Sequence[GradedSample]) -> DifficultySplit:
    """Keep samples the policy gets partially right; drop all-correct
    (too easy) and all-wrong (likely noise) ones."""
    kept, easy, hard = [], [], []
    for s in graded:
        if all(s.group_rewards):
            easy.append(s)
        elif not any(s.group_rewards):
            hard.append(s)
        else:
            kept.append(s)
    return DifficultySplit(tuple(kept), tuple(easy), tuple(hard))


def grade_scores(score_records: Iterable[dict]) -> list[GradedSample]:
    """Group score records by qa_id; a response counts as correct when r_task == 1."""
    groups: dict[str, list[int]] = {}
    for rec in score_records:
        groups.setdefault(rec["qa_id"], []).append(int(rec["r_task"] == 1))
    return [GradedSample(k, tuple(v)) for k, v in groups.items()]


@dataclass
class CorpusStats:
    total: int = 0
    per_task: dict[str, int] = field(default_factory=dict)
    per_answer_position: dict[int, int] = field(default_factory=dict)
    numeric_histograms: dict[str, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "per_task": dict(sorted(self.per_task.items())),
            "per_answer_position": {str(k): v for k, v in sorted(self.per_answer_position.items())},
            "numeric_histograms": dict(sorted(self.numeric_histograms.items())),
        }


def corpus_stats(pairs: Sequence[QAPair], value_bins: int = 10) -> CorpusStats:
    per_task = Counter(qa.task.value for qa in pairs)
    positions = Counter(qa.answer_choice for qa in pairs if qa.answer_choice is not None)
    hists = {}
    for task in TaskType:
        values = sorted(qa.answer_value for qa in pairs
                        if qa.task is task and qa.answer_value is not None)
        if not values:
            continue
        idx = equal_width_bins(values, value_bins)
        counts = np.bincount(idx, minlength=value_bins)
        hists[task.value] = {
            "min": values[0],
            "max": values[-1],
            "counts": [int(c) for c in counts],
        }
    return CorpusStats(len(pairs), dict(per_task), dict(positions), hists)
