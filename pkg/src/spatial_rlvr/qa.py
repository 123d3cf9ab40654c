"""QA record types, validation and record (de)serialization."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .scene import GridMap

QA_SCHEMA_VERSION = 1
LETTERS = "ABCDE"


class TaskType(str, enum.Enum):
    RELATIVE_DISTANCE = "relative_distance"
    RELATIVE_DIRECTION = "relative_direction"
    APPEARANCE_ORDER = "appearance_order"
    OBJECT_SIZE = "object_size"
    ROOM_SIZE = "room_size"
    ABSOLUTE_DISTANCE = "absolute_distance"
    COUNTING = "counting"
    OCR = "ocr"
    FREE_FORM = "free_form"
    REGRESSION = "regression"
    GENERAL_MULTI_CHOICE = "general_multi_choice"

    @property
    def family(self) -> str:
        return _FAMILY[self]


_FAMILY = {
    TaskType.RELATIVE_DISTANCE: "multi_choice",
    TaskType.RELATIVE_DIRECTION: "multi_choice",
    TaskType.APPEARANCE_ORDER: "multi_choice",
    TaskType.GENERAL_MULTI_CHOICE: "multi_choice",
    TaskType.OBJECT_SIZE: "numerical",
    TaskType.ROOM_SIZE: "numerical",
    TaskType.ABSOLUTE_DISTANCE: "numerical",
    TaskType.COUNTING: "numerical",
    TaskType.OCR: "ocr",
    TaskType.FREE_FORM: "free_form",
    TaskType.REGRESSION: "regression",
}

SPATIAL_TASKS = (
    TaskType.RELATIVE_DISTANCE,
    TaskType.RELATIVE_DIRECTION,
    TaskType.APPEARANCE_ORDER,
    TaskType.OBJECT_SIZE,
    TaskType.ROOM_SIZE,
    TaskType.ABSOLUTE_DISTANCE,
    TaskType.COUNTING,
)

UNIT_FOR_TASK = {
    TaskType.OBJECT_SIZE: "cm",
    TaskType.ROOM_SIZE: "m²",
    TaskType.ABSOLUTE_DISTANCE: "m",
    TaskType.COUNTING: "count",
}
UNITS = {"cm", "m²", "m", "count"}


@dataclass(frozen=True)
class QAPair:
    id: str
    scene_id: str
    task: TaskType
    question: str
    options: tuple[str, ...] | None = None
    answer_choice: int | None = None
    answer_value: float | None = None
    unit: str | None = None
    answer_text: str | None = None
    gt_map: GridMap | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def is_multi_choice(self) -> bool:
        return self.task.family == "multi_choice"

    @property
    def correct_option(self) -> str | None:
        if self.options is None or self.answer_choice is None:
            return None
        return self.options[self.answer_choice]

    def with_options(self, options, answer_choice: int) -> "QAPair":
        return replace(self, options=tuple(options), answer_choice=answer_choice)


def format_prompt(qa: QAPair) -> str:
    """Question text followed by lettered options for multi-choice pairs."""
    if not qa.options:
        return qa.question
    lines = [qa.question, "Options:"]
    lines += [f"{LETTERS[k]}. {opt}" for k, opt in enumerate(qa.options)]
    return "\n".join(lines)


def validate_qa(qa: QAPair) -> list[str]:
    """Return the violated QAPair invariants (empty when valid)."""
    problems = []
    family = qa.task.family
    if not qa.id:
        problems.append("empty id")
    present = {
        "answer_choice": qa.answer_choice is not None,
        "answer_value": qa.answer_value is not None,
        "answer_text": qa.answer_text is not None,
    }
    expected = {"multi_choice": "answer_choice", "numerical": "answer_value",
                "regression": "answer_value", "ocr": "answer_text",
                "free_form": "answer_text"}[family]
    if [k for k, v in present.items() if v] != [expected]:
        problems.append(f"{family} pair must carry exactly {expected}")

    if family == "multi_choice":
        opts = qa.options or ()
        if not 2 <= len(opts) <= 5:
            problems.append(f"multi-choice needs 2-5 options, got {len(opts)}")
        if len(set(opts)) != len(opts):
            problems.append("option texts are not pairwise distinct")
        if qa.answer_choice is not None and not 0 <= qa.answer_choice < len(opts):
            problems.append(f"answer_choice {qa.answer_choice} out of range")
    elif qa.options is not None:
        problems.append("options present on a non-multi-choice pair")

    if qa.answer_value is not None:
        v = qa.answer_value
        if not math.isfinite(v):
            problems.append("answer_value not finite")
        elif qa.unit in ("cm", "m²") and not v > 0:
            problems.append(f"{qa.unit} answer must be positive")
        elif qa.unit == "m" and v < 0:
            problems.append("distance answer must be non-negative")
        elif qa.unit == "count" and not (v >= 1 and float(v).is_integer()):
            problems.append("count answer must be a positive integer")
    if qa.unit is not None and qa.unit not in UNITS:
        problems.append(f"unknown unit {qa.unit!r}")
    if qa.task in UNIT_FOR_TASK and qa.unit != UNIT_FOR_TASK[qa.task]:
        problems.append(f"{qa.task.value} requires unit {UNIT_FOR_TASK[qa.task]!r}")
    if qa.gt_map is not None:
        problems.extend(qa.gt_map.problems())
    return problems


def qa_to_record(qa: QAPair) -> dict[str, Any]:
    rec = {
        "schema_version": QA_SCHEMA_VERSION,
        "id": qa.id,
        "scene_id": qa.scene_id,
        "task": qa.task.value,
        "question": qa.question,
        "options": list(qa.options) if qa.options is not None else None,
        "answer_choice": qa.answer_choice,
        "answer_value": qa.answer_value,
        "unit": qa.unit,
        "answer_text": qa.answer_text,
        "gt_map": ({"size": qa.gt_map.size, "cells": qa.gt_map.to_dict()}
                   if qa.gt_map is not None else None),
        "meta": dict(qa.meta),
    }
    return rec


_RECORD_FIELDS = set(qa_to_record(QAPair("x", "s", TaskType.COUNTING, "q")))


def qa_from_record(rec: Mapping[str, Any]) -> QAPair:
    """Inverse of :func:`qa_to_record`. Raises ValueError on a bad record."""
    if not isinstance(rec, Mapping):
        raise ValueError("record is not an object")
    unknown = set(rec) - _RECORD_FIELDS
    if unknown:
        raise ValueError(f"unknown fields {sorted(unknown)}")
    version = rec.get("schema_version", QA_SCHEMA_VERSION)
    if version != QA_SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    for name in ("id", "scene_id", "task", "question"):
        if not isinstance(rec.get(name), str):
            raise ValueError(f"field '{name}' must be text")
    gt = rec.get("gt_map")
    gt_map = None
    if gt is not None:
        cells = {k: tuple((int(x), int(y)) for x, y in v) for k, v in gt["cells"].items()}
        gt_map = GridMap(int(gt["size"]), cells)
    value = rec.get("answer_value")
    qa = QAPair(
        id=rec["id"],
        scene_id=rec["scene_id"],
        task=TaskType(rec["task"]),
        question=rec["question"],
        options=tuple(rec["options"]) if rec.get("options") is not None else None,
        answer_choice=rec.get("answer_choice"),
        answer_value=float(value) if value is not None else None,
        unit=rec.get("unit"),
        answer_text=rec.get("answer_text"),
        gt_map=gt_map,
        meta=dict(rec.get("meta") or {}),
    )
    problems = validate_qa(qa)
    if problems:
        raise ValueError("; ".join(problems))
    return qa
