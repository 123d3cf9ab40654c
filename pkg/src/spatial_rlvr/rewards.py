"""Verifiable rewards and their map-augmented combination.

The total for one response is

    format + task + map + length   when the task reward is exactly 1
    format + task + length         otherwise

where the map term is only present when both a predicted map and a ground
truth map exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import text_metrics
from .errors import AnswerParseError
from .parser import ParsedResponse, extract_choice, extract_number
from .qa import QAPair
from .scene import DEFAULT_MAP_SIZE, GridMap

# float slack on threshold comparisons so decimal boundaries (e.g. a 30%
# error against theta = 0.70) are not lost to rounding
THRESHOLD_SLACK = 1e-12
REGRESSION_EPS = 1e-9


def _default_thresholds() -> tuple[float, ...]:
    return tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


@dataclass(frozen=True)
class RewardConfig:
    thresholds: tuple[float, ...] = field(default_factory=_default_thresholds)
    l_min: int = 360
    l_max: int = 512
    length_bonus: float = 0.5
    map_size: int = DEFAULT_MAP_SIZE
    use_map_reward: bool = True

    def __post_init__(self):
        t = self.thresholds
        if not t or any(not 0 < x < 1 for x in t) or any(a >= b for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly increasing values in (0, 1)")
        if not 0 <= self.l_min <= self.l_max:
            raise ValueError("need 0 <= l_min <= l_max")
        if self.length_bonus < 0:
            raise ValueError("length_bonus must be >= 0")
        if self.map_size < 1:
            raise ValueError("map_size must be positive")


@dataclass(frozen=True)
class RewardBreakdown:
    r_format: float
    r_task: float
    r_map: float | None
    r_length: float
    total: float
    diagnostics: tuple[str, ...] = ()


def reward_format(resp: ParsedResponse) -> int:
    return int(resp.well_formed)


def reward_multi_choice(predicted: int, truth: int) -> int:
    return int(predicted == truth)


def reward_numerical(predicted: float, truth: float, cfg: RewardConfig | None = None) -> float:
    """Fraction of thresholds theta with |pred - truth| / truth <= 1 - theta.

    The denominator is ``truth`` itself, not its magnitude. A zero truth
    scores 1 only for an exact zero prediction.
    """
    cfg = cfg or RewardConfig()
    if truth == 0:
        return 1.0 if predicted == 0 else 0.0
    rel = abs(predicted - truth) / truth
    passed = sum(1 for theta in cfg.thresholds if rel <= 1 - theta + THRESHOLD_SLACK)
    return passed / len(cfg.thresholds)


def reward_ocr(predicted: str, truth: str) -> float:
    ref = text_metrics.normalize(truth)
    if not ref:
        raise ValueError("OCR ground truth is empty after normalization")
    wer = text_metrics.word_error_rate(text_metrics.normalize(predicted), ref)
    return max(0.0, 1.0 - wer)


def reward_free_form(predicted: str, truth: str) -> float:
    return text_metrics.mean_rouge(text_metrics.normalize(predicted), text_metrics.normalize(truth))


def reward_regression(predicted: float, truth: float) -> float:
    return max(0.0, 1.0 - abs(predicted - truth) / max(abs(truth), REGRESSION_EPS))


def _centroid(cells) -> tuple[float, float]:
    return (sum(c[0] for c in cells) / len(cells), sum(c[1] for c in cells) / len(cells))


def reward_map(predicted: GridMap, truth: GridMap, size: int | None = None) -> float:
    """Instance-weighted mean of (1 - centroid distance / grid diagonal).

    Each ground-truth category is weighted by its instance count; a category
    missing from the prediction contributes nothing. Categories only present
    in the prediction are ignored.
    """
    size = size or truth.size
    total = sum(len(c) for c in truth.cells.values())
    if total == 0:
        return 0.0
    diag = math.sqrt(2.0 * size * size)
    score = 0.0
    for category, gt_cells in truth.cells.items():
        pred_cells = predicted.cells.get(category)
        if not pred_cells:
            continue
        (xp, yp), (xg, yg) = _centroid(pred_cells), _centroid(gt_cells)
        score += len(gt_cells) / total * (1.0 - math.hypot(xp - xg, yp - yg) / diag)
    return min(1.0, max(0.0, score))


def reward_length(think_length: int, task_correct: bool, cfg: RewardConfig | None = None) -> float:
    cfg = cfg or RewardConfig()
    if task_correct and cfg.l_min <= think_length <= cfg.l_max:
        return cfg.length_bonus
    return 0.0


def task_reward(answer_text: str, qa: QAPair, cfg: RewardConfig) -> float:
    """Task-family reward for an answer; AnswerParseError if unextractable."""
    family = qa.task.family
    if family == "multi_choice":
        return float(reward_multi_choice(extract_choice(answer_text, qa.options), qa.answer_choice))
    if family == "numerical":
        return reward_numerical(extract_number(answer_text), qa.answer_value, cfg)
    if family == "regression":
        return reward_regression(extract_number(answer_text), qa.answer_value)
    if family == "ocr":
        return reward_ocr(answer_text, qa.answer_text)
    return reward_free_form(answer_text, qa.answer_text)


def score_response(resp: ParsedResponse, qa: QAPair, cfg: RewardConfig | None = None) -> RewardBreakdown:
    """Score one response against its QA pair.

    Malformed responses score zero throughout; an answer that cannot be
    extracted gives a zero task reward with a diagnostic.
    """
    cfg = cfg or RewardConfig()
    notes: list[str] = []
    r_format = float(reward_format(resp))
    if not resp.well_formed:
        return RewardBreakdown(0.0, 0.0, None, 0.0, 0.0, ("malformed response",))

    try:
        r_task = task_reward(resp.answer_text.strip(), qa, cfg)
    except AnswerParseError as exc:
        notes.append(str(exc))
        r_task = 0.0

    correct = r_task == 1.0
    r_map = None
    if correct and qa.gt_map is not None:
        if resp.parsed_map is not None:
            r_map = reward_map(resp.parsed_map, qa.gt_map) if cfg.use_map_reward else 0.0
        elif resp.map_error:
            notes.append(f"map ignored: {resp.map_error}")
    r_length = reward_length(resp.think_length, correct, cfg)
    total = r_format + r_task + (r_map if r_map is not None else 0.0) + r_length
    return RewardBreakdown(r_format, r_task, r_map, r_length, total, tuple(notes))


def breakdown_record(record_id: str, qa_id: str, b: RewardBreakdown) -> dict:
    return {
        "id": record_id,
        "qa_id": qa_id,
        "r_format": b.r_format,
        "r_task": b.r_task,
        "r_map": b.r_map,
        "r_length": b.r_length,
        "total": b.total,
        "diagnostics": list(b.diagnostics),
    }
