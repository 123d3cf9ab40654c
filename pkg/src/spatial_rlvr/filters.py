"""Corpus filtering: noisy objects, per-video caps, value balancing and
answer-position shuffling.

Every step derives its randomness from (cfg.seed, pair id), never from the
incoming order or option positions, so ``apply_filters`` is idempotent.
"""

from __future__ import annotations

import hashlib
import math
import random
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qa import QAPair, TaskType

POSITION_TOLERANCE = 0.02


@dataclass(frozen=True)
class FilterConfig:
    max_qa_per_video: int = 20
    noisy_categories: frozenset[str] = field(
        default_factory=lambda: frozenset({"wall", "floor", "ceiling"}))
    min_object_size_cm: float = 10.0
    value_bins: int = 10
    seed: int = 0
    # bins holding more than factor x (median non-empty bin count) are thinned
    bin_quota_factor: float = 2.0

    def __post_init__(self):
        if self.max_qa_per_video < 1:
            raise ValueError("max_qa_per_video must be >= 1")
        if self.value_bins < 2:
            raise ValueError("value_bins must be >= 2")
        if self.bin_quota_factor < 1:
            raise ValueError("bin_quota_factor must be >= 1")


def _rank(seed: int, *parts: str) -> int:
    digest = hashlib.sha256("\x1f".join([str(seed), *parts]).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _is_noisy(qa: QAPair, noisy: frozenset[str]) -> bool:
    names = qa.meta.get("objects")
    if names is None:
        # imported pair without provenance: look at the question words
        return bool(set(re.findall(r"[a-z]+", qa.question.lower())) & noisy)
    return any(str(n).lower() in noisy for n in names)


def _too_small(qa: QAPair, min_cm: float) -> bool:
    if qa.is_multi_choice:
        return False
    sizes = qa.meta.get("object_sizes_cm") or []
    return any(s < min_cm for s in sizes)


def cap_per_video(pairs: Sequence[QAPair], cap: int, seed: int) -> list[QAPair]:
    groups: dict[tuple[str, TaskType], list[QAPair]] = defaultdict(list)
    for qa in pairs:
        groups[qa.scene_id, qa.task].append(qa)
    keep: set[str] = set()
    for group in groups.values():
        chosen = sorted(group, key=lambda q: _rank(seed, "cap", q.id))[:cap]
        keep.update(q.id for q in chosen)
    return [qa for qa in pairs if qa.id in keep]


def equal_width_bins(values: Sequence[float], bins: int) -> np.ndarray:
    """Bin index of each value over equal-width bins spanning the observed range."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros(len(v), dtype=int)
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(int)
    return np.clip(idx, 0, bins - 1)


def balance_values(pairs: Sequence[QAPair], bins: int, factor: float, seed: int) -> list[QAPair]:
    """Thin over-full value bins of each numerical task.

    The quota is ceil(factor x median non-empty bin count). Thinning keeps
    that median and the extreme values (hence the bin edges) unchanged, so a
    second pass drops nothing.
    """
    by_task: dict[TaskType, list[QAPair]] = defaultdict(list)
    for qa in pairs:
        if qa.answer_value is not None:
            by_task[qa.task].append(qa)
    drop: set[str] = set()
    for task, group in by_task.items():
        idx = equal_width_bins([q.answer_value for q in group], bins)
        members: dict[int, list[QAPair]] = defaultdict(list)
        for b, qa in zip(idx, group):
            members[int(b)].append(qa)
        quota = math.ceil(factor * float(np.median([len(m) for m in members.values()])))
        values = [q.answer_value for q in group]
        lo, hi = min(values), max(values)
        for m in members.values():
            if len(m) <= quota:
                continue
            # extremes first, then seeded order
            ordered = sorted(m, key=lambda q: (q.answer_value not in (lo, hi),
                                               _rank(seed, "bin", task.value, q.id)))
            drop.update(q.id for q in ordered[quota:])
    return [qa for qa in pairs if qa.id not in drop]


def balance_positions(
    pairs: Sequence[QAPair], seed: int, diagnostics: list[str] | None = None,
) -> list[QAPair]:
    """Reassign correct-option positions so each slot is used equally often.

    Pairs are grouped by option count; within a group, target positions are
    a seeded round-robin, so slot frequencies differ by at most one pair.
    Distractor order is a seeded permutation of the sorted distractors.
    """
    groups: dict[int, list[int]] = defaultdict(list)
    for k, qa in enumerate(pairs):
        if qa.is_multi_choice and qa.options:
            groups[len(qa.options)].append(k)
    out = list(pairs)
    for n_opt, members in groups.items():
        ordered = sorted(members, key=lambda k: _rank(seed, "pos", pairs[k].id))
        for slot, k in enumerate(ordered):
            qa = pairs[k]
            target = slot % n_opt
            correct = qa.correct_option
            rest = sorted(o for o in qa.options if o != correct)
            random.Random(_rank(seed, "perm", qa.id)).shuffle(rest)
            rest.insert(target, correct)
            out[k] = qa.with_options(rest, target)
        worst = 1.0 / len(members) if len(members) % n_opt else 0.0
        if diagnostics is not None and worst > POSITION_TOLERANCE:
            diagnostics.append(
                f"{len(members)} pairs with {n_opt} options are too few to keep every "
                f"answer position within {POSITION_TOLERANCE:.0%} of uniform")
    return out


def apply_filters(
    pairs: Sequence[QAPair], cfg: FilterConfig, diagnostics: list[str] | None = None,
) -> list[QAPair]:
    """Run the full filter chain; notes are appended to ``diagnostics``."""
    noisy = frozenset(c.lower() for c in cfg.noisy_categories)
    kept = [qa for qa in pairs if not _is_noisy(qa, noisy)]
    kept = [qa for qa in kept if not _too_small(qa, cfg.min_object_size_cm)]
    removed = len(pairs) - len(kept)
    kept = cap_per_video(kept, cfg.max_qa_per_video, cfg.seed)
    capped = len(pairs) - removed - len(kept)
    before = len(kept)
    kept = balance_values(kept, cfg.value_bins, cfg.bin_quota_factor, cfg.seed)
    if diagnostics is not None:
        diagnostics.append(
            f"removed {removed} noisy/small, {capped} over cap, "
            f"{before - len(kept)} for value balance; kept {len(kept)}")
    return balance_positions(kept, cfg.seed, diagnostics)
