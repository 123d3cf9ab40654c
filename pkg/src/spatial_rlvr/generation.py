"""Template-driven generators for the six spatial QA families."""

from __future__ import annotations

import itertools
import json
import logging
import random
import string
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Mapping

from . import geometry
from .errors import AmbiguousDirectionError, GenerationError, SpatialRLVRError, TemplateError, TieError
from .qa import SPATIAL_TASKS, UNIT_FOR_TASK, QAPair, TaskType
from .scene import DEFAULT_MAP_SIZE, GridMap, SceneMeta, build_grid_map

log = logging.getLogger(__name__)

TIE_TOLERANCE_M = 0.01
DIRECTION_ATTEMPTS = 8
DEFAULT_MIN_OBJECT_SIZE_CM = 10.0


@lru_cache(maxsize=1)
def load_templates() -> dict:
    text = resources.files("spatial_rlvr").joinpath("data/templates.json").read_text("utf-8")
    return json.loads(text)


def template_for(task: TaskType) -> str:
    return load_templates()["default_for_task"][task.value]


def render_question(template_id: str, slots: Mapping[str, str]) -> str:
    """Fill a template's ``{slot}`` placeholders."""
    table = load_templates()["templates"]
    if template_id not in table:
        raise TemplateError(f"unknown template id {template_id!r}")
    template = table[template_id]
    names = [f for _, f, _, _ in string.Formatter().parse(template) if f is not None]
    for name in names:
        if name not in slots:
            raise TemplateError(f"template {template_id!r} is missing slot {name!r}")
    return template.format_map(dict(slots))


def _rng(seed: int) -> random.Random:
    return random.Random(seed)


def _unique(scene: SceneMeta, need: int, task: str) -> dict:
    uniq = scene.unique_objects()
    if len(uniq) < need:
        raise GenerationError(
            f"{task} needs >= {need} unique-category objects, scene "
            f"{scene.scene_id!r} has {len(uniq)}")
    return uniq


def _base(scene, task, question, template_id, seed, objects, gt_map=None, **fields) -> QAPair:
    meta = {"template_id": template_id, "seed": seed, "objects": objects}
    meta.update(fields.pop("meta", {}))
    if gt_map is None:
        gt_map = build_grid_map(scene, DEFAULT_MAP_SIZE)
    return QAPair(
        id=f"{scene.scene_id}-{task.value}-{seed}",
        scene_id=scene.scene_id,
        task=task,
        question=question,
        gt_map=gt_map,
        meta=meta,
        **fields,
    )


def gen_relative_distance(scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None) -> QAPair:
    """Which of four candidates is closest (box-to-box) to a target?"""
    uniq = _unique(scene, 5, "relative distance")
    rng = _rng(rng_seed)
    target, *cands = rng.sample(sorted(uniq), 5)
    dists = [geometry.min_box_distance(uniq[target].bbox, uniq[c].bbox) for c in cands]
    order = sorted(range(4), key=dists.__getitem__)
    if dists[order[1]] - dists[order[0]] < TIE_TOLERANCE_M:
        raise TieError(f"tie: {cands[order[0]]} and {cands[order[1]]} are equally close to {target}")
    slots = {"target": target, **{f"c{k + 1}": c for k, c in enumerate(cands)}}
    tid = template_for(TaskType.RELATIVE_DISTANCE)
    return _base(
        scene, TaskType.RELATIVE_DISTANCE, render_question(tid, slots), tid, rng_seed,
        [target, *cands], gt_map,
        options=tuple(cands), answer_choice=order[0],
        meta={"slots": slots, "instance_ids": [uniq[c].instance_id for c in [target, *cands]]},
    )


def gen_relative_direction(
    scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None,
    attempts: int = DIRECTION_ATTEMPTS,
) -> QAPair:
    """Left/right of a query object for an observer at one object facing another."""
    uniq = _unique(scene, 3, "relative direction")
    rng = _rng(rng_seed)
    names = sorted(uniq)
    for _ in range(attempts):
        standing, facing, query = rng.sample(names, 3)
        try:
            answer = geometry.relative_direction(
                uniq[standing].bbox.center, uniq[facing].bbox.center,
                uniq[query].bbox.center, scene.up_axis)
        except AmbiguousDirectionError:
            continue
        break
    else:
        raise GenerationError(f"no non-collinear triple after {attempts} attempts")
    options = [geometry.Direction.LEFT.value, geometry.Direction.RIGHT.value]
    rng.shuffle(options)
    slots = {"standing": standing, "facing": facing, "query": query}
    tid = template_for(TaskType.RELATIVE_DIRECTION)
    return _base(
        scene, TaskType.RELATIVE_DIRECTION, render_question(tid, slots), tid, rng_seed,
        [standing, facing, query], gt_map,
        options=tuple(options), answer_choice=options.index(answer.value),
        meta={"slots": slots, "instance_ids": [uniq[c].instance_id for c in (standing, facing, query)]},
    )


def _ordering_text(names: Iterable[str]) -> str:
    return ", ".join(names)


def gen_appearance_order(scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None) -> QAPair:
    """Order four objects by the frame in which each first appears."""
    uniq = _unique(scene, 4, "appearance order")
    rng = _rng(rng_seed)
    by_frame: dict[int, list[str]] = {}
    for name in sorted(uniq):
        by_frame.setdefault(uniq[name].first_frame, []).append(name)
    if len(by_frame) < 4:
        raise GenerationError("cannot find four objects with distinct first frames")
    # one object per distinct frame guarantees a strict order
    frames = rng.sample(sorted(by_frame), 4)
    picked = [rng.choice(by_frame[f]) for f in frames]
    truth = sorted(picked, key=lambda c: uniq[c].first_frame)
    perms = [p for p in itertools.permutations(picked) if list(p) != truth]
    distractors = rng.sample(perms, 3)
    options = [_ordering_text(truth)] + [_ordering_text(p) for p in distractors]
    rng.shuffle(options)
    slots = {f"c{k + 1}": c for k, c in enumerate(picked)}
    tid = template_for(TaskType.APPEARANCE_ORDER)
    return _base(
        scene, TaskType.APPEARANCE_ORDER, render_question(tid, slots), tid, rng_seed,
        picked, gt_map,
        options=tuple(options), answer_choice=options.index(_ordering_text(truth)),
        meta={"slots": slots, "first_frames": {c: uniq[c].first_frame for c in picked}},
    )


def gen_object_size(
    scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None,
    min_object_size_cm: float = DEFAULT_MIN_OBJECT_SIZE_CM,
) -> QAPair:
    uniq = _unique(scene, 1, "object size")
    sizes = {c: geometry.longest_dimension(o) for c, o in uniq.items()}
    eligible = sorted(c for c, s in sizes.items() if s >= min_object_size_cm)
    if not eligible:
        raise GenerationError(f"no object reaches {min_object_size_cm} cm")
    name = _rng(rng_seed).choice(eligible)
    tid = template_for(TaskType.OBJECT_SIZE)
    return _base(
        scene, TaskType.OBJECT_SIZE, render_question(tid, {"object": name}), tid, rng_seed,
        [name], gt_map,
        answer_value=round(sizes[name], 1), unit=UNIT_FOR_TASK[TaskType.OBJECT_SIZE],
        meta={"object_sizes_cm": [round(sizes[name], 1)]},
    )


def gen_room_size(
    scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None,
    alpha: float | None = None,
) -> QAPair:
    pts = scene.floor_points
    if alpha is None:
        alpha = geometry.default_alpha(pts)
    area = geometry.room_area_alpha_shape(pts, alpha)
    tid = template_for(TaskType.ROOM_SIZE)
    return _base(
        scene, TaskType.ROOM_SIZE, render_question(tid, {}), tid, rng_seed, [], gt_map,
        answer_value=round(area, 1), unit=UNIT_FOR_TASK[TaskType.ROOM_SIZE],
        meta={"alpha": alpha},
    )


def gen_absolute_distance(
    scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None,
    samples_per_object: int = geometry.DEFAULT_SAMPLES_PER_OBJECT,
) -> QAPair:
    uniq = _unique(scene, 2, "absolute distance")
    a, b = _rng(rng_seed).sample(sorted(uniq), 2)
    dist = geometry.sampled_min_distance(uniq[a], uniq[b], samples_per_object, rng_seed)
    tid = template_for(TaskType.ABSOLUTE_DISTANCE)
    return _base(
        scene, TaskType.ABSOLUTE_DISTANCE, render_question(tid, {"a": a, "b": b}), tid, rng_seed,
        [a, b], gt_map,
        answer_value=round(dist, 2), unit=UNIT_FOR_TASK[TaskType.ABSOLUTE_DISTANCE],
        meta={"object_sizes_cm": [round(geometry.longest_dimension(uniq[c]), 1) for c in (a, b)]},
    )


def gen_counting(scene: SceneMeta, rng_seed: int, gt_map: GridMap | None = None) -> QAPair:
    counts = scene.category_counts()
    if not counts:
        raise GenerationError(f"scene {scene.scene_id!r} has no objects")
    name = _rng(rng_seed).choice(sorted(counts))
    tid = template_for(TaskType.COUNTING)
    return _base(
        scene, TaskType.COUNTING, render_question(tid, {"category": name}), tid, rng_seed,
        [name], gt_map,
        answer_value=float(counts[name]), unit=UNIT_FOR_TASK[TaskType.COUNTING],
    )


GENERATORS: dict[TaskType, Callable[..., QAPair]] = {
    TaskType.RELATIVE_DISTANCE: gen_relative_distance,
    TaskType.RELATIVE_DIRECTION: gen_relative_direction,
    TaskType.APPEARANCE_ORDER: gen_appearance_order,
    TaskType.OBJECT_SIZE: gen_object_size,
    TaskType.ROOM_SIZE: gen_room_size,
    TaskType.ABSOLUTE_DISTANCE: gen_absolute_distance,
    TaskType.COUNTING: gen_counting,
}


def generate_scene_qa(
    scene: SceneMeta,
    seed: int,
    per_task: int = 1,
    tasks: Iterable[TaskType] = SPATIAL_TASKS,
    attempts: int = 4,
    map_size: int = DEFAULT_MAP_SIZE,
) -> list[QAPair]:
    """Generate up to ``per_task`` pairs of every task type for one scene.

    Each pair draws its own seed from a stream keyed by (seed, scene_id, task);
    failed draws (ties, too few objects, ...) are retried ``attempts`` times
    and then skipped. Duplicate questions within a task are dropped.
    """
    gt_map = build_grid_map(scene, map_size)
    pairs: list[QAPair] = []
    for task in tasks:
        rng = random.Random(f"{seed}/{scene.scene_id}/{task.value}")
        seen: set[tuple] = set()
        for _ in range(per_task):
            for _ in range(attempts):
                pair_seed = rng.getrandbits(32)
                try:
                    qa = GENERATORS[task](scene, pair_seed, gt_map=gt_map)
                except SpatialRLVRError as exc:
                    log.debug("skip %s/%s: %s", scene.scene_id, task.value, exc)
                    continue
                key = (qa.question, qa.correct_option)
                if key in seen:
                    continue
                seen.add(key)
                pairs.append(qa)
                break
    return pairs
