"""Scene metadata schema, validation and ground-truth cognitive maps.

A scene document is a JSON object::

    {
      "schema_version": 1,              # optional
      "scene_id": "scene0000_00",
      "fps": 24,
      "frame_count": 480,
      "up_axis": "y",                   # optional, "y" (default) or "z"
      "floor_points": [[x, z], ...],    # ground-plane coordinates, meters
      "objects": [
        {"instance_id": "3", "category": "chair",
         "center": [x, y, z], "extents": [dx, dy, dz],
         "first_frame": 17,
         "surface_points": [[x, y, z], ...]}   # optional
      ]
    }

Unknown fields are rejected. See docs/schema.md for the full reference.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import (
    DegenerateSceneError,
    SceneInvariantError,
    SceneSchemaError,
    SceneSyntaxError,
)

SCHEMA_VERSION = 1
DEFAULT_MAP_SIZE = 10
DEFAULT_SURFACE_SLACK = 0.05  # meters

Vec3 = tuple[float, float, float]
Vec2 = tuple[float, float]
Cell = tuple[int, int]

# index pairs of the horizontal axes for each supported up axis
GROUND_AXES = {"y": (0, 2), "z": (0, 1)}


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by its center and full side lengths (meters)."""

    center: Vec3
    extents: Vec3

    @property
    def lower(self) -> Vec3:
        return tuple(c - e / 2.0 for c, e in zip(self.center, self.extents))

    @property
    def upper(self) -> Vec3:
        return tuple(c + e / 2.0 for c, e in zip(self.center, self.extents))

    def contains(self, point: Sequence[float], slack: float = 0.0) -> bool:
        return all(
            lo - slack <= p <= hi + slack
            for p, lo, hi in zip(point, self.lower, self.upper)
        )


@dataclass(frozen=True)
class ObjectInstance:
    category: str
    instance_id: str
    bbox: BoundingBox
    first_frame: int
    surface_points: tuple[Vec3, ...] | None = None


@dataclass(frozen=True)
class SceneMeta:
    scene_id: str
    objects: tuple[ObjectInstance, ...]
    floor_points: tuple[Vec2, ...]
    frame_count: int
    fps: float
    up_axis: str = "y"

    def ground(self, point: Sequence[float]) -> Vec2:
        """Project a 3D point onto the scene's ground plane."""
        i, j = GROUND_AXES[self.up_axis]
        return (float(point[i]), float(point[j]))

    def category_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for obj in self.objects:
            counts[obj.category] = counts.get(obj.category, 0) + 1
        return counts

    def unique_objects(self) -> dict[str, ObjectInstance]:
        """Objects whose category occurs exactly once, keyed by category."""
        counts = self.category_counts()
        return {o.category: o for o in self.objects if counts[o.category] == 1}


@dataclass(frozen=True)
class GridMap:
    """M x M cognitive map: category -> cells, one cell per instance."""

    size: int
    cells: Mapping[str, tuple[Cell, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, list[list[int]]]:
        return {k: [list(c) for c in v] for k, v in sorted(self.cells.items())}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def problems(self) -> list[str]:
        out = []
        if self.size < 1:
            out.append(f"map size must be positive, got {self.size}")
        for category, cells in self.cells.items():
            if not category:
                out.append("empty category key")
            if not cells:
                out.append(f"category '{category}' has no cells")
            for x, y in cells:
                if not (0 <= x < self.size and 0 <= y < self.size):
                    out.append(f"cell ({x}, {y}) of '{category}' outside [0, {self.size - 1}]")
        return out


@dataclass(frozen=True)
class Diagnostic:
    invariant: str
    entity: str
    message: str

    def __str__(self) -> str:
        return f"[{self.invariant}] {self.entity}: {self.message}"


def validate_scene(scene: SceneMeta, slack: float = DEFAULT_SURFACE_SLACK) -> list[Diagnostic]:
    """Check every scene invariant; an empty list means the scene is valid."""
    diags: list[Diagnostic] = []

    def add(invariant: str, entity: str, message: str) -> None:
        diags.append(Diagnostic(invariant, entity, message))

    if not scene.scene_id:
        add("scene_id_non_empty", "scene", "scene_id is empty")
    if not (isinstance(scene.frame_count, int) and scene.frame_count > 0):
        add("frame_count_positive", scene.scene_id, f"frame_count={scene.frame_count!r}")
    if not (math.isfinite(scene.fps) and scene.fps > 0):
        add("fps_positive", scene.scene_id, f"fps={scene.fps!r}")
    if scene.up_axis not in GROUND_AXES:
        add("up_axis_known", scene.scene_id, f"up_axis={scene.up_axis!r}")
    if len(scene.objects) < 1:
        add("at_least_one_object", scene.scene_id, "scene has no objects")
    if len(scene.floor_points) < 3:
        add("at_least_three_floor_points", scene.scene_id,
            f"{len(scene.floor_points)} floor points")
    for k, p in enumerate(scene.floor_points):
        if not all(math.isfinite(v) for v in p):
            add("finite_coordinates", f"floor_points[{k}]", f"non-finite point {p}")

    seen: set[str] = set()
    for obj in scene.objects:
        ent = f"object {obj.instance_id!r} ({obj.category})"
        if obj.instance_id in seen:
            add("unique_instance_id", f"object {obj.instance_id!r}",
                f"duplicate instance_id {obj.instance_id!r}")
        seen.add(obj.instance_id)
        if not obj.category:
            add("category_non_empty", ent, "empty category")
        box = obj.bbox
        if not all(math.isfinite(v) for v in (*box.center, *box.extents)):
            add("finite_coordinates", ent, "non-finite box coordinate")
        elif not all(e > 0 for e in box.extents):
            add("positive_extents", ent, f"non-positive extent in {box.extents}")
        if obj.first_frame < 0:
            add("first_frame_non_negative", ent, f"first_frame={obj.first_frame}")
        elif isinstance(scene.frame_count, int) and obj.first_frame >= scene.frame_count:
            add("first_frame_in_range", ent,
                f"first_frame={obj.first_frame} >= frame_count={scene.frame_count}")
        if obj.surface_points is not None:
            outside = [p for p in obj.surface_points if not box.contains(p, slack)]
            if outside:
                add("surface_points_in_box", ent,
                    f"{len(outside)} surface points outside box (+{slack} m slack)")
    return diags


# --- serialization -----------------------------------------------------------

_SCENE_FIELDS = {"schema_version", "scene_id", "fps", "frame_count", "up_axis",
                 "floor_points", "objects"}
_SCENE_REQUIRED = _SCENE_FIELDS - {"schema_version", "up_axis"}
_OBJECT_FIELDS = {"instance_id", "category", "center", "extents", "first_frame",
                  "surface_points"}
_OBJECT_REQUIRED = _OBJECT_FIELDS - {"surface_points"}


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _vector(value: Any, dim: int, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != dim or not all(map(_is_number, value)):
        raise SceneSchemaError(where, f"expected a list of {dim} numbers")
    return tuple(float(v) for v in value)


def _check_fields(obj: Any, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SceneSchemaError(where, "expected an object")
    for name in sorted(set(obj) - allowed):
        raise SceneSchemaError(f"{where}.{name}" if where else name, "unknown field")
    for name in sorted(required - set(obj)):
        raise SceneSchemaError(f"{where}.{name}" if where else name, "missing required field")


def scene_from_dict(doc: Any) -> SceneMeta:
    """Build a SceneMeta from a decoded document, checking the schema only."""
    _check_fields(doc, _SCENE_FIELDS, _SCENE_REQUIRED, "")
    if doc.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise SceneSchemaError("schema_version", f"unsupported version {doc['schema_version']!r}")
    if not isinstance(doc["scene_id"], str):
        raise SceneSchemaError("scene_id", "expected text")
    if not _is_number(doc["fps"]):
        raise SceneSchemaError("fps", "expected a number")
    if not isinstance(doc["frame_count"], int) or isinstance(doc["frame_count"], bool):
        raise SceneSchemaError("frame_count", "expected an integer")
    up_axis = doc.get("up_axis", "y")
    if up_axis not in GROUND_AXES:
        raise SceneSchemaError("up_axis", f"expected one of {sorted(GROUND_AXES)}")
    if not isinstance(doc["floor_points"], list):
        raise SceneSchemaError("floor_points", "expected a list")
    floor = tuple(_vector(p, 2, f"floor_points[{k}]") for k, p in enumerate(doc["floor_points"]))
    if not isinstance(doc["objects"], list):
        raise SceneSchemaError("objects", "expected a list")

    objects = []
    for k, raw in enumerate(doc["objects"]):
        where = f"objects[{k}]"
        _check_fields(raw, _OBJECT_FIELDS, _OBJECT_REQUIRED, where)
        for name in ("instance_id", "category"):
            if not isinstance(raw[name], str):
                raise SceneSchemaError(f"{where}.{name}", "expected text")
        ff = raw["first_frame"]
        if not isinstance(ff, int) or isinstance(ff, bool):
            raise SceneSchemaError(f"{where}.first_frame", "expected an integer")
        surface = None
        if raw.get("surface_points") is not None:
            if not isinstance(raw["surface_points"], list):
                raise SceneSchemaError(f"{where}.surface_points", "expected a list")
            surface = tuple(_vector(p, 3, f"{where}.surface_points[{j}]")
                            for j, p in enumerate(raw["surface_points"]))
        box = BoundingBox(_vector(raw["center"], 3, f"{where}.center"),
                          _vector(raw["extents"], 3, f"{where}.extents"))
        objects.append(ObjectInstance(raw["category"], raw["instance_id"], box, ff, surface))

    return SceneMeta(
        scene_id=doc["scene_id"],
        objects=tuple(objects),
        floor_points=floor,
        frame_count=doc["frame_count"],
        fps=float(doc["fps"]),
        up_axis=up_axis,
    )


def parse_scene(text: str, slack: float = DEFAULT_SURFACE_SLACK) -> SceneMeta:
    """Parse and validate a scene document.

    Raises SceneSyntaxError (with line/column), SceneSchemaError (field and
    reason) or SceneInvariantError (all violated invariants).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    scene = scene_from_dict(doc)
    diags = validate_scene(scene, slack)
    if diags:
        raise SceneInvariantError(diags)
    return scene


def scene_to_dict(scene: SceneMeta) -> dict[str, Any]:
    objects = []
    for obj in scene.objects:
        rec: dict[str, Any] = {
            "instance_id": obj.instance_id,
            "category": obj.category,
            "center": list(obj.bbox.center),
            "extents": list(obj.bbox.extents),
            "first_frame": obj.first_frame,
        }
        if obj.surface_points is not None:
            rec["surface_points"] = [list(p) for p in obj.surface_points]
        objects.append(rec)
    return {
        "schema_version": SCHEMA_VERSION,
        "scene_id": scene.scene_id,
        "fps": scene.fps,
        "frame_count": scene.frame_count,
        "up_axis": scene.up_axis,
        "floor_points": [list(p) for p in scene.floor_points],
        "objects": objects,
    }


def serialize_scene(scene: SceneMeta) -> str:
    return json.dumps(scene_to_dict(scene), indent=2)


# --- cognitive map -----------------------------------------------------------

def _cell_index(value: float, lo: float, hi: float, size: int) -> int:
    idx = math.floor((value - lo) / (hi - lo) * size)
    return min(max(idx, 0), size - 1)


def build_grid_map(scene: SceneMeta, size: int = DEFAULT_MAP_SIZE) -> GridMap:
    """Project every object center onto a size x size grid over the room.

    The normalization rectangle spans object centers and floor points.
    A coordinate c maps to floor((c - lo) / (hi - lo) * size), clamped to
    size - 1 so the upper edge lands in the last cell.
    """
    if size < 2:
        raise ValueError(f"map size must be >= 2, got {size}")
    centers = [scene.ground(o.bbox.center) for o in scene.objects]
    pts = centers + [tuple(p) for p in scene.floor_points]
    bounds = []
    for axis in (0, 1):
        lo = min(p[axis] for p in pts)
        hi = max(p[axis] for p in pts)
        if not hi > lo:
            raise DegenerateSceneError(
                f"scene {scene.scene_id!r} has zero extent on ground axis {axis}")
        bounds.append((lo, hi))

    cells: dict[str, list[Cell]] = {}
    for obj, (gx, gy) in zip(scene.objects, centers):
        cell = (_cell_index(gx, *bounds[0], size), _cell_index(gy, *bounds[1], size))
        cells.setdefault(obj.category, []).append(cell)
    return GridMap(size, {k: tuple(v) for k, v in cells.items()})
