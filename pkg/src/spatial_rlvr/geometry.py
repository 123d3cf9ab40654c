"""Geometric kernels behind the QA answers."""

from __future__ import annotations

import enum
import math
import zlib
from typing import Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .errors import AmbiguousDirectionError, DegenerateGeometryError, EmptyShapeError
from .scene import BoundingBox, ObjectInstance

# horizontal axis pairs whose 2D cross product has the sign of
# up . (a x b) in a right-handed frame; (x, z) would be mirrored for y up
ORIENTED_GROUND_AXES = {"y": (2, 0), "z": (0, 1)}

DEFAULT_SAMPLES_PER_OBJECT = 512
COLLINEAR_TOL = 1e-9


class Direction(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    return math.dist(a.center, b.center)


def min_box_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Exact distance between two axis-aligned boxes, 0 when they touch."""
    gaps = [
        max(0.0, abs(ca - cb) - (ea + eb) / 2.0)
        for ca, cb, ea, eb in zip(a.center, b.center, a.extents, b.extents)
    ]
    return math.hypot(*gaps)


def _object_points(obj: ObjectInstance, n: int, seed: int) -> np.ndarray:
    if obj.surface_points:
        return np.asarray(obj.surface_points, dtype=float)
    # per-object stream so the same object always yields the same sample set
    rng = np.random.default_rng([seed & 0xFFFFFFFF, zlib.crc32(obj.instance_id.encode())])
    lo = np.asarray(obj.bbox.lower)
    hi = np.asarray(obj.bbox.upper)
    pts = rng.uniform(lo, hi, size=(n, 3))
    # the center is always one of the samples
    pts[0] = obj.bbox.center
    return pts


def sampled_min_distance(
    a: ObjectInstance,
    b: ObjectInstance,
    samples_per_object: int = DEFAULT_SAMPLES_PER_OBJECT,
    seed: int = 0,
) -> float:
    """Minimum pairwise distance between points sampled inside two objects.

    Recorded surface points are used instead of box samples when present.
    """
    if samples_per_object < 1:
        raise ValueError("samples_per_object must be >= 1")
    pa = _object_points(a, samples_per_object, seed)
    pb = _object_points(b, samples_per_object, seed)
    dist, _ = cKDTree(pb).query(pa, k=1)
    return float(dist.min())


def longest_dimension(obj: ObjectInstance) -> float:
    """Longest side in centimeters, from surface points when available."""
    if obj.surface_points:
        pts = np.asarray(obj.surface_points, dtype=float)
        return float((pts.max(axis=0) - pts.min(axis=0)).max() * 100.0)
    return max(obj.bbox.extents) * 100.0


def _triangle_stats(p: np.ndarray, tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b, c = p[tris[:, 0]], p[tris[:, 1]], p[tris[:, 2]]
    ab, ac = b - a, c - a
    area = 0.5 * np.abs(ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])
    la = np.linalg.norm(b - c, axis=1)
    lb = np.linalg.norm(c - a, axis=1)
    lc = np.linalg.norm(a - b, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        radius = np.where(area > 0, la * lb * lc / (4.0 * area), np.inf)
    return area, radius


def room_area_alpha_shape(points: Sequence[Sequence[float]], alpha: float) -> float:
    """Area of the 2D alpha shape of ``points``.

    Delaunay triangles with circumradius <= alpha are kept and their areas
    summed. ``alpha`` is a length in the units of the points.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
        raise DegenerateGeometryError("need at least 3 two-dimensional points")
    if np.linalg.matrix_rank(p - p.mean(axis=0), tol=1e-12 * max(1.0, np.abs(p).max())) < 2:
        raise DegenerateGeometryError("points are collinear")
    try:
        tri = Delaunay(p)
    except QhullError as exc:
        raise DegenerateGeometryError(f"triangulation failed: {exc}") from exc
    area, radius = _triangle_stats(p, tri.simplices)
    keep = radius <= alpha
    if not keep.any():
        raise EmptyShapeError(f"empty shape: no triangle has circumradius <= {alpha}")
    return float(area[keep].sum())


def default_alpha(points: Sequence[Sequence[float]]) -> float:
    """Twice the median nearest-neighbour spacing of ``points``."""
    p = np.asarray(points, dtype=float)
    dist, _ = cKDTree(p).query(p, k=2)
    spacing = float(np.median(dist[:, 1]))
    if not spacing > 0:
        raise DegenerateGeometryError("floor points have zero spacing")
    return 2.0 * spacing


def relative_direction(
    standing_at: Sequence[float],
    facing: Sequence[float],
    query: Sequence[float],
    up_axis: str = "y",
) -> Direction:
    """Is ``query`` to the left or right of an observer at ``standing_at``
    looking toward ``facing``?

    3D points are taken in a right-handed frame with ``up_axis`` up: the
    query is on the left when up . (forward x to_query) > 0. 2D points are
    read as counterclockwise-oriented ground coordinates seen from above.
    """
    def ground(p):
        if len(p) == 2:
            return float(p[0]), float(p[1])
        i, j = ORIENTED_GROUND_AXES[up_axis]
        return float(p[i]), float(p[j])

    s, f, q = ground(standing_at), ground(facing), ground(query)
    u = (f[0] - s[0], f[1] - s[1])
    v = (q[0] - s[0], q[1] - s[1])
    nu, nv = math.hypot(*u), math.hypot(*v)
    if nu == 0.0:
        raise AmbiguousDirectionError("ambiguous direction: facing point equals standing point")
    cross = u[0] * v[1] - u[1] * v[0]
    if abs(cross) < COLLINEAR_TOL * nu * nv or nv == 0.0:
        raise AmbiguousDirectionError("ambiguous direction: query lies on the facing line")
    return Direction.LEFT if cross > 0 else Direction.RIGHT
