"""Random indoor scenes for demos and tests."""

from __future__ import annotations

import random

from .scene import BoundingBox, ObjectInstance, SceneMeta

CATEGORIES = {
    # category: (min extents, max extents) in meters, y up
    "chair": ((0.4, 0.8, 0.4), (0.6, 1.1, 0.6)),
    "table": ((0.8, 0.7, 0.6), (1.8, 0.8, 1.0)),
    "sofa": ((1.5, 0.8, 0.8), (2.4, 1.0, 1.0)),
    "bed": ((1.4, 0.5, 1.9), (2.0, 0.7, 2.2)),
    "lamp": ((0.2, 1.2, 0.2), (0.4, 1.8, 0.4)),
    "tv": ((0.9, 0.5, 0.08), (1.6, 0.9, 0.12)),
    "desk": ((1.0, 0.7, 0.5), (1.6, 0.8, 0.8)),
    "bookshelf": ((0.8, 1.5, 0.3), (1.2, 2.0, 0.4)),
    "cabinet": ((0.5, 0.8, 0.4), (1.2, 1.0, 0.6)),
    "refrigerator": ((0.6, 1.6, 0.6), (0.9, 1.9, 0.75)),
    "stove": ((0.6, 0.9, 0.6), (0.8, 0.95, 0.7)),
    "sink": ((0.4, 0.2, 0.4), (0.8, 0.3, 0.6)),
    "toilet": ((0.4, 0.7, 0.6), (0.5, 0.8, 0.75)),
    "plant": ((0.3, 0.5, 0.3), (0.6, 1.5, 0.6)),
    "trash can": ((0.25, 0.4, 0.25), (0.4, 0.7, 0.4)),
    "pillow": ((0.4, 0.1, 0.3), (0.6, 0.2, 0.4)),
    "monitor": ((0.5, 0.3, 0.05), (0.7, 0.45, 0.15)),
    "backpack": ((0.3, 0.4, 0.2), (0.4, 0.5, 0.3)),
    "cup": ((0.06, 0.08, 0.06), (0.09, 0.12, 0.09)),
    "wall": ((2.0, 2.4, 0.1), (4.0, 2.8, 0.15)),
}
MULTI = ("chair", "pillow", "cup", "plant")


def _floor_points(rng: random.Random, lshape: bool, step: float = 0.25):
    w, d = rng.uniform(3.0, 7.0), rng.uniform(3.0, 7.0)
    cut_w, cut_d = (w * rng.uniform(0.3, 0.6), d * rng.uniform(0.3, 0.6)) if lshape else (0, 0)
    nx, nz = int(w / step) + 1, int(d / step) + 1
    pts = []
    for i in range(nx):
        for j in range(nz):
            x, z = i * step, j * step
            if lshape and x > w - cut_w and z > d - cut_d:
                continue
            pts.append((round(x, 4), round(z, 4)))
    return pts, w, d, cut_w, cut_d


def random_scene(seed: int, n_unique: tuple[int, int] = (5, 12), p_lshape: float = 0.3,
                 p_wall: float = 0.3) -> SceneMeta:
    """A rectangular or L-shaped room with randomly placed furniture."""
    rng = random.Random(seed)
    lshape = rng.random() < p_lshape
    floor, w, d, cut_w, cut_d = _floor_points(rng, lshape)
    frame_count = rng.randint(300, 2000)

    names = rng.sample(sorted(set(CATEGORIES) - {"wall"}), rng.randint(*n_unique))
    placed = []
    for name in names:
        copies = rng.randint(2, 4) if name in MULTI and rng.random() < 0.5 else 1
        placed += [name] * copies
    if rng.random() < p_wall:
        placed.append("wall")

    objects = []
    for k, name in enumerate(placed):
        lo, hi = CATEGORIES[name]
        ext = tuple(round(rng.uniform(a, b), 3) for a, b in zip(lo, hi))
        while True:
            x = rng.uniform(ext[0] / 2, w - ext[0] / 2)
            z = rng.uniform(ext[2] / 2, d - ext[2] / 2)
            if not (lshape and x > w - cut_w and z > d - cut_d):
                break
        center = (round(x, 3), round(ext[1] / 2, 3), round(z, 3))
        objects.append(ObjectInstance(
            category=name,
            instance_id=str(k),
            bbox=BoundingBox(center, ext),
            first_frame=rng.randrange(frame_count),
        ))
    return SceneMeta(
        scene_id=f"synth{seed:05d}",
        objects=tuple(objects),
        floor_points=tuple(floor),
        frame_count=frame_count,
        fps=24.0,
    )
