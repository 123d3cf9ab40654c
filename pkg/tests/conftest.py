import sys

import pytest

from spatial_rlvr.scene import BoundingBox, ObjectInstance, SceneMeta


def make_scene(objects, floor=((0, 0), (10, 0), (10, 10), (0, 10)), frame_count=100,
               scene_id="s0", up_axis="y"):
    """objects: iterable of (category, center, extents[, first_frame])."""
    objs = []
    for k, item in enumerate(objects):
        cat, center, ext, *rest = item
        objs.append(ObjectInstance(cat, f"o{k}", BoundingBox(tuple(map(float, center)),
                                                             tuple(map(float, ext))),
                                   rest[0] if rest else 0))
    return SceneMeta(scene_id, tuple(objs), tuple(tuple(map(float, p)) for p in floor),
                     frame_count, 24.0, up_axis)


@pytest.fixture
def unit():
    return (1.0, 1.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
