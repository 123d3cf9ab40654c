"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SpatialRLVRError(Exception):
    """Base class for every domain error raised by this package."""


class SceneError(SpatialRLVRError):
    pass


class SceneSyntaxError(SceneError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"syntax error at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SceneSchemaError(SceneError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"schema violation in '{field}': {reason}")
        self.field = field
        self.reason = reason


class SceneInvariantError(SceneError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class DegenerateSceneError(SceneError):
    pass


class GeometryError(SpatialRLVRError):
    pass


class DegenerateGeometryError(GeometryError):
    pass


class EmptyShapeError(GeometryError):
    pass


class AmbiguousDirectionError(GeometryError):
    pass


class GenerationError(SpatialRLVRError):
    pass


class TieError(GenerationError):
    pass


class TemplateError(SpatialRLVRError):
    pass


class MapParseError(SpatialRLVRError):
    pass


class AnswerParseError(SpatialRLVRError):
    pass


class ExportError(SpatialRLVRError):
    def __init__(self, message: str, written: int):
        super().__init__(f"{message} (after {written} records)")
        self.written = written
