"""Exception hierarchy shared across floorflow modules."""


class FloorflowError(Exception):
    """Base class for all floorflow errors."""


class GeometryError(FloorflowError):
    pass


class OffsetCollapse(GeometryError):
    """Inward offset would self-intersect or flip orientation."""


class DegenerateInput(GeometryError):
    """Point set is collinear, too small, or has duplicates."""


class NavigationError(FloorflowError):
    pass


class PointOutsideFace(NavigationError):
    def __init__(self, vertex_id):
        super().__init__(f"navigation point {vertex_id} is outside the navigable face")
        self.vertex_id = vertex_id


class NoPath(NavigationError):
    def __init__(self, src, dst):
        super().__init__(f"no path from vertex {src} to vertex {dst}")
        self.src = src
        self.dst = dst


class NoVertexInRange(NavigationError):
    def __init__(self, distance, snap_radius, index=None):
        where = "" if index is None else f" (event {index})"
        super().__init__(
            f"nearest graph vertex is {distance:.3f} m away, beyond snap radius {snap_radius} m{where}"
        )
        self.distance = distance
        self.snap_radius = snap_radius
        self.index = index


class ScheduleError(FloorflowError):
    pass


class NonMonotoneSchedule(ScheduleError):
    def __init__(self, index):
        super().__init__(f"event {index} does not start strictly after event {index - 1}")
        self.index = index


class WindowTooSmall(ScheduleError):
    pass


class FieldError(FloorflowError):
    pass


class EmptyDomain(FieldError):
    pass


class SourceInBlockedCell(FieldError):
    pass


class UnstableStep(FieldError):
    pass


class OutOfBounds(FieldError):
    pass


class RiskError(FloorflowError):
    pass


class NotInfectious(RiskError):
    pass


class NoSusceptibles(RiskError):
    pass


class UnstableConfig(FloorflowError):
    pass


class ScenarioError(FloorflowError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.line = line
        self.field = field


class SchemaVersionMismatch(ScenarioError):
    pass


class ValidationError(ScenarioError):
    pass
