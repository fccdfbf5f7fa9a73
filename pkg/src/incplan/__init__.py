"""Independent incremental planning with sampling-based planners in partially sensed 2D worlds."""

from .geometry import AxisRect, Ball, Path
from .planning import Budget, PlanQuery, PlanResult
from .world import GlobalWorld, IncrementalView, SensedRegion, named_world

__all__ = [
    "AxisRect",
    "Ball",
    "Budget",
    "GlobalWorld",
    "IncrementalView",
    "Path",
    "PlanQuery",
    "PlanResult",
    "SensedRegion",
    "named_world",
]
