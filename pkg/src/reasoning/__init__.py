from .trajectory import (
    TERMINATION_REASONS,
    EngineConfig,
    RelationSequence,
    Trajectory,
    TrajectoryStatus,
    append,
    best_trajectory,
    classify_termination,
    path_score,
    ranking_key,
)
from .trace import TraceEvent, TraceLog, write_traces

__all__ = [
    "TERMINATION_REASONS", "EngineConfig", "RelationSequence", "Trajectory", "TrajectoryStatus",
    "append", "best_trajectory", "classify_termination", "path_score", "ranking_key",
    "TraceEvent", "TraceLog", "write_traces",
]
