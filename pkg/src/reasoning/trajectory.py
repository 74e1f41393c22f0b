"""
Trajectory data model: relation sequences, lifecycle status,
termination classification and path-level scoring.
"""

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ConfigError, ContractViolation
from ..graph.store import DEFAULT_NEIGHBORHOOD_CAP, EntityFrontier


class TrajectoryStatus(str, Enum):
    ACTIVE = "Active"
    TERMINATED_DEPTH = "TerminatedDepth"
    TERMINATED_NO_EXPAND = "TerminatedNoExpand"
    BRANCHED = "Branched"  # retired after producing children; never summarized

    @property
    def is_terminated(self) -> bool:
        return self in (TrajectoryStatus.TERMINATED_DEPTH, TrajectoryStatus.TERMINATED_NO_EXPAND)

    @property
    def is_final(self) -> bool:
        return self is not TrajectoryStatus.ACTIVE


TERMINATION_REASONS: Dict[TrajectoryStatus, str] = {
    TrajectoryStatus.TERMINATED_DEPTH: "Max depth reached",
    TrajectoryStatus.TERMINATED_NO_EXPAND: "No expandable relations",
}


@dataclass(frozen=True)
class EngineConfig:
    """Search hyperparameters. Defaults: L=4, I=30, zeta=0.5, k=3."""

    max_depth: int = 4
    candidates_k: int = 3
    max_iterations: int = 30
    threshold: float = 0.5
    subgraph_hops: int = 4
    neighborhood_cap: int = DEFAULT_NEIGHBORHOOD_CAP
    use_context: bool = True
    use_priors: bool = True

    def __post_init__(self):
        for name in ("max_depth", "candidates_k", "subgraph_hops", "neighborhood_cap"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        # I = 0 is allowed: the engine then answers with an empty set and spends nothing.
        if not isinstance(self.max_iterations, int) or self.max_iterations < 0:
            raise ConfigError(f"max_iterations must be a non-negative integer, got {self.max_iterations!r}")
        if not 0.0 <= float(self.threshold) <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.threshold!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RelationSequence:
    relations: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def append(self, relation: str) -> "RelationSequence":
        return RelationSequence(self.relations + (relation,))

    def joined(self, separator: str = " → ", empty: str = "(empty)") -> str:
        return separator.join(self.relations) if self.relations else empty


def append(sequence: RelationSequence, relation: str) -> RelationSequence:
    """Return sequence ⊕ relation; the input is left untouched."""
    return sequence.append(relation)


@dataclass(frozen=True)
class Trajectory:
    sequence: RelationSequence
    frontier: EntityFrontier
    step_scores: Tuple[float, ...] = ()
    status: TrajectoryStatus = TrajectoryStatus.ACTIVE
    question_id: str = ""
    trajectory_id: int = 0
    parent_id: Optional[int] = None
    degraded: bool = False

    def __post_init__(self):
        if len(self.step_scores) != len(self.sequence):
            raise ContractViolation(
                f"{len(self.step_scores)} step scores for {len(self.sequence)} relations"
            )
        for s in self.step_scores:
            if not 0.0 <= s <= 1.0:
                raise ContractViolation(f"step score {s} outside [0, 1]")

    @classmethod
    def root(cls, frontier: EntityFrontier, question_id: str, trajectory_id: int) -> "Trajectory":
        return cls(
            sequence=RelationSequence(),
            frontier=frontier,
            question_id=question_id,
            trajectory_id=trajectory_id,
        )

    @property
    def depth(self) -> int:
        return len(self.sequence)

    def extend(self, relation: str, score: float, frontier: EntityFrontier, trajectory_id: int) -> "Trajectory":
        """Child trajectory one relation deeper. Terminated and branched trajectories are absorbing."""
        if self.status.is_final:
            raise ContractViolation(
                f"cannot extend trajectory {self.trajectory_id} with status {self.status.value}"
            )
        return Trajectory(
            sequence=self.sequence.append(relation),
            frontier=frontier,
            step_scores=self.step_scores + (float(score),),
            question_id=self.question_id,
            trajectory_id=trajectory_id,
            parent_id=self.trajectory_id,
        )

    def with_status(self, status: TrajectoryStatus, degraded: Optional[bool] = None) -> "Trajectory":
        return replace(self, status=status, degraded=self.degraded if degraded is None else degraded)

    def to_dict(self) -> dict:
        return {
            "id": self.trajectory_id,
            "parent": self.parent_id,
            "relations": list(self.sequence.relations),
            "frontier": list(self.frontier.entities),
            "scores": list(self.step_scores),
            "status": self.status.value,
            "degraded": self.degraded,
        }


def classify_termination(traj: Trajectory, config: EngineConfig, expandable: bool) -> TrajectoryStatus:
    """Depth is checked before expandability."""
    if traj.status is not TrajectoryStatus.ACTIVE:
        raise ContractViolation(
            f"classify_termination on trajectory {traj.trajectory_id} with status {traj.status.value}"
        )
    if len(traj.sequence) >= config.max_depth:
        return TrajectoryStatus.TERMINATED_DEPTH
    if not expandable:
        return TrajectoryStatus.TERMINATED_NO_EXPAND
    return TrajectoryStatus.ACTIVE


def path_score(traj: Trajectory) -> float:
    """Mean of accepted step scores; 0.0 for a zero-hop path."""
    if not traj.step_scores:
        return 0.0
    return float(np.mean(traj.step_scores))


def ranking_key(traj: Trajectory) -> Tuple:
    """Sort key: best score first, then shorter sequence, then lexicographic relations, then creation."""
    return (-path_score(traj), len(traj.sequence), traj.sequence.relations, traj.trajectory_id)


def best_trajectory(trajectories) -> Optional[Trajectory]:
    ranked = sorted(trajectories, key=ranking_key)
    return ranked[0] if ranked else None
