"""
Two-stage relation selection: narrative-conditioned candidate retrieval,
then path- and priors-conditioned scoring, then threshold branch expansion.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

from ..errors import ContractViolation, ParseError
from ..graph import KnowledgeGraph, traverse
from ..llm import LLMGateway, PromptKind, format_relation_set, parse_relation_list, parse_score_map
from ..narrator import Narrative
from ..reasoning import RelationSequence, Trajectory, TrajectoryStatus

logger = logging.getLogger("kgtrail.feedback")


@dataclass(frozen=True)
class ScoredCandidates:
    """Top-k candidates with their scores, best first (ties lexicographic)."""

    entries: Tuple[Tuple[str, float], ...]
    narrative_used: Optional[Narrative] = None
    priors_version: int = 0
    degraded: bool = False

    def __post_init__(self):
        relations = [r for r, _ in self.entries]
        if len(set(relations)) != len(relations):
            raise ContractViolation(f"duplicate candidate relations: {relations}")

    @classmethod
    def from_scores(cls, scores, **kwargs) -> "ScoredCandidates":
        ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        return cls(entries=tuple(ordered), **kwargs)

    @property
    def relations(self) -> List[str]:
        return [r for r, _ in self.entries]

    def retained(self, threshold: float) -> List[Tuple[str, float]]:
        return [(r, s) for r, s in self.entries if s >= threshold]

    def to_dict(self) -> dict:
        return {
            "scores": {r: s for r, s in self.entries},
            "priors_version": self.priors_version,
            "degraded": self.degraded,
        }


def retrieve_candidates(
    question: str,
    narrative: Narrative,
    neighborhood: Sequence[str],
    k: int,
    gateway: LLMGateway,
) -> List[str]:
    """
    Ask for at most k relations from `neighborhood`. A malformed answer is re-asked once;
    a second failure yields no candidates.
    """
    if not neighborhood:
        raise ContractViolation("retrieve_candidates needs a non-empty neighborhood")
    fields = {
        "question": question,
        "context_narrative": narrative.text,
        "candidate_relations": format_relation_set(neighborhood),
        "k": k,
    }
    for attempt in range(2):
        if attempt:
            gateway.ledger.note_re_ask()
        result = gateway.ask(PromptKind.CANDIDATE_RETRIEVAL, fields)
        try:
            return parse_relation_list(result.text, neighborhood, k)
        except ParseError as e:
            logger.warning("Candidate retrieval output unparseable (attempt %d/2): %s", attempt + 1, e)
    return []


def rank_candidates(
    question: str,
    sequence: RelationSequence,
    candidates: Sequence[str],
    priors_text: str,
    gateway: LLMGateway,
    narrative: Optional[Narrative] = None,
    priors_version: int = 0,
) -> ScoredCandidates:
    """
    Score every candidate in a single Reranking call.
    After a failed re-ask every candidate scores 0.0 and the result is flagged degraded.
    """
    if not candidates:
        raise ContractViolation("rank_candidates needs at least one candidate")
    fields = {
        "question": question,
        "historical_path": sequence.joined(),
        "top_k_relations": format_relation_set(candidates),
        "exploration_experience": priors_text,
    }
    for attempt in range(2):
        if attempt:
            gateway.ledger.note_re_ask()
        result = gateway.ask(PromptKind.RERANKING, fields)
        try:
            scores = parse_score_map(result.text, candidates)
        except ParseError as e:
            logger.warning("Reranking output unparseable (attempt %d/2): %s", attempt + 1, e)
            continue
        return ScoredCandidates.from_scores(scores, narrative_used=narrative, priors_version=priors_version)

    logger.warning("Degraded step: scoring %d candidates 0.0", len(candidates))
    return ScoredCandidates.from_scores(
        {c: 0.0 for c in candidates}, narrative_used=narrative, priors_version=priors_version, degraded=True
    )


def expand(
    traj: Trajectory,
    scored: ScoredCandidates,
    graph: KnowledgeGraph,
    threshold: float,
    ids: Optional[Iterator[int]] = None,
) -> List[Trajectory]:
    """
    One child per retained candidate (score >= threshold) whose traversal is non-empty,
    in descending score order. `ids` supplies trajectory ids for the children.
    """
    if traj.status is not TrajectoryStatus.ACTIVE:
        raise ContractViolation(f"expand on trajectory {traj.trajectory_id} with status {traj.status.value}")
    if ids is None:
        ids = itertools.count(traj.trajectory_id + 1)
    children: List[Trajectory] = []
    for relation, score in scored.retained(threshold):
        frontier = traverse(graph, traj.frontier, relation)
        if not frontier:
            logger.debug("Relation %s does not extend trajectory %d", relation, traj.trajectory_id)
            continue
        children.append(traj.extend(relation, score, frontier, next(ids)))
    return children
