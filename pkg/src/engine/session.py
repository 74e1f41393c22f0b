"""
Reasoning session: best-first exploration of relation paths for one question.

Each iteration pops the best Active trajectory and runs one step:
narrate -> neighborhood -> retrieve -> rank -> expand -> classify.
Terminated trajectories are summarized and folded into the exploration priors
as soon as they terminate.
"""

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..errors import BackendError, ContractViolation, MissingEntitiesError, NarratorError, PriorsError
from ..graph import EntityFrontier, KnowledgeGraph, outgoing_relations
from ..feedback import ScoredCandidates, expand, rank_candidates, retrieve_candidates
from ..llm import BudgetLedger, LLMGateway
from ..memory import (
    NO_PRIORS_SENTINEL,
    ExplorationPriors,
    consolidate,
    current_priors,
    summarize_trajectory,
)
from ..narrator import Narrative, bootstrap_narrative, generate_context
from ..reasoning import (
    TERMINATION_REASONS,
    EngineConfig,
    Trajectory,
    TrajectoryStatus,
    TraceLog,
    best_trajectory,
    classify_termination,
    path_score,
    ranking_key,
)
from ..reasoning import trace as ev

logger = logging.getLogger("kgtrail.engine")


@dataclass(frozen=True)
class AnswerSet:
    entities: Tuple[str, ...] = ()
    best_path: Optional[Trajectory] = None
    score: float = 0.0
    diagnostic: str = ""

    @property
    def is_empty(self) -> bool:
        return not self.entities

    def to_dict(self) -> dict:
        return {
            "entities": list(self.entities),
            "relations": list(self.best_path.sequence.relations) if self.best_path else [],
            "score": self.score,
            "diagnostic": self.diagnostic,
        }


@dataclass
class StepOutcome:
    parent: Trajectory
    children: List[Trajectory] = field(default_factory=list)
    narrative: Optional[Narrative] = None
    scored: Optional[ScoredCandidates] = None

    @property
    def parent_status(self) -> TrajectoryStatus:
        return self.parent.status


@dataclass
class SessionResult:
    answer: AnswerSet
    trace: TraceLog
    priors: ExplorationPriors
    ledger: BudgetLedger
    iterations_used: int = 0
    degraded_steps: int = 0

    @property
    def all_steps_degraded(self) -> bool:
        return self.iterations_used > 0 and self.degraded_steps == self.iterations_used

    def to_dict(self) -> dict:
        return {
            **self.answer.to_dict(),
            "iterations": self.iterations_used,
            "degraded_steps": self.degraded_steps,
            "priors_version": self.priors.version,
            "ledger": self.ledger.to_dict(),
        }


def _queue_key(traj: Trajectory) -> Tuple:
    # Fresh roots first, in creation order; then best path score.
    if traj.depth == 0:
        return (0, traj.trajectory_id)
    return (1,) + ranking_key(traj)


class ReasoningSession:
    """State of one question's exploration. Not thread-safe; run one session per thread."""

    def __init__(
        self,
        question: str,
        topics: Sequence[str],
        graph: KnowledgeGraph,
        config: EngineConfig,
        gateway: LLMGateway,
        priors: Optional[ExplorationPriors] = None,
        question_id: str = "",
        trace: Optional[TraceLog] = None,
        run_config: Optional[dict] = None,
    ):
        if not topics:
            raise ContractViolation("at least one topic entity is required")
        unique_topics = list(dict.fromkeys(topics))
        present = [t for t in unique_topics if t in graph]
        missing = [t for t in unique_topics if t not in graph]
        if not present:
            raise MissingEntitiesError(missing)
        if missing:
            logger.warning("[%s] topic entities not in graph, skipped: %s", question_id, ", ".join(missing))

        self.question = question
        self.question_id = question_id
        self.topics = present
        self.graph = graph
        self.config = config
        self.gateway = gateway
        self.priors = priors or ExplorationPriors()
        self.trace = trace or TraceLog(question_id)

        self.terminated: List[Trajectory] = []
        self.retired: List[Trajectory] = []
        self.iterations_used = 0
        self.degraded_steps = 0
        self._queue: List[Tuple[Tuple, Trajectory]] = []
        self._ids = itertools.count()

        self.trace.record(
            ev.EVENT_CONFIG,
            question=question,
            topics=list(self.topics),
            engine=config.to_dict(),
            priors_version=self.priors.version,
            **({"run": run_config} if run_config is not None else {}),
        )
        for topic in self.topics:
            root = Trajectory.root(EntityFrontier.of([topic]), question_id, next(self._ids))
            self._register(root)
            self._push(root)

    @property
    def ledger(self) -> BudgetLedger:
        return self.gateway.ledger

    @property
    def queue(self) -> List[Trajectory]:
        return [t for _, t in sorted(self._queue, key=lambda item: item[0])]

    # ---- queue ----

    def _register(self, traj: Trajectory) -> None:
        self.trace.record(
            ev.EVENT_CREATED,
            id=traj.trajectory_id,
            parent=traj.parent_id,
            relations=list(traj.sequence.relations),
            frontier=list(traj.frontier.entities),
            score=path_score(traj),
        )

    def _push(self, traj: Trajectory) -> None:
        heapq.heappush(self._queue, (_queue_key(traj), traj))

    def _pop(self) -> Trajectory:
        return heapq.heappop(self._queue)[1]

    # ---- termination ----

    def _terminate(self, traj: Trajectory) -> None:
        self.terminated.append(traj)
        self.trace.record(
            ev.EVENT_TERMINATED,
            id=traj.trajectory_id,
            status=traj.status.value,
            reason=TERMINATION_REASONS[traj.status],
            relations=list(traj.sequence.relations),
            degraded=traj.degraded,
        )
        if not self.config.use_priors:
            return
        try:
            summary = summarize_trajectory(self.question, traj, self.gateway)
        except (BackendError, PriorsError) as e:
            logger.warning("[%s] summary of trajectory %d failed: %s", self.question_id, traj.trajectory_id, e)
            self.trace.record(ev.EVENT_DEGRADED, id=traj.trajectory_id, stage="summary", error=str(e))
            return
        self.trace.record(ev.EVENT_SUMMARIZED, id=traj.trajectory_id, text=summary.text)
        try:
            self.priors = consolidate(self.priors, summary, self.gateway)
        except (BackendError, PriorsError) as e:
            logger.warning("[%s] consolidation failed, priors kept at version %d: %s",
                           self.question_id, self.priors.version, e)
            self.trace.record(ev.EVENT_DEGRADED, id=traj.trajectory_id, stage="consolidation", error=str(e))
            return
        self.trace.record(ev.EVENT_CONSOLIDATED, version=self.priors.version, text=self.priors.text)

    # ---- one step ----

    def step(self, traj: Trajectory) -> StepOutcome:
        """Run the step pipeline on an Active trajectory and settle parent and children."""
        if traj.status is not TrajectoryStatus.ACTIVE:
            raise ContractViolation(f"step on trajectory {traj.trajectory_id} with status {traj.status.value}")
        config = self.config
        narrative: Optional[Narrative] = None
        scored: Optional[ScoredCandidates] = None
        children: List[Trajectory] = []
        neighborhood: List[str] = []
        candidates: List[str] = []
        try:
            if config.use_context:
                narrative = generate_context(self.question, traj.sequence, self.gateway)
            else:
                narrative = bootstrap_narrative(traj.sequence)
            neighborhood = outgoing_relations(self.graph, traj.frontier, cap=config.neighborhood_cap)
            if neighborhood:
                candidates = retrieve_candidates(
                    self.question, narrative, neighborhood, config.candidates_k, self.gateway
                )
            if candidates:
                priors_text = current_priors(self.priors) if config.use_priors else NO_PRIORS_SENTINEL
                scored = rank_candidates(
                    self.question, traj.sequence, candidates, priors_text, self.gateway,
                    narrative=narrative, priors_version=self.priors.version,
                )
                children = expand(traj, scored, self.graph, config.threshold, self._ids)
        except (BackendError, NarratorError) as e:
            logger.warning("[%s] step on trajectory %d failed: %s", self.question_id, traj.trajectory_id, e)
            self.degraded_steps += 1
            self.trace.record(ev.EVENT_DEGRADED, id=traj.trajectory_id, stage="step", error=str(e))
            parent = traj.with_status(TrajectoryStatus.TERMINATED_NO_EXPAND, degraded=True)
            self._terminate(parent)
            return StepOutcome(parent=parent, narrative=narrative)

        if scored is not None and scored.degraded:
            self.degraded_steps += 1
            self.trace.record(ev.EVENT_DEGRADED, id=traj.trajectory_id, stage="ranking", error="unparseable scores")

        if children:
            status = TrajectoryStatus.BRANCHED
        else:
            status = classify_termination(traj, config, expandable=False)
        parent = traj.with_status(status, degraded=bool(scored and scored.degraded))

        self.trace.record(
            ev.EVENT_EXPANDED,
            id=traj.trajectory_id,
            narrative=narrative.text if narrative else None,
            neighborhood=len(neighborhood),
            candidates=list(candidates),
            scores=scored.to_dict()["scores"] if scored else {},
            children=[c.trajectory_id for c in children],
            status=parent.status.value,
        )

        if parent.status is TrajectoryStatus.BRANCHED:
            self.retired.append(parent)
        else:
            self._terminate(parent)

        for child in children:
            self._register(child)
            status = classify_termination(child, config, expandable=True)
            if status is TrajectoryStatus.ACTIVE:
                self._push(child)
            else:
                self._terminate(child.with_status(status))
        return StepOutcome(parent=parent, children=children, narrative=narrative, scored=scored)

    # ---- loop ----

    def run(self) -> AnswerSet:
        while self._queue and self.iterations_used < self.config.max_iterations:
            traj = self._pop()
            self.iterations_used += 1
            logger.debug("[%s] iteration %d: trajectory %d (%s)",
                         self.question_id, self.iterations_used, traj.trajectory_id, traj.sequence.joined())
            self.step(traj)
        if self._queue:
            logger.info("[%s] iteration budget exhausted with %d active trajectories",
                        self.question_id, len(self._queue))
        answer = self.extract_answer()
        self.trace.record(
            ev.EVENT_ANSWER,
            **answer.to_dict(),
            iterations=self.iterations_used,
            llm_calls=self.ledger.llm_calls,
            total_tokens=self.ledger.total_tokens,
            priors_version=self.priors.version,
        )
        return answer

    def leaves(self) -> List[Trajectory]:
        """Scored trajectories that did not branch: terminated ones plus those still queued."""
        return [t for t in self.terminated + self.queue if t.depth >= 1]

    def extract_answer(self) -> AnswerSet:
        """
        Frontier of the best-ranked leaf. A parent that branched is represented by its
        children only, so a chain answers with its deepest entity; the cost is that a
        parent scoring 0.9 whose only child averages 0.7 answers with the child.
        """
        leaves = self.leaves()
        if not leaves:
            if self.iterations_used and self.degraded_steps == self.iterations_used:
                diagnostic = "all steps degraded"
            elif self.iterations_used == 0:
                diagnostic = "no iterations run"
            else:
                diagnostic = "no trajectory expanded"
            return AnswerSet(diagnostic=diagnostic)
        best = best_trajectory(leaves)
        return AnswerSet(entities=best.frontier.entities, best_path=best, score=path_score(best))


def answer_question(
    question: str,
    topics: Sequence[str],
    graph: KnowledgeGraph,
    config: EngineConfig,
    gateway: LLMGateway,
    priors: Optional[ExplorationPriors] = None,
    question_id: str = "",
    trace: Optional[TraceLog] = None,
    run_config: Optional[dict] = None,
) -> SessionResult:
    """
    Answer one question. Returns the answer with the session's trace, final priors and ledger.

    Raises:
        MissingEntitiesError: none of the topics is in the graph.
    """
    session = ReasoningSession(
        question, topics, graph, config, gateway,
        priors=priors, question_id=question_id, trace=trace, run_config=run_config,
    )
    answer = session.run()
    logger.info(
        "[%s] answer %s (score %.3f) after %d iterations, %d LLM calls, %d tokens",
        question_id, list(answer.entities), answer.score,
        session.iterations_used, gateway.ledger.llm_calls, gateway.ledger.total_tokens,
    )
    return SessionResult(
        answer=answer,
        trace=session.trace,
        priors=session.priors,
        ledger=gateway.ledger,
        iterations_used=session.iterations_used,
        degraded_steps=session.degraded_steps,
    )
