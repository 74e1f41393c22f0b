"""
Exploration memory: per-trajectory summaries and the consolidated exploration priors
distilled from them. Priors values are immutable; consolidation returns a new value,
so a failed call leaves the caller's priors untouched.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

from ..errors import ContractViolation, PriorsError
from ..llm import LLMGateway, PromptKind, format_bullets, format_relation_set, unwrap_text
from ..reasoning import TERMINATION_REASONS, RelationSequence, Trajectory

logger = logging.getLogger("kgtrail.memory")

NO_PRIORS_SENTINEL = "No prior exploration experience yet."

# PatternExtraction sees at most this many of the newest summaries.
MAX_SUMMARIES_IN_PROMPT = 10


@dataclass(frozen=True)
class TrajectorySummary:
    text: str
    source_sequence: RelationSequence
    termination_reason: str

    def __post_init__(self):
        if not self.text:
            raise PriorsError("trajectory summary text must be non-empty")
        if self.termination_reason not in TERMINATION_REASONS.values():
            raise PriorsError(f"unknown termination reason {self.termination_reason!r}")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "relations": list(self.source_sequence.relations),
            "reason": self.termination_reason,
        }

    @staticmethod
    def from_dict(data: dict) -> "TrajectorySummary":
        try:
            return TrajectorySummary(
                text=str(data["text"]),
                source_sequence=RelationSequence(tuple(str(r) for r in data["relations"])),
                termination_reason=str(data["reason"]),
            )
        except (KeyError, TypeError) as e:
            raise PriorsError(f"invalid summary entry {data!r}: {e}") from e


@dataclass(frozen=True)
class ExplorationPriors:
    text: str = ""
    summaries: Tuple[TrajectorySummary, ...] = ()
    version: int = 0

    def __post_init__(self):
        if bool(self.text) != bool(self.summaries):
            raise PriorsError("priors text must be empty exactly when there are no summaries")
        if self.version < len(self.summaries):
            raise PriorsError(f"version {self.version} lower than summary count {len(self.summaries)}")

    @property
    def is_empty(self) -> bool:
        return not self.summaries

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "text": self.text,
            "summaries": [s.to_dict() for s in self.summaries],
        }

    @staticmethod
    def from_dict(data: dict) -> "ExplorationPriors":
        if not isinstance(data, dict):
            raise PriorsError("priors file must contain a JSON object")
        try:
            summaries = tuple(TrajectorySummary.from_dict(s) for s in data.get("summaries", []))
            return ExplorationPriors(
                text=str(data.get("text", "")),
                summaries=summaries,
                version=int(data.get("version", len(summaries))),
            )
        except (TypeError, ValueError) as e:
            raise PriorsError(f"invalid priors data: {e}") from e


def summarize_trajectory(question: str, traj: Trajectory, gateway: LLMGateway) -> TrajectorySummary:
    """
    Raises:
        ContractViolation: the trajectory has not terminated (nothing is charged).
        PriorsError: the model returned an empty summary.
    """
    if not traj.status.is_terminated:
        raise ContractViolation(
            f"summarize_trajectory on trajectory {traj.trajectory_id} with status {traj.status.value}"
        )
    reason = TERMINATION_REASONS[traj.status]
    result = gateway.ask(
        PromptKind.TRAJECTORY_SUMMARY,
        {
            "question": question,
            "explored_path": traj.sequence.joined(),
            "reason_for_termination": reason,
        },
    )
    text = unwrap_text(result.text)
    if not text:
        raise PriorsError(f"empty summary for trajectory {traj.trajectory_id}")
    return TrajectorySummary(text=text, source_sequence=traj.sequence, termination_reason=reason)


def consolidate(priors: ExplorationPriors, new_summary: TrajectorySummary, gateway: LLMGateway) -> ExplorationPriors:
    """Fold one more summary into the priors text. Returns a new value; `priors` is never modified."""
    summaries = priors.summaries + (new_summary,)
    recent = summaries[-MAX_SUMMARIES_IN_PROMPT:]
    result = gateway.ask(
        PromptKind.PATTERN_EXTRACTION,
        {"trajectory_summaries": format_bullets([s.text for s in recent])},
    )
    text = unwrap_text(result.text)
    if not text:
        raise PriorsError("pattern extraction returned empty priors text")
    updated = ExplorationPriors(text=text, summaries=summaries, version=priors.version + 1)
    logger.debug("Priors consolidated to version %d", updated.version)
    return updated


def current_priors(priors: ExplorationPriors) -> str:
    return priors.text or NO_PRIORS_SENTINEL


# ---- persistence file ----

def save_priors(priors: ExplorationPriors, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(priors.to_dict(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_priors(path: Union[str, Path]) -> ExplorationPriors:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as e:
        raise PriorsError(f"cannot read priors file {path}: {e}") from e
    priors = ExplorationPriors.from_dict(data)
    logger.info("Loaded priors version %d (%d summaries) from %s", priors.version, len(priors.summaries), path)
    return priors


def summary_lines(priors: ExplorationPriors) -> List[str]:
    """Human-readable lines for `priors show`."""
    lines = [f"version: {priors.version}", f"text: {current_priors(priors)}"]
    for i, s in enumerate(priors.summaries, 1):
        lines.append(f"  {i}. [{s.termination_reason}] {format_relation_set(s.source_sequence.relations)} {s.text}")
    return lines
