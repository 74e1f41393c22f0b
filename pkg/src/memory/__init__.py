from .priors import (
    MAX_SUMMARIES_IN_PROMPT,
    NO_PRIORS_SENTINEL,
    ExplorationPriors,
    TrajectorySummary,
    consolidate,
    current_priors,
    load_priors,
    save_priors,
    summarize_trajectory,
    summary_lines,
)
from .store import PriorsStore

__all__ = [
    "MAX_SUMMARIES_IN_PROMPT", "NO_PRIORS_SENTINEL", "ExplorationPriors", "TrajectorySummary",
    "consolidate", "current_priors", "load_priors", "save_priors", "summarize_trajectory",
    "summary_lines", "PriorsStore",
]
