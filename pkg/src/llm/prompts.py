"""
Prompt templates: one text file per PromptKind with {placeholder} markers.
Literal braces inside a template are written doubled ({{ and }}).
"""

import logging
from enum import Enum
from pathlib import Path
from string import Formatter
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Union

from ..errors import ConfigError, TemplateError

logger = logging.getLogger("kgtrail.prompts")

TEMPLATES_DIR = Path(__file__).parent / "templates"


class PromptKind(str, Enum):
    CONTEXT_GENERATION = "ContextGeneration"
    TRAJECTORY_SUMMARY = "TrajectorySummary"
    PATTERN_EXTRACTION = "PatternExtraction"
    CANDIDATE_RETRIEVAL = "CandidateRetrieval"
    RERANKING = "Reranking"

    @property
    def filename(self) -> str:
        return _FILENAMES[self]


_FILENAMES: Dict[PromptKind, str] = {
    PromptKind.CONTEXT_GENERATION: "context_generation.txt",
    PromptKind.TRAJECTORY_SUMMARY: "trajectory_summary.txt",
    PromptKind.PATTERN_EXTRACTION: "pattern_extraction.txt",
    PromptKind.CANDIDATE_RETRIEVAL: "candidate_retrieval.txt",
    PromptKind.RERANKING: "reranking.txt",
}

PLACEHOLDERS: Dict[PromptKind, FrozenSet[str]] = {
    PromptKind.CONTEXT_GENERATION: frozenset({"question", "relations_list"}),
    PromptKind.TRAJECTORY_SUMMARY: frozenset({"question", "explored_path", "reason_for_termination"}),
    PromptKind.PATTERN_EXTRACTION: frozenset({"trajectory_summaries"}),
    PromptKind.CANDIDATE_RETRIEVAL: frozenset({"question", "context_narrative", "candidate_relations", "k"}),
    PromptKind.RERANKING: frozenset(
        {"question", "historical_path", "top_k_relations", "exploration_experience"}
    ),
}


class PromptTemplate:
    """Template for one prompt kind."""

    def __init__(self, kind: PromptKind, text: str):
        self.kind = kind
        self.text = text
        self.fields = frozenset(
            name for _, name, _, _ in Formatter().parse(text) if name is not None
        )

    def render(self, fields: Mapping[str, object]) -> str:
        """
        Substitute every placeholder verbatim.

        Raises:
            TemplateError: a declared placeholder has no value, or a value has no placeholder.
        """
        for name in sorted(self.fields):
            if name not in fields:
                raise TemplateError(self.kind.value, name, "missing value for")
        for name in sorted(fields):
            if name not in self.fields:
                raise TemplateError(self.kind.value, name, "no such")
        return self.text.format(**{k: str(v) for k, v in fields.items()})


class PromptLibrary:
    """Loads the five templates from a directory (the packaged ones by default)."""

    def __init__(self, template_dir: Optional[Union[str, Path]] = None):
        self._dir = Path(template_dir) if template_dir else TEMPLATES_DIR
        self._templates: Dict[PromptKind, PromptTemplate] = {}
        for kind in PromptKind:
            path = self._dir / kind.filename
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise ConfigError(f"cannot read template {path}: {e}") from e
            template = PromptTemplate(kind, text)
            if template.fields != PLACEHOLDERS[kind]:
                raise ConfigError(
                    f"template {path} declares {sorted(template.fields)}, "
                    f"expected {sorted(PLACEHOLDERS[kind])}"
                )
            self._templates[kind] = template
        logger.debug("Loaded %d prompt templates from %s", len(self._templates), self._dir)

    def get(self, kind: PromptKind) -> PromptTemplate:
        return self._templates[kind]

    def render(self, kind: PromptKind, fields: Mapping[str, object]) -> str:
        return self._templates[kind].render(fields)


_default_library: Optional[PromptLibrary] = None


def default_library() -> PromptLibrary:
    global _default_library
    if _default_library is None:
        _default_library = PromptLibrary()
    return _default_library


def render_prompt(kind: PromptKind, fields: Mapping[str, object], library: Optional[PromptLibrary] = None) -> str:
    return (library or default_library()).render(kind, fields)


# ---- field formatting shared by the callers ----

def format_relation_set(relations: Iterable[str]) -> str:
    """{"a.b", "c.d"} as in the template examples."""
    return "{" + ", ".join(f'"{r}"' for r in relations) + "}"


def format_bullets(lines: List[str]) -> str:
    return "\n".join(f'    - "{line}"' for line in lines)
