"""
Contextual narrative for a relation sequence (dynamic context generation).
"""

import logging
from dataclasses import dataclass

from ..errors import NarratorError
from ..llm import LLMGateway, PromptKind, format_relation_set, unwrap_text
from ..reasoning import RelationSequence

logger = logging.getLogger("kgtrail.narrator")

START_NARRATIVE = "This is the start of the path."


@dataclass(frozen=True)
class Narrative:
    text: str
    for_step: int

    def __post_init__(self):
        if not self.text:
            raise NarratorError("narrative text must be non-empty")


def bootstrap_narrative(sequence: RelationSequence) -> Narrative:
    return Narrative(text=START_NARRATIVE, for_step=len(sequence))


def generate_context(question: str, sequence: RelationSequence, gateway: LLMGateway) -> Narrative:
    """
    Narrate `sequence` in the context of `question`.
    The empty sequence gets the fixed start narrative and costs no LLM call.

    Raises:
        NarratorError: the model returned an empty narrative.
        BackendError: propagated from the gateway.
    """
    if len(sequence) == 0:
        return bootstrap_narrative(sequence)
    result = gateway.ask(
        PromptKind.CONTEXT_GENERATION,
        {"question": question, "relations_list": format_relation_set(sequence.relations)},
    )
    text = unwrap_text(result.text)
    if not text:
        raise NarratorError(f"empty narrative for path {sequence.joined()}")
    logger.debug("Narrative at step %d: %s", len(sequence), text)
    return Narrative(text=text, for_step=len(sequence))
