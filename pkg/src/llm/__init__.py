from .backends import (
    CompletionRequest,
    CompletionResult,
    LiveBackend,
    LLMBackend,
    ScriptedBackend,
    ScriptedRule,
)
from .gateway import BudgetLedger, LLMGateway, RetryPolicy, complete
from .parsing import parse_relation_list, parse_score_map, unwrap_text
from .prompts import (
    PLACEHOLDERS,
    PromptKind,
    PromptLibrary,
    PromptTemplate,
    default_library,
    format_bullets,
    format_relation_set,
    render_prompt,
)

__all__ = [
    "CompletionRequest", "CompletionResult", "LiveBackend", "LLMBackend", "ScriptedBackend", "ScriptedRule",
    "BudgetLedger", "LLMGateway", "RetryPolicy", "complete",
    "parse_relation_list", "parse_score_map", "unwrap_text",
    "PLACEHOLDERS", "PromptKind", "PromptLibrary", "PromptTemplate", "default_library",
    "format_bullets", "format_relation_set", "render_prompt",
]
