"""
Gateway between the reasoning modules and an LLM backend:
renders prompts, retries transient failures, and charges the per-question budget ledger.
"""

import logging
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from ..errors import BackendUnavailableError, TransientBackendError
from .backends import CompletionRequest, CompletionResult, LLMBackend
from .prompts import PromptKind, PromptLibrary, default_library

logger = logging.getLogger("kgtrail.gateway")


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 3
    base_delay: float = 0.5
    factor: float = 2.0

    def delay(self, attempt: int) -> float:
        """Backoff before retry number `attempt` (1-based)."""
        return self.base_delay * (self.factor ** (attempt - 1))


@dataclass
class BudgetLedger:
    """LLM calls and tokens charged to one question. Only successful calls are charged."""

    question_id: str = ""
    llm_calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    re_asks: int = 0
    calls_by_kind: Counter = field(default_factory=Counter)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def charge(self, kind: PromptKind, result: CompletionResult) -> None:
        with self._lock:
            self.llm_calls += 1
            self.prompt_tokens += result.prompt_tokens
            self.completion_tokens += result.completion_tokens
            self.calls_by_kind[kind.value] += 1

    def note_re_ask(self) -> None:
        with self._lock:
            self.re_asks += 1

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "llm_calls": self.llm_calls,
            "total_tokens": self.total_tokens,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "re_asks": self.re_asks,
            "calls_by_kind": dict(sorted(self.calls_by_kind.items())),
        }


def complete(
    backend: LLMBackend,
    request: CompletionRequest,
    ledger: BudgetLedger,
    policy: RetryPolicy = RetryPolicy(),
    sleep: Callable[[float], None] = time.sleep,
) -> CompletionResult:
    """
    One charged completion. Transient failures are retried up to policy.max_retries
    times with exponential backoff; failed attempts are never charged.

    Raises:
        BackendUnavailableError: retries exhausted.
        BackendError: non-transient backend failure (propagated as is).
    """
    attempt = 0
    while True:
        try:
            result = backend.generate(request)
        except TransientBackendError as e:
            attempt += 1
            if attempt > policy.max_retries:
                raise BackendUnavailableError(
                    f"{request.kind.value} request failed after {policy.max_retries} retries: {e}"
                ) from e
            wait = policy.delay(attempt)
            logger.warning(
                "%s request failed (retry %d/%d in %.2fs): %s",
                request.kind.value, attempt, policy.max_retries, wait, e,
            )
            sleep(wait)
            continue
        ledger.charge(request.kind, result)
        logger.debug(
            "%s call charged to %s: %d+%d tokens",
            request.kind.value, ledger.question_id, result.prompt_tokens, result.completion_tokens,
        )
        return result


class LLMGateway:
    """Backend, templates, retry policy and ledger for one question."""

    def __init__(
        self,
        backend: LLMBackend,
        ledger: Optional[BudgetLedger] = None,
        library: Optional[PromptLibrary] = None,
        policy: RetryPolicy = RetryPolicy(),
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.backend = backend
        self.ledger = ledger if ledger is not None else BudgetLedger()
        self.library = library or default_library()
        self.policy = policy
        self._sleep = sleep

    def render(self, kind: PromptKind, fields: Mapping[str, object]) -> str:
        return self.library.render(kind, fields)

    def ask(self, kind: PromptKind, fields: Mapping[str, object]) -> CompletionResult:
        request = CompletionRequest(kind=kind, rendered_text=self.render(kind, fields))
        return complete(self.backend, request, self.ledger, self.policy, self._sleep)

    def for_question(self, question_id: str) -> "LLMGateway":
        """Fresh ledger, same backend and settings."""
        return LLMGateway(
            self.backend,
            BudgetLedger(question_id=question_id),
            self.library,
            self.policy,
            self._sleep,
        )
