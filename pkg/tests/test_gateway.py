import threading
from pathlib import Path
from types import SimpleNamespace
from typing import List

import httpx
import openai
import pytest

from src.errors import (
    BackendUnavailableError,
    ConfigError,
    TransientBackendError,
    UnmatchedRequestError,
)
from src.llm import (
    BudgetLedger,
    CompletionRequest,
    CompletionResult,
    LiveBackend,
    LLMBackend,
    LLMGateway,
    PromptKind,
    RetryPolicy,
    ScriptedBackend,
    ScriptedRule,
    complete,
)


class FlakyBackend(LLMBackend):
    """Fails transiently `failures` times, then answers."""

    def __init__(self, failures: int):
        self.failures = failures
        self.attempts = 0

    def generate(self, request: CompletionRequest) -> CompletionResult:
        self.attempts += 1
        if self.attempts <= self.failures:
            raise TransientBackendError("connection reset")
        return CompletionResult(text="ok", prompt_tokens=7, completion_tokens=3)


class FakeCompletions:
    def __init__(self, outcome):
        self.outcome = outcome
        self.calls: List[dict] = []

    def create(self, **kwargs):
        self.calls.append(kwargs)
        if isinstance(self.outcome, Exception):
            raise self.outcome
        return self.outcome


def _fake_client(outcome) -> SimpleNamespace:
    return SimpleNamespace(chat=SimpleNamespace(completions=FakeCompletions(outcome)))


def _response(content, usage=True) -> SimpleNamespace:
    return SimpleNamespace(
        choices=[SimpleNamespace(message=SimpleNamespace(content=content))],
        usage=SimpleNamespace(prompt_tokens=12, completion_tokens=5) if usage else None,
    )


def _http_response(status: int) -> httpx.Response:
    return httpx.Response(status, request=httpx.Request("POST", "https://llm.test/v1/chat/completions"))


_REQUEST = CompletionRequest(PromptKind.CONTEXT_GENERATION, "prompt text")


# ==================== Retry & ledger ====================

def test_transient_failures_are_retried_with_backoff_and_charged_once() -> None:
    sleeps: List[float] = []
    backend = FlakyBackend(failures=3)
    ledger = BudgetLedger("q1")
    result = complete(backend, _REQUEST, ledger, RetryPolicy(), sleeps.append)
    assert result.text == "ok"
    assert sleeps == [0.5, 1.0, 2.0]
    assert ledger.llm_calls == 1
    assert ledger.total_tokens == 10


def test_exhausted_retries_charge_nothing() -> None:
    ledger = BudgetLedger("q1")
    with pytest.raises(BackendUnavailableError):
        complete(FlakyBackend(failures=4), _REQUEST, ledger, RetryPolicy(max_retries=3), lambda _: None)
    assert ledger.llm_calls == 0
    assert ledger.total_tokens == 0


def test_ledger_counts_by_kind_and_is_thread_safe() -> None:
    ledger = BudgetLedger("q1")
    result = CompletionResult("x", prompt_tokens=2, completion_tokens=1)

    def work() -> None:
        for _ in range(250):
            ledger.charge(PromptKind.RERANKING, result)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert ledger.llm_calls == 1000
    assert ledger.total_tokens == 3000
    assert ledger.to_dict()["calls_by_kind"] == {"Reranking": 1000}


def test_for_question_gives_fresh_ledger() -> None:
    gateway = LLMGateway(ScriptedBackend([ScriptedRule(PromptKind.PATTERN_EXTRACTION, "p", prompt_tokens=4)]))
    first = gateway.for_question("a")
    first.ask(PromptKind.PATTERN_EXTRACTION, {"trajectory_summaries": '    - "s"'})
    second = gateway.for_question("b")
    assert first.ledger.llm_calls == 1
    assert second.ledger.llm_calls == 0
    assert second.ledger.question_id == "b"


# ==================== Scripted backend ====================

def test_scripted_first_matching_rule_wins() -> None:
    backend = ScriptedBackend([
        ScriptedRule(PromptKind.RERANKING, "first", contains=["alpha"]),
        ScriptedRule(PromptKind.RERANKING, "second"),
    ])
    assert backend.generate(CompletionRequest(PromptKind.RERANKING, "alpha beta")).text == "first"
    assert backend.generate(CompletionRequest(PromptKind.RERANKING, "beta")).text == "second"


def test_scripted_max_uses_falls_through() -> None:
    backend = ScriptedBackend([
        ScriptedRule(PromptKind.RERANKING, "once", max_uses=1),
        ScriptedRule(PromptKind.RERANKING, "always"),
    ])
    texts = [backend.generate(CompletionRequest(PromptKind.RERANKING, "x")).text for _ in range(3)]
    assert texts == ["once", "always", "always"]


def test_scripted_unmatched_request_reports_fingerprint() -> None:
    backend = ScriptedBackend([ScriptedRule(PromptKind.RERANKING, "r")])
    with pytest.raises(UnmatchedRequestError) as e:
        backend.generate(_REQUEST)
    assert e.value.kind == "ContextGeneration"
    assert e.value.fingerprint == _REQUEST.fingerprint
    assert len(_REQUEST.fingerprint) == 12


def test_scripted_rules_file(tmp_path: Path) -> None:
    path = tmp_path / "rules.json"
    path.write_text('[{"kind": "Reranking", "response": "{}", "contains": "x", "prompt_tokens": 3}]', encoding="utf-8")
    result = ScriptedBackend.from_file(path).generate(CompletionRequest(PromptKind.RERANKING, "xyz"))
    assert (result.text, result.prompt_tokens) == ("{}", 3)

    path.write_text('[{"kind": "Guessing", "response": "?"}]', encoding="utf-8")
    with pytest.raises(ConfigError):
        ScriptedBackend.from_file(path)


# ==================== Live backend ====================

def test_live_backend_sends_one_user_message_at_temperature_zero() -> None:
    client = _fake_client(_response("Find the director."))
    backend = LiveBackend(api_key=None, model="test-model", client=client)
    result = backend.generate(_REQUEST)
    assert (result.text, result.prompt_tokens, result.completion_tokens) == ("Find the director.", 12, 5)
    call = client.chat.completions.calls[0]
    assert call["model"] == "test-model"
    assert call["temperature"] == 0
    assert call["messages"] == [{"role": "user", "content": "prompt text"}]


def test_live_backend_missing_usage_counts_zero() -> None:
    backend = LiveBackend(api_key=None, client=_fake_client(_response("ok", usage=False)))
    assert backend.generate(_REQUEST).total_tokens == 0


def test_live_backend_classifies_errors() -> None:
    server_error = openai.InternalServerError("boom", response=_http_response(503), body=None)
    with pytest.raises(TransientBackendError):
        LiveBackend(api_key=None, client=_fake_client(server_error)).generate(_REQUEST)

    connection = openai.APIConnectionError(request=httpx.Request("POST", "https://llm.test"))
    with pytest.raises(TransientBackendError):
        LiveBackend(api_key=None, client=_fake_client(connection)).generate(_REQUEST)

    auth = openai.AuthenticationError("bad key", response=_http_response(401), body=None)
    with pytest.raises(BackendUnavailableError):
        LiveBackend(api_key=None, client=_fake_client(auth)).generate(_REQUEST)


def test_live_backend_needs_api_key() -> None:
    with pytest.raises(ConfigError):
        LiveBackend(api_key=None)
