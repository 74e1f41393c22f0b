"""
LLM backends: a live chat-completions client (OpenAI-compatible servers)
and a scripted rule-based backend for deterministic runs without network.
"""

import hashlib
import json
import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Sequence, Union

from ..errors import BackendUnavailableError, ConfigError, TransientBackendError, UnmatchedRequestError
from .prompts import PromptKind

logger = logging.getLogger("kgtrail.backends")

DEFAULT_MODEL = "gpt-4.1"
DEFAULT_BASE_URL = "https://api.openai.com/v1"


@dataclass(frozen=True)
class CompletionRequest:
    kind: PromptKind
    rendered_text: str

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.rendered_text.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class CompletionResult:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


class LLMBackend(ABC):
    """One completion per call. Implementations must be safe for concurrent use."""

    name = "backend"

    @abstractmethod
    def generate(self, request: CompletionRequest) -> CompletionResult:
        ...


# ---------------------------------------------------------------------------
# Live backend
# ---------------------------------------------------------------------------

class LiveBackend(LLMBackend):
    """
    Chat-completions POST via the openai SDK: one user message, temperature 0.
    SDK-level retries are disabled; the gateway owns the retry policy.
    """

    name = "live"

    def __init__(
        self,
        api_key: Optional[str],
        base_url: Optional[str] = None,
        model: str = DEFAULT_MODEL,
        timeout: float = 60.0,
        client: Any = None,
    ):
        self._model = model
        if client is not None:
            self._client = client
            return
        if not api_key:
            raise ConfigError("live backend needs an API key (KGTRAIL_API_KEY or OPENAI_API_KEY)")
        try:
            from openai import OpenAI
        except ImportError:
            raise ImportError("Install openai: pip install openai")
        self._client = OpenAI(
            api_key=api_key,
            base_url=base_url or DEFAULT_BASE_URL,
            max_retries=0,
            timeout=timeout,
        )

    def generate(self, request: CompletionRequest) -> CompletionResult:
        import openai

        try:
            resp = self._client.chat.completions.create(
                model=self._model,
                messages=[{"role": "user", "content": request.rendered_text}],
                temperature=0,
            )
        except (openai.APIConnectionError, openai.RateLimitError, openai.InternalServerError) as e:
            # APITimeoutError is a subclass of APIConnectionError
            raise TransientBackendError(f"{type(e).__name__}: {e}") from e
        except openai.APIStatusError as e:
            if getattr(e, "status_code", 0) >= 500:
                raise TransientBackendError(f"HTTP {e.status_code}: {e}") from e
            raise BackendUnavailableError(f"HTTP {e.status_code}: {e}") from e
        except openai.OpenAIError as e:
            raise BackendUnavailableError(str(e)) from e

        content = resp.choices[0].message.content if resp.choices else None
        if not isinstance(content, str):
            raise TransientBackendError("backend returned no text content")
        usage = getattr(resp, "usage", None)
        if usage is None:
            logger.warning("Backend omitted token usage for %s request; counting 0 tokens", request.kind.value)
            return CompletionResult(text=content)
        return CompletionResult(
            text=content,
            prompt_tokens=int(getattr(usage, "prompt_tokens", 0) or 0),
            completion_tokens=int(getattr(usage, "completion_tokens", 0) or 0),
        )


# ---------------------------------------------------------------------------
# Scripted backend
# ---------------------------------------------------------------------------

@dataclass
class ScriptedRule:
    kind: PromptKind
    response: str
    contains: List[str] = field(default_factory=list)
    prompt_tokens: int = 0
    completion_tokens: int = 0
    max_uses: Optional[int] = None  # None = unlimited
    uses: int = 0

    @staticmethod
    def from_dict(data: dict, index: int = 0) -> "ScriptedRule":
        try:
            kind = PromptKind(data["kind"])
            response = data["response"]
        except KeyError as e:
            raise ConfigError(f"scripted rule {index}: missing field {e.args[0]}") from e
        except ValueError as e:
            raise ConfigError(f"scripted rule {index}: unknown kind {data.get('kind')!r}") from e
        contains = data.get("contains", [])
        if isinstance(contains, str):
            contains = [contains]
        return ScriptedRule(
            kind=kind,
            response=str(response),
            contains=[str(c) for c in contains],
            prompt_tokens=int(data.get("prompt_tokens", 0)),
            completion_tokens=int(data.get("completion_tokens", 0)),
            max_uses=data.get("max_uses"),
        )

    def matches(self, request: CompletionRequest) -> bool:
        if self.kind is not request.kind:
            return False
        if self.max_uses is not None and self.uses >= self.max_uses:
            return False
        return all(s in request.rendered_text for s in self.contains)


class ScriptedBackend(LLMBackend):
    """
    Ordered rule list; the first rule whose kind matches and whose substrings
    all occur in the rendered prompt answers with its canned response.
    """

    name = "scripted"

    def __init__(self, rules: Sequence[ScriptedRule]):
        self._rules = list(rules)
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedBackend":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read scripted rules {path}: {e}") from e
        rules = data.get("rules", data) if isinstance(data, dict) else data
        if not isinstance(rules, list):
            raise ConfigError(f"scripted rules {path}: expected a list of rules")
        logger.info("Loaded %d scripted rules from %s", len(rules), path)
        return cls([ScriptedRule.from_dict(r, i) for i, r in enumerate(rules)])

    def generate(self, request: CompletionRequest) -> CompletionResult:
        with self._lock:
            for rule in self._rules:
                if rule.matches(request):
                    rule.uses += 1
                    return CompletionResult(
                        text=rule.response,
                        prompt_tokens=rule.prompt_tokens,
                        completion_tokens=rule.completion_tokens,
                    )
        raise UnmatchedRequestError(request.kind.value, request.fingerprint)
