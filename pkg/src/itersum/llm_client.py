"""Chat-completion client for OpenAI-compatible endpoints, plus offline mocks.

All clients expose ``complete(config, messages) -> ChatMessage``. The HTTP
client talks to ``{endpoint_url}/chat/completions`` with a bearer token read
from the environment variable named in the config; the scripted mock replays
canned responses for tests, and the synthetic mock fabricates deterministic
ones for offline pipeline runs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass

import requests

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")

_BACKOFF_BASE_SECONDS = 1.0
_BACKOFF_FACTOR = 2.0
_LOG_TRUNCATE = 500
DEFAULT_CONCURRENCY_CAP = 4


class LlmClientError(Exception):
    """Base class for chat-completion failures."""


class AuthError(LlmClientError):
    """401/403 from the endpoint, or no credential available. Not retried."""


class ContextOverflow(LlmClientError):
    """Endpoint rejected the request for exceeding its token limit. Not retried."""


class TransientExhausted(LlmClientError):
    """Retries used up on 429/5xx/timeout failures."""


class ProtocolError(LlmClientError):
    """Response body or status did not match the chat-completion schema."""


class ScriptExhausted(LlmClientError):
    """Scripted mock ran out of responses."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    temperature: float = 0.0
    max_response_tokens: int = 512
    endpoint_url: str = "https://api.openai.com/v1"
    credential_source: str = "ITERSUM_API_KEY"
    request_timeout: float = 60.0
    max_retries: int = 3

    def __post_init__(self):
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if self.max_response_tokens < 1:
            raise ValueError("max_response_tokens must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")

    def public_dict(self) -> dict:
        """Serializable view; holds the credential env var *name* only."""
        return {
            "model_id": self.model_id,
            "temperature": self.temperature,
            "max_response_tokens": self.max_response_tokens,
            "endpoint_url": self.endpoint_url,
            "credential_source": self.credential_source,
            "request_timeout": self.request_timeout,
            "max_retries": self.max_retries,
        }


def _validate_request(messages: list[ChatMessage]) -> None:
    if not messages:
        raise ValueError("messages must be non-empty")
    if messages[-1].role != "user":
        raise ValueError("last message must have role 'user'")


class HttpChatClient:
    """Client for any endpoint speaking the OpenAI chat-completion schema.

    Transient failures (429, 5xx, timeouts, connection errors) are retried up
    to ``config.max_retries`` times with exponential backoff (base 1 s,
    factor 2, full jitter). A bounded semaphore caps in-flight requests so
    batch callers cannot stampede the endpoint.
    """

    def __init__(
        self,
        session: requests.Session | None = None,
        *,
        concurrency_cap: int = DEFAULT_CONCURRENCY_CAP,
        sleep=time.sleep,
        rng: random.Random | None = None,
    ):
        self._session = session or requests.Session()
        self._semaphore = threading.BoundedSemaphore(concurrency_cap)
        self._sleep = sleep
        self._rng = rng or random.Random()

    def complete(self, config: ModelConfig, messages: list[ChatMessage]) -> ChatMessage:
        _validate_request(messages)
        api_key = os.environ.get(config.credential_source)
        if not api_key:
            raise AuthError(
                f"no API key in environment variable {config.credential_source!r}"
            )
        url = config.endpoint_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": config.model_id,
            "messages": [m.to_dict() for m in messages],
            "temperature": config.temperature,
            "max_tokens": config.max_response_tokens,
        }
        body = json.dumps(payload)
        logger.debug("request %s: %.500s", url, body)

        attempt = 0
        while True:
            attempt += 1
            retryable, outcome = self._attempt(url, api_key, body, config)
            if not retryable:
                return outcome
            if attempt > config.max_retries:
                raise TransientExhausted(
                    f"{outcome} after {attempt} attempt(s) against {url}"
                )
            delay = self._rng.random() * _BACKOFF_BASE_SECONDS * _BACKOFF_FACTOR ** (attempt - 1)
            self._sleep(delay)

    def _attempt(self, url, api_key, body, config):
        """Run one HTTP attempt. Returns (retryable, result-or-reason)."""
        try:
            with self._semaphore:
                response = self._session.post(
                    url,
                    data=body,
                    headers={
                        "Authorization": f"Bearer {api_key}",
                        "Content-Type": "application/json",
                    },
                    timeout=config.request_timeout,
                )
        except requests.Timeout:
            return True, "request timed out"
        except requests.ConnectionError as exc:
            return True, f"connection failed: {exc}"

        logger.debug("response %s: %.500s", response.status_code, response.text)
        status = response.status_code
        if status in (401, 403):
            raise AuthError(f"endpoint returned {status}")
        if status == 429 or status >= 500:
            return True, f"endpoint returned {status}"
        if status != 200:
            if _is_context_overflow(response):
                raise ContextOverflow(f"endpoint reported token-limit violation ({status})")
            raise ProtocolError(f"unexpected status {status}: {response.text[:200]}")
        return False, _parse_completion(response)


def _is_context_overflow(response) -> bool:
    try:
        error = response.json().get("error", {})
    except ValueError:
        return False
    code = str(error.get("code", ""))
    message = str(error.get("message", ""))
    return code == "context_length_exceeded" or "maximum context length" in message


def _parse_completion(response) -> ChatMessage:
    try:
        data = response.json()
        content = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"unparseable completion body: {exc}") from exc
    if not isinstance(content, str) or not content:
        raise ProtocolError("assistant content missing or empty")
    return ChatMessage("assistant", content)


_default_client_lock = threading.Lock()
_default_client: HttpChatClient | None = None


def complete(config: ModelConfig, messages: list[ChatMessage]) -> ChatMessage:
    """Module-level convenience over a shared HttpChatClient."""
    global _default_client
    with _default_client_lock:
        if _default_client is None:
            _default_client = HttpChatClient()
    return _default_client.complete(config, messages)


class MockChatClient:
    """Replays a fixed script of assistant responses, in order.

    Records every request's full message list in ``requests`` so tests can
    assert on conversation shape. Raises ScriptExhausted past the last entry.
    """

    def __init__(self, script: list[str]):
        self._script = list(script)
        self._cursor = 0
        self.requests: list[list[ChatMessage]] = []

    @property
    def calls(self) -> int:
        return self._cursor

    def complete(self, config: ModelConfig, messages: list[ChatMessage]) -> ChatMessage:
        _validate_request(messages)
        self.requests.append(list(messages))
        if self._cursor >= len(self._script):
            raise ScriptExhausted(
                f"script exhausted after {len(self._script)} response(s)"
            )
        response = self._script[self._cursor]
        self._cursor += 1
        return ChatMessage("assistant", response)


def _digest_ints(*parts: str, count: int) -> list[int]:
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return list(digest[:count])


class SyntheticChatClient:
    """Deterministic offline stand-in used by the CLI's --mock mode.

    Fabricates responses from a hash of (model id, prompt), so distinct
    models produce distinct but reproducible text that never embeds the
    model id itself. Recognizes the judge prompt shapes and answers with a
    parseable verdict line.
    """

    def complete(self, config: ModelConfig, messages: list[ChatMessage]) -> ChatMessage:
        _validate_request(messages)
        prompt = messages[-1].content
        if "[The Start of Summary A]" in prompt:
            return ChatMessage("assistant", self._pairwise_verdict(prompt))
        if "[Model-generated Summary]" in prompt:
            return ChatMessage("assistant", self._consistency_verdict(prompt))
        turn_index = sum(1 for m in messages if m.role == "assistant")
        return ChatMessage(
            "assistant", self._summary(config.model_id, messages[0].content, turn_index)
        )

    def _summary(self, model_id: str, first_prompt: str, turn_index: int) -> str:
        code, a, c, t = _digest_ints(model_id, first_prompt, str(turn_index), count=4)
        study = f"FE{code:03d}"
        if turn_index == 0:
            return (
                f"Study {study} examined dosing with and without a meal. "
                f"Exposure rose under fed conditions. "
                f"Gastrointestinal tolerability improved with food. "
                f"Administration with food is recommended."
            )
        if turn_index == 1:
            return (
                f"Study {study} showed the AUC increased by {a}% and Cmax increased "
                f"by {c}% with a high-fat meal. "
                f"The median Tmax shifted by {t % 12} hours. "
                f"Tolerability improved under fed conditions. "
                f"Administration with food is recommended."
            )
        return (
            f"In study {study}, a high-fat meal increased the AUC by {a}% and Cmax "
            f"by {c}%, with the median Tmax shifting by {t % 12} hours. "
            f"Administration with food is recommended."
        )

    def _pairwise_verdict(self, prompt: str) -> str:
        pick = _digest_ints("pairwise", prompt, count=1)[0] % 3
        first = ("A won", "B won", "Tie")[pick]
        return f"{first}\nDecided by comparing coverage of the stated exposure values."

    def _consistency_verdict(self, prompt: str) -> str:
        pick = _digest_ints("consistency", prompt, count=1)[0] % 4
        first = "No" if pick == 0 else "Yes"
        return f"{first}\nChecked the stated exposure values against the reference."
