"""Remote chat-completion backends.

Optional: the deterministic rule backend and template rendering are the
defaults, and nothing here is imported on that path.  Configuration comes
from environment variables:

    DIET_ADVISOR_LLM_ENDPOINT    chat-completion URL (OpenAI-style schema)
    DIET_ADVISOR_LLM_API_KEY     bearer credential (optional)
    DIET_ADVISOR_LLM_MODEL       model name
    DIET_ADVISOR_TEMP_INTENT     default 0.0 (strict structured output)
    DIET_ADVISOR_TEMP_INNER      default 0.1 (note-taking reasoning)
    DIET_ADVISOR_TEMP_OUTER      default 0.25 (user-facing phrasing)
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import requests

from .errors import BackendUnavailableError
from .intents import Intent, IntentKind, RecognizerContext, out_of_scope
from .templates import intent_prompt

DEFAULT_TEMPERATURES = {"intent": 0.0, "inner": 0.1, "outer": 0.25}


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    api_key: str = ""
    timeout: float = 30.0

    @classmethod
    def from_env(cls) -> "LlmConfig":
        endpoint = os.environ.get("DIET_ADVISOR_LLM_ENDPOINT", "")
        if not endpoint:
            raise BackendUnavailableError("DIET_ADVISOR_LLM_ENDPOINT is not set")
        return cls(
            endpoint=endpoint,
            model=os.environ.get("DIET_ADVISOR_LLM_MODEL", ""),
            api_key=os.environ.get("DIET_ADVISOR_LLM_API_KEY", ""),
        )


def temperature_for(role: str) -> float:
    env = os.environ.get(f"DIET_ADVISOR_TEMP_{role.upper()}")
    return float(env) if env is not None else DEFAULT_TEMPERATURES[role]


class ChatCompletionClient:
    """Minimal OpenAI-style chat-completion HTTP client."""

    def __init__(self, config: LlmConfig | None = None, session=None):
        self.config = config or LlmConfig.from_env()
        self._session = session or requests.Session()

    def complete(self, messages: list[dict], temperature: float) -> str:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        payload = {"model": self.config.model, "messages": messages,
                   "temperature": temperature}
        try:
            response = self._session.post(self.config.endpoint, json=payload,
                                          headers=headers, timeout=self.config.timeout)
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            raise BackendUnavailableError(f"chat completion failed: {exc}") from exc


class RemoteIntentBackend:
    """Few-shot prompted classifier over a remote model.

    The reply must be a single JSON object; a malformed reply is retried
    once and then demoted to OutOfScope.
    """

    name = "remote"

    def __init__(self, client: ChatCompletionClient | None = None, locale: str = "en"):
        self.client = client or ChatCompletionClient()
        self.locale = locale
        self.temperature = temperature_for("intent")

    @property
    def identity(self) -> str:
        return f"remote/{self.client.config.model}@{self.temperature}"

    def _messages(self, utterance: str, context: RecognizerContext | None) -> list[dict]:
        prompt = intent_prompt(self.locale)
        messages = [{"role": "system", "content": prompt["system"]}]
        for example in prompt["examples"]:
            messages.append({"role": "user", "content": example["user"]})
            messages.append({"role": "assistant", "content": example["reply"]})
        if context and context.memory_text:
            messages.append({"role": "system",
                             "content": f"Conversation so far:\n{context.memory_text}"})
        messages.append({"role": "user", "content": utterance})
        return messages

    def classify(self, utterance: str, context: RecognizerContext | None = None) -> Intent:
        messages = self._messages(utterance, context)
        for _ in range(2):
            content = self.client.complete(messages, self.temperature)
            intent = _parse_reply(content)
            if intent is not None:
                return intent
        return out_of_scope("remote:malformed-reply")


def _parse_reply(content: str) -> Intent | None:
    try:
        doc = json.loads(content.strip())
        kind = IntentKind(doc["kind"])
        params = doc.get("params", {})
        if not isinstance(params, dict):
            return None
        return Intent(kind, params if kind is not IntentKind.OUT_OF_SCOPE else {},
                      "remote")
    except (json.JSONDecodeError, KeyError, ValueError, TypeError):
        return None


class RemoteSpeechBackend:
    """Rephrases deterministic template renderings with a remote model."""

    def __init__(self, client: ChatCompletionClient | None = None, role: str = "outer"):
        self.client = client or ChatCompletionClient()
        self.temperature = temperature_for(role)

    @property
    def identity(self) -> str:
        return f"remote-speech/{self.client.config.model}@{self.temperature}"

    def rephrase(self, text: str) -> str:
        messages = [
            {"role": "system",
             "content": ("Rephrase the following assistant message naturally. "
                         "Keep every number, name and unit exactly as written. "
                         "Reply with the rephrased message only.")},
            {"role": "user", "content": text},
        ]
        return self.client.complete(messages, self.temperature)
