"""Chat backends.

ScriptedBackend replays a JSONL fixture deterministically for offline
tests and demos; the live backends speak the OpenAI-compatible and
Anthropic wire formats over HTTPS. All of them expose one method:

    complete(messages, tool_schemas, role) -> AgentTurn

Scripted fixtures are keyed per role in file order and fail loudly on
exhaustion rather than improvising.
"""

from __future__ import annotations

import json
import os
import time
from collections import defaultdict, deque
from pathlib import Path
from typing import Protocol, Sequence

from ..errors import BackendUnavailable, FixtureExhausted
from ..runstore.costing import UsageRecord
from .messages import AgentRole, AgentTurn, Message, ToolCall, approx_tokens

RETRIES = 3
RETRY_BASE_DELAY_S = 1.0

# Provider presets per model family; override via run config.
FAMILY_MODELS = {
    "gpt": ("openai", "gpt-4o"),
    "claude": ("anthropic", "claude-sonnet-4-20250514"),
    "qwen": ("together", "Qwen3-Coder-480B-A35B-Instruct-FP8"),
}

PROVIDER_ENV_KEYS = {
    "openai": "UGEN_OPENAI_KEY",
    "anthropic": "UGEN_ANTHROPIC_KEY",
    "together": "UGEN_TOGETHER_KEY",
}

PROVIDER_BASE_URLS = {
    "openai": "https://api.openai.com/v1",
    "together": "https://api.together.xyz/v1",
    "anthropic": "https://api.anthropic.com",
}


class ChatBackend(Protocol):
    model_id: str

    def complete(
        self,
        messages: Sequence[Message],
        tool_schemas: Sequence[dict],
        role: AgentRole,
    ) -> AgentTurn: ...


def _check_request(messages: Sequence[Message]) -> None:
    if not messages:
        raise ValueError("message list must be non-empty")
    if messages[0].role != "system":
        raise ValueError("first message must be the system prompt")


class ScriptedBackend:
    """Fixture-driven stand-in for a live provider.

    Fixture format: JSONL, one object per turn:
        {"role": "programmer", "content": "...",
         "tool_call": {"name": "compile", "arguments": {...}}?}
    Turns are consumed per role in file order.
    """

    def __init__(self, fixture_path: Path | str, model_id: str = "scripted"):
        self.fixture_path = Path(fixture_path)
        self.model_id = model_id
        self._queues: dict[str, deque[dict]] = defaultdict(deque)
        self._consumed: dict[str, int] = defaultdict(int)
        call_counter = 0
        for lineno, line in enumerate(self.fixture_path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{self.fixture_path}:{lineno}: bad fixture line: {exc}") from exc
            entry.setdefault("_call_id", f"call-{call_counter}")
            call_counter += 1
            self._queues[entry["role"]].append(entry)

    def complete(
        self,
        messages: Sequence[Message],
        tool_schemas: Sequence[dict],
        role: AgentRole,
    ) -> AgentTurn:
        _check_request(messages)
        queue = self._queues[role.value]
        if not queue:
            raise FixtureExhausted(role.value, self._consumed[role.value])
        entry = queue.popleft()
        self._consumed[role.value] += 1
        tool_call = None
        if entry.get("tool_call"):
            raw = entry["tool_call"]
            tool_call = ToolCall(
                call_id=entry["_call_id"],
                tool_name=raw["name"],
                arguments=raw.get("arguments", {}),
            )
        content = entry.get("content", "")
        usage = UsageRecord(
            model=self.model_id,
            input_tokens=sum(approx_tokens(m.content) for m in messages),
            output_tokens=approx_tokens(content),
            agent_role=role.value,
        )
        return AgentTurn(
            message=Message(role="assistant", content=content, tool_call=tool_call),
            usage=usage,
        )

    def remaining(self, role: AgentRole) -> int:
        return len(self._queues[role.value])


def _wire_messages(messages: Sequence[Message]) -> list[dict]:
    wire = []
    for msg in messages:
        if msg.role == "tool":
            wire.append(
                {"role": "tool", "tool_call_id": msg.tool_result_for, "content": msg.content}
            )
        elif msg.role == "assistant" and msg.tool_call:
            wire.append(
                {
                    "role": "assistant",
                    "content": msg.content or None,
                    "tool_calls": [
                        {
                            "id": msg.tool_call.call_id,
                            "type": "function",
                            "function": {
                                "name": msg.tool_call.tool_name,
                                "arguments": json.dumps(msg.tool_call.arguments),
                            },
                        }
                    ],
                }
            )
        else:
            wire.append({"role": msg.role, "content": msg.content})
    return wire


class OpenAICompatBackend:
    """Chat-completions endpoint with function calling (OpenAI, Together,
    and any other provider speaking the same schema)."""

    def __init__(
        self,
        model_id: str,
        base_url: str,
        api_key_env: str,
        timeout_s: float = 120.0,
    ):
        self.model_id = model_id
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s

    def _post(self, payload: dict) -> dict:
        import httpx

        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise BackendUnavailable(f"missing API key in ${self.api_key_env}")
        last_error: Exception | None = None
        for attempt in range(RETRIES):
            try:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    headers={"Authorization": f"Bearer {key}"},
                    json=payload,
                    timeout=self.timeout_s,
                )
                if response.status_code >= 500:
                    raise BackendUnavailable(f"server error {response.status_code}")
                response.raise_for_status()
                return response.json()
            except Exception as exc:  # transport, 5xx, JSON
                last_error = exc
                time.sleep(RETRY_BASE_DELAY_S * (2**attempt))
        raise BackendUnavailable(f"chat completion failed: {last_error}", retries=RETRIES)

    def complete(
        self,
        messages: Sequence[Message],
        tool_schemas: Sequence[dict],
        role: AgentRole,
    ) -> AgentTurn:
        _check_request(messages)
        payload: dict = {"model": self.model_id, "messages": _wire_messages(messages)}
        if tool_schemas:
            payload["tools"] = list(tool_schemas)
        data = self._post(payload)
        return parse_openai_response(data, self.model_id, role)


def parse_openai_response(data: dict, model_id: str, role: AgentRole) -> AgentTurn:
    choice = data["choices"][0]["message"]
    tool_call = None
    if choice.get("tool_calls"):
        raw = choice["tool_calls"][0]
        try:
            arguments = json.loads(raw["function"].get("arguments") or "{}")
        except json.JSONDecodeError:
            arguments = {}
        tool_call = ToolCall(
            call_id=raw.get("id", "call-0"),
            tool_name=raw["function"]["name"],
            arguments=arguments,
        )
    usage = data.get("usage", {})
    return AgentTurn(
        message=Message(
            role="assistant", content=choice.get("content") or "", tool_call=tool_call
        ),
        usage=UsageRecord(
            model=model_id,
            input_tokens=int(usage.get("prompt_tokens", 0)),
            output_tokens=int(usage.get("completion_tokens", 0)),
            agent_role=role.value,
        ),
    )


class AnthropicBackend:
    """Native messages endpoint; system prompt rides in its own field and
    tool use arrives as content blocks."""

    def __init__(
        self,
        model_id: str,
        base_url: str = PROVIDER_BASE_URLS["anthropic"],
        api_key_env: str = PROVIDER_ENV_KEYS["anthropic"],
        timeout_s: float = 120.0,
        max_tokens: int = 8192,
    ):
        self.model_id = model_id
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.max_tokens = max_tokens

    def complete(
        self,
        messages: Sequence[Message],
        tool_schemas: Sequence[dict],
        role: AgentRole,
    ) -> AgentTurn:
        import httpx

        _check_request(messages)
        key = os.environ.get(self.api_key_env, "")
        if not key:
            raise BackendUnavailable(f"missing API key in ${self.api_key_env}")
        system = messages[0].content
        wire: list[dict] = []
        for msg in messages[1:]:
            if msg.role == "tool":
                wire.append(
                    {
                        "role": "user",
                        "content": [
                            {
                                "type": "tool_result",
                                "tool_use_id": msg.tool_result_for,
                                "content": msg.content,
                            }
                        ],
                    }
                )
            elif msg.role == "assistant" and msg.tool_call:
                blocks: list[dict] = []
                if msg.content:
                    blocks.append({"type": "text", "text": msg.content})
                blocks.append(
                    {
                        "type": "tool_use",
                        "id": msg.tool_call.call_id,
                        "name": msg.tool_call.tool_name,
                        "input": msg.tool_call.arguments,
                    }
                )
                wire.append({"role": "assistant", "content": blocks})
            else:
                wire.append({"role": msg.role, "content": msg.content})
        tools = [
            {
                "name": schema["function"]["name"],
                "description": schema["function"]["description"],
                "input_schema": schema["function"]["parameters"],
            }
            for schema in tool_schemas
        ]
        payload: dict = {
            "model": self.model_id,
            "max_tokens": self.max_tokens,
            "system": system,
            "messages": wire,
        }
        if tools:
            payload["tools"] = tools
        last_error: Exception | None = None
        for attempt in range(RETRIES):
            try:
                response = httpx.post(
                    f"{self.base_url}/v1/messages",
                    headers={
                        "x-api-key": key,
                        "anthropic-version": "2023-06-01",
                    },
                    json=payload,
                    timeout=self.timeout_s,
                )
                if response.status_code >= 500:
                    raise BackendUnavailable(f"server error {response.status_code}")
                response.raise_for_status()
                return parse_anthropic_response(response.json(), self.model_id, role)
            except Exception as exc:
                last_error = exc
                time.sleep(RETRY_BASE_DELAY_S * (2**attempt))
        raise BackendUnavailable(f"messages request failed: {last_error}", retries=RETRIES)


def parse_anthropic_response(data: dict, model_id: str, role: AgentRole) -> AgentTurn:
    text_parts: list[str] = []
    tool_call = None
    for block in data.get("content", []):
        if block["type"] == "text":
            text_parts.append(block["text"])
        elif block["type"] == "tool_use" and tool_call is None:
            tool_call = ToolCall(
                call_id=block["id"], tool_name=block["name"], arguments=block.get("input", {})
            )
    usage = data.get("usage", {})
    return AgentTurn(
        message=Message(role="assistant", content="\n".join(text_parts), tool_call=tool_call),
        usage=UsageRecord(
            model=model_id,
            input_tokens=int(usage.get("input_tokens", 0)),
            output_tokens=int(usage.get("output_tokens", 0)),
            agent_role=role.value,
        ),
    )


def make_backend(spec: str, model_family: str = "gpt") -> ChatBackend:
    """Build a backend from a CLI-style spec.

    ``scripted:<fixture path>`` or ``live`` (provider chosen from the
    model family presets).
    """
    if spec.startswith("scripted:"):
        return ScriptedBackend(spec.split(":", 1)[1])
    if spec == "live":
        if model_family not in FAMILY_MODELS:
            raise ValueError(
                f"unknown model family {model_family!r}; known: {sorted(FAMILY_MODELS)}"
            )
        provider, model_id = FAMILY_MODELS[model_family]
        if provider == "anthropic":
            return AnthropicBackend(model_id)
        return OpenAICompatBackend(
            model_id,
            base_url=PROVIDER_BASE_URLS[provider],
            api_key_env=PROVIDER_ENV_KEYS[provider],
        )
    raise ValueError(f"unknown backend spec {spec!r} (use 'live' or 'scripted:<fixture>')")
