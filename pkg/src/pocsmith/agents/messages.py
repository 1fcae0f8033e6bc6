"""Conversation primitives shared by backends and the workflow engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..runstore.costing import UsageRecord


class AgentRole(str, Enum):
    PROGRAMMER = "programmer"
    REFLECTOR = "reflector"
    GAP_PROFILER = "gap_profiler"
    SYNTHESIZER = "synthesizer"
    FEEDBACK = "feedback"


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    tool_name: str
    arguments: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant | tool
    content: str
    tool_call: ToolCall | None = None
    tool_result_for: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant", "tool"):
            raise ValueError(f"bad message role {self.role!r}")
        if self.role == "tool" and not self.tool_result_for:
            raise ValueError("tool messages must reference the call they answer")

    def to_event(self) -> dict:
        event: dict[str, Any] = {"role": self.role, "content": self.content}
        if self.tool_call:
            event["tool_call"] = {
                "call_id": self.tool_call.call_id,
                "tool_name": self.tool_call.tool_name,
                "arguments": self.tool_call.arguments,
            }
        if self.tool_result_for:
            event["tool_result_for"] = self.tool_result_for
        return event


@dataclass(frozen=True)
class AgentTurn:
    message: Message
    usage: UsageRecord


def approx_tokens(text: str) -> int:
    """Whitespace-token approximation, recorded honestly as approximate;
    live backends use provider-reported counts instead."""
    return len(text.split())
