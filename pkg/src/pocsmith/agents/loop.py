"""The agent tool-call loop.

Alternates backend completion and tool execution until the model emits a
turn without a tool call or the call budget runs out. Every tool result
is appended to the conversation before the next completion, and a call
to an unregistered tool feeds an error result back to the model instead
of failing the run.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..toolchain.registry import ToolRegistry, ToolResult
from .backends import ChatBackend
from .messages import AgentRole, AgentTurn, Message

MAX_TOOL_CALLS = 10


@dataclass(frozen=True)
class LoopResult:
    final_message: Message
    turns: tuple[AgentTurn, ...]
    tool_results: tuple[ToolResult, ...]
    messages: tuple[Message, ...]  # conversation slice appended by this loop


def tool_loop(
    role: AgentRole,
    messages: list[Message],
    backend: ChatBackend,
    registry: ToolRegistry,
    max_calls: int = MAX_TOOL_CALLS,
) -> LoopResult:
    """Run one agent turn-loop starting from ``messages`` (system first)."""
    conversation = list(messages)
    appended: list[Message] = []
    turns: list[AgentTurn] = []
    results: list[ToolResult] = []
    schemas = [spec.wire_schema() for spec in registry.specs()]
    for _ in range(max_calls):
        turn = backend.complete(conversation, schemas, role)
        turns.append(turn)
        conversation.append(turn.message)
        appended.append(turn.message)
        call = turn.message.tool_call
        if call is None:
            return LoopResult(turn.message, tuple(turns), tuple(results), tuple(appended))
        result = registry.execute(call.tool_name, call.call_id, call.arguments)
        results.append(result)
        tool_message = Message(role="tool", content=result.text, tool_result_for=call.call_id)
        conversation.append(tool_message)
        appended.append(tool_message)
    return LoopResult(turns[-1].message, tuple(turns), tuple(results), tuple(appended))
