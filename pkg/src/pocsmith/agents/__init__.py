from .backends import (
    FAMILY_MODELS,
    PROVIDER_BASE_URLS,
    PROVIDER_ENV_KEYS,
    AnthropicBackend,
    ChatBackend,
    OpenAICompatBackend,
    ScriptedBackend,
    make_backend,
)
from .loop import MAX_TOOL_CALLS, LoopResult, tool_loop
from .messages import AgentRole, AgentTurn, Message, ToolCall, approx_tokens
from .prompts import (
    PromptContext,
    anti_fabrication_clause,
    assemble_prompts,
    validation_instruction,
)

__all__ = [
    "FAMILY_MODELS",
    "PROVIDER_BASE_URLS",
    "PROVIDER_ENV_KEYS",
    "AnthropicBackend",
    "ChatBackend",
    "OpenAICompatBackend",
    "ScriptedBackend",
    "make_backend",
    "MAX_TOOL_CALLS",
    "LoopResult",
    "tool_loop",
    "AgentRole",
    "AgentTurn",
    "Message",
    "ToolCall",
    "approx_tokens",
    "PromptContext",
    "anti_fabrication_clause",
    "assemble_prompts",
    "validation_instruction",
]
