"""Prompt assembly.

Prompt text lives as versioned assets organized by stage and role
(``assets/<stage>/<role>.{system,user}.txt`` plus shared fragments).
The assembler substitutes ``{placeholder}`` tokens in a single pass over
the template; an unknown placeholder is a hard error, and substituted
values are never re-scanned, so problem statements may contain any text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from ..errors import PocsmithError, RoleUnavailable
from ..knowledge.catalog import AttackVector
from .messages import AgentRole

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")

STAGE_ROLES: dict[str, tuple[AgentRole, ...]] = {
    "s1": (AgentRole.PROGRAMMER, AgentRole.REFLECTOR, AgentRole.GAP_PROFILER),
    "s2": (AgentRole.PROGRAMMER, AgentRole.REFLECTOR, AgentRole.SYNTHESIZER),
    "s3": (AgentRole.PROGRAMMER, AgentRole.REFLECTOR, AgentRole.FEEDBACK),
    "s4": (AgentRole.PROGRAMMER, AgentRole.REFLECTOR),
}

NO_PROBE_NOTE = (
    "2. Specialized hardware probes are unavailable in this configuration; "
    "rely on documented platform defaults."
)


class PromptAssemblyError(PocsmithError):
    pass


def _read_asset(relative: str) -> str:
    ref = resources.files("pocsmith.agents") / "assets" / relative
    try:
        return ref.read_text()
    except FileNotFoundError as exc:
        raise PromptAssemblyError(f"missing prompt asset {relative}") from exc


def substitute(template: str, mapping: dict[str, str]) -> str:
    def repl(match: re.Match) -> str:
        key = match.group(1)
        if key not in mapping:
            raise PromptAssemblyError(f"unresolved placeholder {{{key}}}")
        return mapping[key]

    return _PLACEHOLDER.sub(repl, template)


def anti_fabrication_clause() -> str:
    return _read_asset("fragments/anti_fabrication.txt").strip()


@dataclass(frozen=True)
class PromptContext:
    stage: str  # s1 | s2 | s3 | s4
    attack: AttackVector
    multi_agent: bool = True
    specialized_tools: bool = True
    core: int = 0
    problem_statement: str = ""
    template_source: str = ""
    metric_ids: tuple[str, ...] = field(default=())

    def mapping(self) -> dict[str, str]:
        hw_steps = (
            substitute(_read_asset("fragments/hw_probe_steps.txt"), {"core": str(self.core)}).rstrip()
            if self.specialized_tools
            else NO_PROBE_NOTE
        )
        invariants = substitute(
            _read_asset("fragments/invariants.txt"),
            {"anti_fabrication": anti_fabrication_clause()},
        ).strip()
        return {
            "attack": self.attack.value,
            "core": str(self.core),
            "problem_statement": self.problem_statement,
            "template_source": self.template_source,
            "metric_ids": ", ".join(self.metric_ids),
            "hw_probe_steps": hw_steps,
            "invariant_constraints": invariants,
        }


def assemble_prompts(role: AgentRole, ctx: PromptContext) -> tuple[str, str]:
    """(system_text, user_text) for one role under one stage context.

    Deterministic in (role, ctx). Raises RoleUnavailable when the active
    ablation or stage excludes the role.
    """
    if ctx.stage not in STAGE_ROLES:
        raise PromptAssemblyError(f"unknown stage {ctx.stage!r}")
    if role not in STAGE_ROLES[ctx.stage]:
        raise RoleUnavailable(f"{role.value} has no prompts in stage {ctx.stage}")
    if role is not AgentRole.PROGRAMMER and not ctx.multi_agent:
        raise RoleUnavailable(f"{role.value} is disabled under the single-agent ablation")
    mapping = ctx.mapping()
    system_text = substitute(_read_asset(f"{ctx.stage}/{role.value}.system.txt"), mapping)
    user_text = substitute(_read_asset(f"{ctx.stage}/{role.value}.user.txt"), mapping)
    return system_text.strip() + "\n", user_text.strip() + "\n"


def validation_instruction(ctx: PromptContext) -> str:
    """The Reflector's task text, reusable verbatim by a single agent that
    must self-validate when the multi-agent ablation is off."""
    return substitute(_read_asset(f"{ctx.stage}/reflector.user.txt"), ctx.mapping()).strip() + "\n"
