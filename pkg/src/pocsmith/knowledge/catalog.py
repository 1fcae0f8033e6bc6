"""Attack metric catalogs.

A catalog decomposes one attack into its minimal building blocks
("metrics", M1..M19) and records which metric sets share a merged
template. Catalogs are data: they ship as TOML files under
``knowledge/data/`` and are loaded, never hard-coded.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class AttackVector(str, Enum):
    SPECTRE_V1 = "spectre-v1"
    PRIME_PROBE = "prime-probe"

    @classmethod
    def parse(cls, text: str) -> "AttackVector":
        norm = text.strip().lower().replace("_", "-").replace("+", "-")
        aliases = {
            "spectre": cls.SPECTRE_V1,
            "spectre-v1": cls.SPECTRE_V1,
            "spectrev1": cls.SPECTRE_V1,
            "prime-probe": cls.PRIME_PROBE,
            "primeprobe": cls.PRIME_PROBE,
            "pp": cls.PRIME_PROBE,
        }
        if norm not in aliases:
            raise ValueError(f"unknown attack vector: {text!r}")
        return aliases[norm]


@dataclass(frozen=True)
class AttackMetric:
    id: str
    name: str
    attack: AttackVector
    description: str = ""
    in_problem_statement: bool = False

    @property
    def number(self) -> int:
        return int(self.id[1:])


@dataclass
class MetricCatalog:
    attack: AttackVector
    metrics: list[AttackMetric] = field(default_factory=list)
    # template id -> metric ids that share one template/document
    merged_templates: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [m.id for m in self.metrics]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate metric ids in {self.attack.value} catalog")
        for template_id, group in self.merged_templates.items():
            if len(group) < 2:
                raise ValueError(f"merged template {template_id} needs >= 2 metrics")
            unknown = group - set(ids)
            if unknown:
                raise ValueError(f"merged template {template_id} references unknown ids {sorted(unknown)}")

    def get(self, metric_id: str) -> AttackMetric:
        for m in self.metrics:
            if m.id == metric_id:
                return m
        raise KeyError(metric_id)

    def templatable(self) -> list[AttackMetric]:
        """Metrics that can be omitted from the ground truth to form a template."""
        return [m for m in self.metrics if not m.in_problem_statement]

    def template_groups(self) -> list[tuple[str, frozenset[str]]]:
        """Ordered (template_id, metric_ids) pairs covering every templatable metric.

        Merged groups keep their explicit ids from the catalog file; a
        singleton inherits its metric number (M11 -> T11).
        """
        merged_ids = {mid for group in self.merged_templates.values() for mid in group}
        groups: list[tuple[str, frozenset[str]]] = []
        emitted: set[str] = set()
        for metric in self.templatable():
            if metric.id in emitted:
                continue
            if metric.id in merged_ids:
                template_id, group = next(
                    (t, g) for t, g in self.merged_templates.items() if metric.id in g
                )
                groups.append((template_id, group))
                emitted |= set(group)
            else:
                groups.append((f"T{metric.number}", frozenset({metric.id})))
                emitted.add(metric.id)
        return groups

    def template_for(self, metric_id: str) -> tuple[str, frozenset[str]]:
        for template_id, group in self.template_groups():
            if metric_id in group:
                return template_id, group
        raise KeyError(metric_id)


def _catalog_from_mapping(data: dict) -> MetricCatalog:
    attack = AttackVector.parse(data["attack"])
    metrics = []
    for entry in data.get("metric", []):
        entry_attack = AttackVector.parse(entry.get("attack", attack.value))
        if entry_attack is not attack:
            raise ValueError(f"metric {entry['id']} attack {entry_attack} != catalog {attack}")
        metrics.append(
            AttackMetric(
                id=entry["id"],
                name=entry["name"],
                attack=attack,
                description=entry.get("description", ""),
                in_problem_statement=entry.get("in_problem_statement", False),
            )
        )
    merged = {
        entry["template"]: frozenset(entry["ids"]) for entry in data.get("merged", [])
    }
    return MetricCatalog(attack=attack, metrics=metrics, merged_templates=merged)


def load_catalog_file(path: Path | str) -> MetricCatalog:
    with open(path, "rb") as fh:
        return _catalog_from_mapping(tomllib.load(fh))


_BUNDLED = {
    AttackVector.SPECTRE_V1: "spectre_v1.toml",
    AttackVector.PRIME_PROBE: "prime_probe.toml",
}


def load_catalog(attack: AttackVector | str) -> MetricCatalog:
    """Load the catalog bundled with the package for the given attack."""
    vector = attack if isinstance(attack, AttackVector) else AttackVector.parse(attack)
    ref = resources.files("pocsmith.knowledge") / "data" / _BUNDLED[vector]
    with ref.open("rb") as fh:
        return _catalog_from_mapping(tomllib.load(fh))
