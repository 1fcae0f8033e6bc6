"""Corpus access: manifest, annotated ground truths, problem statements.

The corpus ships as plain files under ``corpus/`` next to the package
checkout (or wherever the run config points). Python never edits it.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import CorpusMissing
from .knowledge.catalog import AttackVector, MetricCatalog
from .knowledge.markers import AnnotatedPoc, parse_markers

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

KINDS = ("GroundTruth", "VictimVariant", "CalibrationTemplate")


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    attack: AttackVector
    kind: str
    isa: str


@dataclass
class CorpusManifest:
    root: Path
    entries: list[CorpusEntry]

    def find(self, *, attack: AttackVector | None = None, kind: str | None = None) -> list[CorpusEntry]:
        hits = self.entries
        if attack is not None:
            hits = [e for e in hits if e.attack is attack]
        if kind is not None:
            hits = [e for e in hits if e.kind == kind]
        return hits

    def read(self, entry: CorpusEntry) -> str:
        return (self.root / entry.path).read_text()


def load_manifest(root: Path | str) -> CorpusManifest:
    root = Path(root)
    manifest_path = root / "manifest.toml"
    if not manifest_path.is_file():
        raise CorpusMissing(f"no corpus manifest at {manifest_path}")
    with open(manifest_path, "rb") as fh:
        data = tomllib.load(fh)
    entries = []
    for raw in data.get("entry", []):
        if raw["kind"] not in KINDS:
            raise CorpusMissing(f"unknown corpus kind {raw['kind']!r} for {raw['path']}")
        if not (root / raw["path"]).is_file():
            raise CorpusMissing(f"manifest entry missing on disk: {raw['path']}")
        entries.append(
            CorpusEntry(
                path=raw["path"],
                attack=AttackVector.parse(raw["attack"]),
                kind=raw["kind"],
                isa=raw.get("isa", "portable"),
            )
        )
    return CorpusManifest(root=root, entries=entries)


def ground_truth(manifest: CorpusManifest, attack: AttackVector) -> AnnotatedPoc:
    hits = manifest.find(attack=attack, kind="GroundTruth")
    if not hits:
        raise CorpusMissing(f"no ground truth for {attack.value}")
    return AnnotatedPoc(attack=attack, source=manifest.read(hits[0]))


def problem_statement(manifest: CorpusManifest, attack: AttackVector, path: Path | str | None = None) -> str:
    """Base statement for the attack, or a specific variant file when given."""
    if path is not None:
        path = Path(path)
        candidate = path if path.is_absolute() else manifest.root / path
        if not candidate.is_file():
            raise CorpusMissing(f"problem statement not found: {path}")
        return candidate.read_text()
    hits = manifest.find(attack=attack, kind="VictimVariant")
    if not hits:
        raise CorpusMissing(f"no problem statement for {attack.value}")
    return manifest.read(hits[0])


def calibration_template(manifest: CorpusManifest) -> str:
    hits = manifest.find(kind="CalibrationTemplate")
    if not hits:
        raise CorpusMissing("no calibration template in corpus")
    return manifest.read(hits[0])


def check_ground_truths(manifest: CorpusManifest, catalogs: dict[AttackVector, MetricCatalog]) -> None:
    """Manifest invariant: ground truths parse cleanly and cover every
    templatable metric of their catalog."""
    for attack, catalog in catalogs.items():
        poc = ground_truth(manifest, attack)
        marked = {span.metric_id for span in parse_markers(poc.source)}
        needed = {m.id for m in catalog.templatable()}
        missing = needed - marked
        if missing:
            raise CorpusMissing(
                f"{attack.value} ground truth lacks markers for {sorted(missing)}"
            )


def default_corpus_root() -> Path:
    """Walk up from cwd looking for a corpus/manifest.toml."""
    here = Path.cwd()
    for candidate in [here, *here.parents]:
        if (candidate / "corpus" / "manifest.toml").is_file():
            return candidate / "corpus"
    return here / "corpus"
