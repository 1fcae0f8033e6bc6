"""Exception hierarchy shared across the package.

Every error that crosses a module boundary lives here so callers can
catch one family (`PocsmithError`) or a precise class without importing
half the package.
"""

from __future__ import annotations


class PocsmithError(Exception):
    """Base class for all package-specific errors."""


# --- corpus / catalog -------------------------------------------------------

class CorpusMissing(PocsmithError):
    """A required corpus file (ground truth, problem statement) is absent."""


class UnbalancedMarker(PocsmithError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        super().__init__(f"unbalanced metric marker at line {line}" + (f": {detail}" if detail else ""))


class DuplicateMetric(PocsmithError):
    def __init__(self, metric_id: str):
        self.metric_id = metric_id
        super().__init__(f"metric {metric_id} marked more than once")


class MetricNotFound(PocsmithError):
    def __init__(self, metric_id: str):
        self.metric_id = metric_id
        super().__init__(f"metric {metric_id} not present in source")


# --- documents --------------------------------------------------------------

class MalformedModelOutput(PocsmithError):
    """Model output could not be parsed into the expected structure."""


class SectionMissing(PocsmithError):
    def __init__(self, section: str):
        self.section = section
        super().__init__(f"document section not editable or absent: {section}")


class BadAnchor(PocsmithError):
    def __init__(self, anchor: int, count: int):
        self.anchor = anchor
        self.count = count
        super().__init__(f"anchor {anchor} out of range (section has {count} items)")


class DocumentMissing(PocsmithError):
    """No document stored under the requested namespace and metric set."""


# --- backends ---------------------------------------------------------------

class BackendUnavailable(PocsmithError):
    """Chat or embedding provider unreachable after retries."""

    def __init__(self, detail: str, retries: int = 0):
        self.retries = retries
        super().__init__(detail)


class FixtureExhausted(PocsmithError):
    def __init__(self, role: str, index: int):
        self.role = role
        self.index = index
        super().__init__(f"scripted fixture exhausted for role {role!r} at turn {index}")


class RoleUnavailable(PocsmithError):
    """Agent role excluded by the active ablation configuration."""


# --- ragstore ---------------------------------------------------------------

class EmptyDocument(PocsmithError):
    """Chunking rejects empty text."""


class IndexLocked(PocsmithError):
    """Another writer holds the index lock."""


# --- toolchain --------------------------------------------------------------

class ToolchainMissing(PocsmithError):
    """No usable C/C++ compiler on this host."""


class BinaryMissing(PocsmithError):
    pass


class PinUnsupported(PocsmithError):
    """CPU pinning unavailable; callers may fall back unpinned."""


class InfoUnavailable(PocsmithError):
    """No cache-geometry source (sysfs, getconf, lscpu) produced data."""


class CalibrationDegenerate(PocsmithError):
    """Measured miss latency did not exceed hit latency; no threshold derivable."""

    def __init__(self, hit_median: float, miss_median: float):
        self.hit_median = hit_median
        self.miss_median = miss_median
        super().__init__(
            f"calibration degenerate: hit median {hit_median} >= miss median {miss_median}"
        )


class EmptyCounterList(PocsmithError):
    pass


# --- validation -------------------------------------------------------------

class NoLeakLines(PocsmithError):
    """PoC output contained no parseable leaked-byte lines."""


class JudgeParseFailure(PocsmithError):
    """Model-judged gap verdict could not be parsed into per-metric statuses."""


class MixedAttacks(PocsmithError):
    """Aggregation requires all gap reports to target one attack."""


# --- runstore ---------------------------------------------------------------

class WorkspaceUnwritable(PocsmithError):
    pass


class UnpricedModel(PocsmithError):
    def __init__(self, model: str):
        self.model = model
        super().__init__(f"no price entry for model {model!r}")


class CorruptTranscript(PocsmithError):
    pass


# --- workflow ---------------------------------------------------------------

class RetrievalMiss(PocsmithError):
    def __init__(self, metric_id: str):
        self.metric_id = metric_id
        super().__init__(f"no document retrievable for metric {metric_id}")


class BudgetExhausted(PocsmithError):
    """Internal signal; surfaced as a Halted verdict, never escapes a run."""
