from .gaps import (
    AggregateStats,
    GapMode,
    GapReport,
    MetricRate,
    MetricStatus,
    Presence,
    aggregate,
    gap_profile,
)
from .leak import (
    CONTENTION_MIN_CYCLES,
    LeakReport,
    LeakedByte,
    SpectreVerdict,
    eval_prime_probe,
    eval_spectre,
    parse_prime_probe_output,
    parse_spectre_output,
)

__all__ = [
    "AggregateStats",
    "GapMode",
    "GapReport",
    "MetricRate",
    "MetricStatus",
    "Presence",
    "aggregate",
    "gap_profile",
    "CONTENTION_MIN_CYCLES",
    "LeakReport",
    "LeakedByte",
    "SpectreVerdict",
    "eval_prime_probe",
    "eval_spectre",
    "parse_prime_probe_output",
    "parse_spectre_output",
]
