"""Cache hit/miss threshold calibration.

Instantiates the corpus microbenchmark template with the ISA-appropriate
timer and flush fragments, compiles and runs it pinned, and derives a
threshold biased toward the hit side:

    threshold = hit_median + round((miss_median - hit_median) * bias)

with bias defaulting to one quarter of the gap.
"""

from __future__ import annotations

import platform
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from ..errors import CalibrationDegenerate, PocsmithError
from .compile import compile_source
from .execute import execute

DEFAULT_SAMPLES = 1000
DEFAULT_WARMUP = 100
DEFAULT_BIAS = 0.25


@dataclass(frozen=True)
class IsaProfile:
    name: str
    timer: str
    flush: str
    includes: str
    timer_read: str
    flush_line: str
    memory_fence: str


X86_64 = IsaProfile(
    name="x86_64",
    timer="rdtscp",
    flush="clflush",
    includes="#include <x86intrin.h>",
    timer_read=(
        "    unsigned int aux;\n"
        "    return __rdtscp(&aux);"
    ),
    flush_line="    _mm_clflush(address);",
    memory_fence="    _mm_mfence();",
)

AARCH64 = IsaProfile(
    name="aarch64",
    timer="CNTVCT_EL0",
    flush="DC_CIVAC",
    includes="/* timer: CNTVCT_EL0, flush: DC CIVAC */",
    timer_read=(
        "    uint64_t value;\n"
        '    __asm__ __volatile__("isb\\n\\tmrs %0, CNTVCT_EL0" : "=r"(value));\n'
        "    return value;"
    ),
    flush_line=(
        '    __asm__ __volatile__("dc civac, %0" : : "r"(address) : "memory");'
    ),
    memory_fence='    __asm__ __volatile__("dsb sy\\n\\tisb" : : : "memory");',
)


def host_isa() -> IsaProfile:
    machine = platform.machine().lower()
    if machine in ("x86_64", "amd64"):
        return X86_64
    if machine in ("aarch64", "arm64"):
        return AARCH64
    raise PocsmithError(f"unsupported ISA for calibration: {machine}")


def instantiate_calibration(
    template: str,
    isa: IsaProfile,
    samples: int = DEFAULT_SAMPLES,
    warmup: int = DEFAULT_WARMUP,
) -> str:
    """Substitute every @TOKEN@ in the corpus template."""
    substitutions = {
        "@ISA_INCLUDES@": isa.includes,
        "@TIMER_READ@": isa.timer_read,
        "@FLUSH_LINE@": isa.flush_line,
        "@MEMORY_FENCE@": isa.memory_fence,
        "@SAMPLES@": str(samples),
        "@WARMUP@": str(warmup),
        "@TIMER_NAME@": isa.timer,
        "@FLUSH_NAME@": isa.flush,
    }
    out = template
    for token, value in substitutions.items():
        out = out.replace(token, value)
    leftover = re.search(r"@[A-Z_]+@", out)
    if leftover:
        raise PocsmithError(f"unresolved template token {leftover.group(0)}")
    return out


@dataclass(frozen=True)
class CalibrationResult:
    timer: str
    flush: str
    hit_median_cycles: float
    miss_median_cycles: float
    threshold_cycles: float
    samples: int

    def __post_init__(self) -> None:
        if not self.hit_median_cycles < self.threshold_cycles < self.miss_median_cycles:
            raise ValueError("threshold must sit strictly between the medians")

    def summary(self) -> str:
        return (
            f"timer={self.timer} flush={self.flush} "
            f"hit_median={self.hit_median_cycles:.0f} miss_median={self.miss_median_cycles:.0f} "
            f"threshold={self.threshold_cycles:.0f} samples={self.samples}"
        )


def derive_threshold(hit_median: float, miss_median: float, bias: float = DEFAULT_BIAS) -> float:
    """Hit-side-biased threshold; raises when the gap is degenerate."""
    if miss_median <= hit_median:
        raise CalibrationDegenerate(hit_median, miss_median)
    threshold = hit_median + round((miss_median - hit_median) * bias)
    if threshold <= hit_median:  # integer gap smaller than the bias step
        threshold = hit_median + (miss_median - hit_median) / 2.0
    return threshold


_MEDIAN = re.compile(r"^(hit|miss)_median=(\d+)\s*$", re.MULTILINE)


def parse_calibration_output(stdout: str) -> tuple[float, float]:
    medians = {m.group(1): float(m.group(2)) for m in _MEDIAN.finditer(stdout)}
    if "hit" not in medians or "miss" not in medians:
        raise PocsmithError(f"calibration output missing medians:\n{stdout}")
    return medians["hit"], medians["miss"]


def cache_thres(
    template: str,
    core: int = 0,
    samples: int = DEFAULT_SAMPLES,
    bias: float = DEFAULT_BIAS,
    work_dir: Path | str | None = None,
    isa: IsaProfile | None = None,
) -> CalibrationResult:
    """Full calibration: instantiate, compile, run pinned, derive threshold."""
    isa = isa or host_isa()
    source = instantiate_calibration(template, isa, samples=samples)
    work = Path(work_dir) if work_dir else Path(tempfile.mkdtemp(prefix="calibration-"))
    work.mkdir(parents=True, exist_ok=True)
    source_path = work / "calibrate.c"
    source_path.write_text(source)
    compiled = compile_source(source_path, "c")
    if not compiled.ok:
        raise PocsmithError(f"calibration build failed:\n{compiled.stderr}")
    result = execute(compiled.binary_path, core=core, timeout_s=60.0)
    if result.exit_code != 0:
        raise PocsmithError(
            f"calibration run failed (exit {result.exit_code}):\n{result.stderr}"
        )
    hit_median, miss_median = parse_calibration_output(result.stdout)
    threshold = derive_threshold(hit_median, miss_median, bias=bias)
    return CalibrationResult(
        timer=isa.timer,
        flush=isa.flush,
        hit_median_cycles=hit_median,
        miss_median_cycles=miss_median,
        threshold_cycles=threshold,
        samples=samples,
    )
