from __future__ import annotations

import platform
import shutil
import stat
import time
from pathlib import Path

import pytest

from pocsmith.corpus import calibration_template, load_manifest
from pocsmith.errors import (
    BinaryMissing,
    CalibrationDegenerate,
    EmptyCounterList,
    InfoUnavailable,
)
from pocsmith.toolchain import (
    AARCH64,
    X86_64,
    ToolRegistry,
    ToolSpec,
    build_registry,
    compile_source,
    derive_threshold,
    execute,
    hpc,
    hw_info,
    instantiate_calibration,
    parse_calibration_output,
    parse_perf_stat,
    truncate_text,
)
from pocsmith.toolchain.calibration import cache_thres
from pocsmith.toolchain.registry import MAX_TOOL_TEXT, TRUNCATION_SENTINEL, ToolResult

from conftest import CORPUS_ROOT

FIXTURES = Path(__file__).parent / "fixtures"


# --- compile -------------------------------------------------------------------

def test_compile_valid_c(tmp_path: Path):
    src = tmp_path / "ok.c"
    src.write_text("int main(void){return 0;}\n")
    result = compile_source(src)
    assert result.ok
    assert result.binary_path is not None and result.binary_path.is_file()


def test_compile_syntax_error_captures_stderr(tmp_path: Path):
    src = tmp_path / "bad.c"
    src.write_text("int main(void){return 0\n")
    result = compile_source(src)
    assert not result.ok
    assert result.binary_path is None
    assert "error" in result.stderr


def test_compile_corpus_spectre_warning_free(tmp_path: Path):
    if platform.machine() not in ("x86_64", "aarch64", "arm64"):
        pytest.skip("corpus PoCs build on x86-64/AArch64 only")
    src = CORPUS_ROOT / "spectre-v1" / "ground_truth.c"
    result = compile_source(src, output_path=tmp_path / "spectre_gt")
    assert result.ok, result.stderr
    assert result.stderr.strip() == "", f"warnings present:\n{result.stderr}"


def test_compile_corpus_prime_probe_warning_free(tmp_path: Path):
    if platform.machine() not in ("x86_64", "aarch64", "arm64"):
        pytest.skip("corpus PoCs build on x86-64/AArch64 only")
    src = CORPUS_ROOT / "prime-probe" / "ground_truth.c"
    result = compile_source(src, output_path=tmp_path / "pp_gt")
    assert result.ok, result.stderr
    assert result.stderr.strip() == ""


# --- execute -------------------------------------------------------------------

def _build(tmp_path: Path, name: str, body: str) -> Path:
    src = tmp_path / f"{name}.c"
    src.write_text(body)
    result = compile_source(src)
    assert result.ok, result.stderr
    return result.binary_path


def test_execute_captures_stdout(tmp_path: Path):
    binary = _build(tmp_path, "echo", '#include <stdio.h>\nint main(void){printf("ok\\n");return 0;}\n')
    result = execute(binary, core=0, timeout_s=10)
    assert result.stdout == "ok\n"
    assert result.exit_code == 0
    assert result.core == 0
    assert not result.timed_out


def test_execute_timeout_kills(tmp_path: Path):
    binary = _build(tmp_path, "sleeper", "#include <unistd.h>\nint main(void){sleep(30);return 0;}\n")
    started = time.monotonic()
    result = execute(binary, core=0, timeout_s=1)
    elapsed = time.monotonic() - started
    assert result.timed_out
    assert result.exit_code == -9
    assert elapsed < 1 + 1.5  # bounded grace beyond the timeout


def test_execute_missing_binary(tmp_path: Path):
    with pytest.raises(BinaryMissing):
        execute(tmp_path / "nope", core=0)


def test_execute_unpinnable_core_falls_back(tmp_path: Path):
    binary = _build(tmp_path, "tiny", "int main(void){return 7;}\n")
    result = execute(binary, core=4096, timeout_s=5)
    assert result.exit_code == 7
    assert not result.pinned
    assert "unpinned" in result.warning


# --- hw_info --------------------------------------------------------------------

def test_hw_info_fixture_tree_hand_read():
    info = hw_info(sysfs_root=FIXTURES / "sysfs_cache")
    l1d = info.find(1, "Data")
    assert l1d.size_bytes == 32768
    assert l1d.line_bytes == 64
    assert l1d.associativity == 8
    assert l1d.sets == 64
    assert l1d.source == "sysfs"
    l3 = info.find(3, "Unified")
    assert l3.size_bytes == 16 * 1024 * 1024
    assert l3.associativity == 16


def test_hw_info_identity_holds_every_level():
    info = hw_info(sysfs_root=FIXTURES / "sysfs_cache")
    for level in info.levels:
        assert level.size_bytes == level.line_bytes * level.associativity * level.sets


def test_hw_info_empty_tree_unavailable(tmp_path: Path):
    with pytest.raises(InfoUnavailable):
        hw_info(sysfs_root=tmp_path / "empty")


def test_hw_info_getconf_fallback():
    output = (
        "LEVEL1_DCACHE_SIZE 49152\n"
        "LEVEL1_DCACHE_LINESIZE 64\n"
        "LEVEL1_DCACHE_ASSOC 12\n"
        "PAGE_SIZE 4096\n"
    )
    info = hw_info(sysfs_root=Path("/nonexistent"), getconf_output=output)
    l1d = info.find(1, "Data")
    assert l1d.associativity == 12
    assert l1d.sets == 64
    assert l1d.source == "getconf"


def test_hw_info_live_host_if_available():
    sysfs = Path("/sys/devices/system/cpu/cpu0/cache")
    if not sysfs.is_dir():
        pytest.skip("host exposes no sysfs cache tree")
    info = hw_info()
    assert info.levels
    for level in info.levels:
        assert level.size_bytes == level.line_bytes * level.associativity * level.sets


# --- calibration -----------------------------------------------------------------

def test_instantiate_template_x86_tokens():
    template = calibration_template(load_manifest(CORPUS_ROOT))
    source = instantiate_calibration(template, X86_64, samples=200, warmup=10)
    assert "__rdtscp" in source
    assert "_mm_clflush" in source
    assert "@" not in source.replace("@", "@") or "@TIMER_READ@" not in source
    assert "#define SAMPLES 200" in source


def test_instantiate_template_aarch64_tokens():
    template = calibration_template(load_manifest(CORPUS_ROOT))
    source = instantiate_calibration(template, AARCH64, samples=100, warmup=5)
    lowered = source.lower()
    assert "cntvct_el0" in lowered
    assert "dc civac" in lowered


def test_derive_threshold_quarter_gap():
    assert derive_threshold(60, 380) == 60 + round((380 - 60) / 4)
    assert derive_threshold(0, 1) == 0.5  # gap too small for the bias step: midpoint
    with pytest.raises(CalibrationDegenerate):
        derive_threshold(100, 100)
    with pytest.raises(CalibrationDegenerate):
        derive_threshold(100, 80)


def test_derive_threshold_between_medians_property():
    import random

    rng = random.Random(3)
    for _ in range(200):
        hit = rng.randint(0, 400)
        miss = hit + rng.randint(1, 600)
        threshold = derive_threshold(hit, miss)
        assert hit < threshold < miss


def test_parse_calibration_output():
    assert parse_calibration_output("timer=rdtscp\nflush=clflush\nhit_median=59\nmiss_median=380\n") == (59.0, 380.0)


@pytest.mark.hardware
def test_cache_thres_on_host(tmp_path: Path):
    if platform.machine() not in ("x86_64", "aarch64", "arm64"):
        pytest.skip("calibration needs x86-64 or AArch64")
    if shutil.which("gcc") is None:
        pytest.skip("no C compiler")
    template = calibration_template(load_manifest(CORPUS_ROOT))
    result = cache_thres(template, core=0, samples=500, work_dir=tmp_path)
    assert result.hit_median_cycles < result.threshold_cycles < result.miss_median_cycles
    assert result.samples == 500
    if platform.machine() == "x86_64":
        assert result.timer == "rdtscp"
        assert result.flush == "clflush"


@pytest.mark.hardware
def test_cache_thres_self_consistency(tmp_path: Path):
    """Two back-to-back calibrations agree within 2x or the host is flagged
    unstable (hardware-only gate)."""
    if platform.machine() not in ("x86_64", "aarch64", "arm64"):
        pytest.skip("calibration needs x86-64 or AArch64")
    if shutil.which("gcc") is None:
        pytest.skip("no C compiler")
    template = calibration_template(load_manifest(CORPUS_ROOT))
    first = cache_thres(template, core=0, samples=500, work_dir=tmp_path / "a")
    second = cache_thres(template, core=0, samples=500, work_dir=tmp_path / "b")
    low, high = sorted([first.threshold_cycles, second.threshold_cycles])
    if high > 2 * low:
        pytest.skip(
            f"calibration unstable on this host: thresholds {low:.0f} vs {high:.0f} "
            "differ by more than 2x"
        )
    assert high <= 2 * low


# --- perf counters -----------------------------------------------------------------

def test_parse_perf_stat_fixture_hand_read():
    output = (FIXTURES / "perf_stat_x.csv").read_text()
    report = parse_perf_stat(output, ["cache-misses", "branch-misses", "bogus-event", "cycles"])
    assert report.counters["cache-misses"].value == 123456789
    assert report.counters["cache-misses"].supported
    assert report.counters["branch-misses"].value == 987654
    assert not report.counters["bogus-event"].supported
    assert report.counters["bogus-event"].value == 0
    # modifier suffix matching: cycles:u satisfies a request for cycles
    assert report.counters["cycles"].value == 441234567


def test_hpc_empty_counter_list(tmp_path: Path):
    binary = _build(tmp_path, "t", "int main(void){return 0;}\n")
    with pytest.raises(EmptyCounterList):
        hpc(binary, [])


def test_hpc_without_perf_reports_unsupported(tmp_path: Path, monkeypatch):
    binary = _build(tmp_path, "t2", "int main(void){return 0;}\n")
    monkeypatch.setattr(shutil, "which", lambda name: None)
    report = hpc(binary, ["cache-misses"])
    assert not report.counters["cache-misses"].supported


# --- registry -----------------------------------------------------------------------

def test_registry_unknown_tool_returns_error_result(tmp_path: Path):
    registry = build_registry(tmp_path, specialized=False)
    result = registry.execute("nonexistent", "c1", {})
    assert not result.ok
    assert "unknown tool" in result.text


def test_registry_specialized_gating(tmp_path: Path):
    bare = build_registry(tmp_path, specialized=False)
    full = build_registry(tmp_path, specialized=True)
    assert set(bare.names()) == {"compile", "execute", "read_file", "write_file"}
    assert {"hw_info", "cache_thres", "hpc"} <= set(full.names())


def test_registry_compile_execute_roundtrip(tmp_path: Path):
    registry = build_registry(tmp_path, specialized=False)
    write = registry.execute(
        "write_file", "c1", {"path": "hello.c", "content": '#include <stdio.h>\nint main(void){printf("hi\\n");return 0;}\n'}
    )
    assert write.ok
    built = registry.execute("compile", "c2", {"source_path": "hello.c"})
    assert built.ok, built.text
    ran = registry.execute("execute", "c3", {"binary_path": "hello"})
    assert ran.ok
    assert "hi" in ran.text


def test_registry_confines_paths(tmp_path: Path):
    registry = build_registry(tmp_path, specialized=False)
    result = registry.execute("write_file", "c1", {"path": "../escape.c", "content": "x"})
    assert not result.ok
    assert "escapes" in result.text


def test_tool_text_truncation():
    long_text = "y" * (MAX_TOOL_TEXT + 500)
    short = truncate_text(long_text)
    assert len(short) == MAX_TOOL_TEXT + len(TRUNCATION_SENTINEL)
    assert short.endswith(TRUNCATION_SENTINEL)
    assert truncate_text("tiny") == "tiny"


def test_tool_spec_wire_schema_shape():
    spec = ToolSpec("t", "does things", {"a": "string", "n": "integer"}, required=("a",))
    schema = spec.wire_schema()
    assert schema["function"]["name"] == "t"
    assert schema["function"]["parameters"]["properties"]["a"] == {"type": "string"}
    assert schema["function"]["parameters"]["required"] == ["a"]


def test_registry_tool_crash_becomes_error_result():
    registry = ToolRegistry()

    def boom(call_id: str) -> ToolResult:
        raise RuntimeError("kaput")

    registry.register(ToolSpec("boom", "always fails", {}), boom)
    result = registry.execute("boom", "c9", {})
    assert not result.ok
    assert "kaput" in result.text
