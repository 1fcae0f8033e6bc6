"""Operator entry points.

Exit codes: 0 success, 1 verdict failure, 2 usage, 3 environment,
4 backend. Stdout is human text unless --json asks for machine output;
files written under --out are always machine formats.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import corpus as corpus_mod
from .agents.backends import make_backend
from .errors import (
    BackendUnavailable,
    CalibrationDegenerate,
    CorpusMissing,
    DocumentMissing,
    FixtureExhausted,
    InfoUnavailable,
    PocsmithError,
    ToolchainMissing,
    WorkspaceUnwritable,
)
from .knowledge.catalog import AttackVector
from .runstore.costing import format_cost
from .toolchain.calibration import cache_thres
from .toolchain.hwinfo import hw_info
from .validation.gaps import aggregate
from .workflow.engine import run_stage
from .workflow.state import (
    ABLATION_PRESETS,
    Outcome,
    RunConfig,
    StageKind,
    load_run_config,
)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_ENV = 3
EXIT_BACKEND = 4

_ENV_ERRORS = (CorpusMissing, ToolchainMissing, InfoUnavailable, CalibrationDegenerate,
               WorkspaceUnwritable, DocumentMissing)
_BACKEND_ERRORS = (BackendUnavailable, FixtureExhausted)


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, _BACKEND_ERRORS):
        sys.exit(EXIT_BACKEND)
    if isinstance(exc, _ENV_ERRORS):
        sys.exit(EXIT_ENV)
    if isinstance(exc, PocsmithError):
        sys.exit(EXIT_ENV)
    raise exc


def _base_config(ctx: click.Context, stage: StageKind) -> RunConfig:
    opts = ctx.obj
    if opts["config"]:
        config = load_run_config(opts["config"], stage=stage)
    else:
        config = RunConfig(stage=stage)
    updates: dict = {"stage": stage}
    if opts["core"] is not None:
        updates["core"] = opts["core"]
        config = replace(config, target_core=opts["core"])
    if opts["out"] is not None:
        config = replace(config, workspace_root=Path(opts["out"]))
    if opts["backend"] is not None:
        config = replace(config, backend_spec=opts["backend"])
    if opts["attack"] is not None:
        config = replace(config, attack_vector=AttackVector.parse(opts["attack"]))
    if opts["ablation"] is not None:
        config = replace(config, ablation=ABLATION_PRESETS[opts["ablation"].upper()])
    return config


def _backend(config: RunConfig):
    return make_backend(config.backend_spec, config.model_family)


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="TOML run configuration.")
@click.option("--backend", default=None, metavar="{live|scripted:<fixture>}",
              help="Chat backend (overrides config).")
@click.option("--runs", default=1, show_default=True, help="Repetitions for profile.")
@click.option("--core", type=int, default=None, help="CPU core to pin executions to.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Workspace directory for runs/, memory_hub/, index/.")
@click.option("--attack", default=None, metavar="{spectre-v1|prime-probe}")
@click.option("--ablation", type=click.Choice(["D1", "D2", "D3", "D4"], case_sensitive=False),
              default=None, help="Named ablation preset.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable stdout.")
@click.pass_context
def main(ctx: click.Context, config, backend, runs, core, out, attack, ablation, as_json) -> None:
    """Stage runners and hardware tools for attack-PoC synthesis."""
    ctx.obj = {
        "config": config,
        "backend": backend,
        "runs": runs,
        "core": core,
        "out": out,
        "attack": attack,
        "ablation": ablation,
        "json": as_json,
    }


def _echo_report(ctx: click.Context, report, extra: dict | None = None) -> None:
    if ctx.obj["json"]:
        payload = {
            "run_id": report.run_id,
            "verdict": report.verdict.outcome.value,
            "detail": report.verdict.detail,
            "node_count": report.state.node_count,
            "input_tokens": report.input_tokens,
            "output_tokens": report.output_tokens,
            "cost_usd": str(report.cost_usd) if report.cost_usd is not None else None,
        }
        payload.update(extra or {})
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(
            f"run {report.run_id}: {report.verdict.outcome.value}"
            + (f" ({report.verdict.detail})" if report.verdict.detail else "")
        )
        click.echo(
            f"  nodes={report.state.node_count} tokens={report.input_tokens}in/"
            f"{report.output_tokens}out"
            + (f" cost={format_cost(report.cost_usd)}" if report.cost_usd is not None else "")
        )
        for key, value in (extra or {}).items():
            click.echo(f"  {key}: {value}")


def _verdict_exit(outcome: Outcome) -> int:
    return EXIT_OK if outcome is Outcome.SUCCESS else EXIT_VERDICT


@main.command()
@click.pass_context
def profile(ctx: click.Context) -> None:
    """Run the gap-profiling stage N times; emit per-metric rates as CSV."""
    config = _base_config(ctx, StageKind.S1_GAP_PROFILE)
    runs = ctx.obj["runs"]
    reports = []
    try:
        for _ in range(runs):
            report = run_stage(config, _backend(config))
            reports.append(report)
            if not ctx.obj["json"]:
                click.echo(f"run {report.run_id}: {report.verdict.outcome.value}", err=True)
    except Exception as exc:
        _fail(exc)
    gap_reports = [r.artifacts["gap_report"] for r in reports if "gap_report" in r.artifacts]
    if not gap_reports:
        click.echo("no gap reports were produced (all runs converged)", err=True)
        sys.exit(EXIT_OK)
    stats = aggregate(gap_reports)
    csv_text = stats.to_csv()
    out_dir = Path(ctx.obj["out"]) if ctx.obj["out"] else None
    if out_dir:
        (out_dir / "metric_rates.csv").write_text(csv_text)
    if ctx.obj["json"]:
        click.echo(json.dumps({
            "n_runs": stats.n_runs,
            "full_poc_successes": stats.full_poc_successes,
            "rates": {r.metric_id: r.success_rate for r in stats.per_metric},
        }, indent=2))
    else:
        click.echo(csv_text, nl=False)
    sys.exit(EXIT_OK)


@main.command("gen-doc")
@click.option("--metrics", required=True, help="Target metric id (e.g. M11); merged groups follow the catalog.")
@click.pass_context
def gen_doc(ctx: click.Context, metrics: str) -> None:
    """Run the document-generation stage for one metric template."""
    config = _base_config(ctx, StageKind.S2_DOC_GEN)
    config = replace(config, target_metrics=tuple(m.strip() for m in metrics.split(",")))
    try:
        report = run_stage(config, _backend(config))
    except Exception as exc:
        _fail(exc)
    doc = report.artifacts.get("document")
    _echo_report(ctx, report, {"document": doc.doc_id if doc else None})
    sys.exit(_verdict_exit(report.verdict.outcome))


@main.command("validate-doc")
@click.option("--metrics", required=True, help="Metric id whose document to unit-test.")
@click.pass_context
def validate_doc(ctx: click.Context, metrics: str) -> None:
    """Run the five-run unit test (4/5 rule) for a stored document."""
    config = _base_config(ctx, StageKind.S3_DOC_VALIDATE)
    config = replace(config, target_metrics=tuple(m.strip() for m in metrics.split(",")))
    try:
        report = run_stage(config, _backend(config))
    except Exception as exc:
        _fail(exc)
    verdict = report.artifacts.get("unit_verdict")
    _echo_report(
        ctx, report,
        {"passes": verdict.passes if verdict else None,
         "outcome": verdict.outcome.value if verdict else None},
    )
    sys.exit(_verdict_exit(report.verdict.outcome))


@main.command()
@click.option("--problem-statement", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Problem statement file (defaults to the corpus baseline).")
@click.pass_context
def deploy(ctx: click.Context, problem_statement: str | None) -> None:
    """Run the deployment stage end to end from a problem statement."""
    config = _base_config(ctx, StageKind.S4_DEPLOY)
    if problem_statement:
        config = replace(config, problem_statement_path=Path(problem_statement))
    elif config.problem_statement_path is None and config.backend_spec == "live":
        raise click.UsageError("deploy requires --problem-statement (or one in --config)")
    try:
        report = run_stage(config, _backend(config))
    except Exception as exc:
        _fail(exc)
    _echo_report(ctx, report)
    sys.exit(_verdict_exit(report.verdict.outcome))


@main.command()
@click.option("--samples", default=1000, show_default=True)
@click.pass_context
def calibrate(ctx: click.Context, samples: int) -> None:
    """Measure hit/miss latency medians and print the derived threshold."""
    opts = ctx.obj
    try:
        manifest = corpus_mod.load_manifest(corpus_mod.default_corpus_root())
        template = corpus_mod.calibration_template(manifest)
        result = cache_thres(template, core=opts["core"] or 0, samples=samples)
    except Exception as exc:
        _fail(exc)
    if opts["json"]:
        click.echo(json.dumps({
            "timer": result.timer,
            "flush": result.flush,
            "hit_median_cycles": result.hit_median_cycles,
            "miss_median_cycles": result.miss_median_cycles,
            "threshold_cycles": result.threshold_cycles,
            "samples": result.samples,
        }, indent=2))
    else:
        click.echo(result.summary())
    sys.exit(EXIT_OK)


@main.command()
@click.pass_context
def hwinfo(ctx: click.Context) -> None:
    """Print cache geometry per level."""
    try:
        info = hw_info()
    except Exception as exc:
        _fail(exc)
    if ctx.obj["json"]:
        click.echo(json.dumps({
            "levels": [
                {
                    "level": lv.level, "kind": lv.kind, "size_bytes": lv.size_bytes,
                    "line_bytes": lv.line_bytes, "associativity": lv.associativity,
                    "sets": lv.sets, "source": lv.source,
                }
                for lv in info.levels
            ]
        }, indent=2))
    else:
        click.echo(info.summary())
    sys.exit(EXIT_OK)


@main.command()
@click.option("--listen", default="127.0.0.1:8787", show_default=True, metavar="ADDR:PORT",
              help="Bind address; non-loopback requires --allow-remote.")
@click.option("--allow-remote", is_flag=True, help="Permit binding beyond loopback.")
@click.pass_context
def serve(ctx: click.Context, listen: str, allow_remote: bool) -> None:
    """Start the review-console HTTP service."""
    import uvicorn

    from .service.app import create_app

    host, _, port_text = listen.partition(":")
    if not port_text.isdigit():
        raise click.UsageError(f"bad --listen value {listen!r}")
    if host not in ("127.0.0.1", "localhost", "::1") and not allow_remote:
        raise click.UsageError("non-loopback bind needs --allow-remote (this service launches compiled code)")
    workspace = Path(ctx.obj["out"]) if ctx.obj["out"] else Path(".")
    backend_spec = ctx.obj["backend"] or "live"
    app = create_app(workspace=workspace, backend_spec=backend_spec)
    uvicorn.run(app, host=host, port=int(port_text), log_level="info")


if __name__ == "__main__":
    main()
