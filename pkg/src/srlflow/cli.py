"""Command-line interface: fuse, analyze, render, synth, report, serve."""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from .errors import SrlflowError
from .fusion import build_timeline, timeline_from_dict, timeline_to_dict
from .ingest import parse_browsing_log, parse_programming_log
from .jsonutil import dump_canonical
from .patterns import (
    DEFAULT_DETECTOR_CONFIG,
    DetectorConfig,
    Pattern,
    profile_student,
    profile_to_dict,
)
from .synth import CohortSpec, cohort_manifest, generate_cohort
from .viz import FlowScope, build_flowgraph, build_task_flowgraph, render_dot, render_svg

DEFAULT_PORT = 8000


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"{path}: not valid JSON: {exc}")


def _load_config(path: str | None) -> tuple[DetectorConfig, int]:
    """Detector config JSON: DetectorConfig field names plus optional
    total_tasks."""
    if path is None:
        return DEFAULT_DETECTOR_CONFIG, 10
    data = _read_json(path)
    total_tasks = data.pop("total_tasks", 10)
    try:
        return DetectorConfig(**data), total_tasks
    except (TypeError, ValueError) as exc:
        raise click.ClickException(f"{path}: bad detector config: {exc}")


def _load_timeline(path: str):
    data = _read_json(path)
    try:
        return timeline_from_dict(data)
    except (KeyError, ValueError) as exc:
        raise click.ClickException(f"{path}: not a timeline export: {exc}")


@click.group()
@click.version_option(package_name="srlflow")
def main() -> None:
    """Fuse browsing + IDE activity logs, mine workflow patterns, and emit
    flowcharts and ratio charts."""


@main.command()
@click.option("--browser", "browser_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ide", "ide_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
def fuse(browser_path: str, ide_path: str, out_path: str) -> None:
    """Ingest both logs, fuse into one timeline, attribute tasks."""
    try:
        browser_records, browser_report = parse_browsing_log(
            Path(browser_path).read_text(encoding="utf-8")
        )
        ide_records, ide_report = parse_programming_log(
            Path(ide_path).read_text(encoding="utf-8")
        )
        tl, dropped = build_timeline(browser_records, ide_records)
    except SrlflowError as exc:
        raise click.ClickException(str(exc))
    Path(out_path).write_text(dump_canonical(timeline_to_dict(tl)), encoding="utf-8")
    rejected = len(browser_report.rejected_rows) + len(ide_report.rejected_rows)
    click.echo(
        f"fused {len(tl.events)} events for {tl.user_id or '<no user>'} "
        f"({rejected} rows rejected, {sum(dropped.values())} events dropped)",
        err=True,
    )


@main.command()
@click.option("--timeline", "timeline_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
def analyze(timeline_path: str, config_path: str | None, out_path: str) -> None:
    """Detect workflow patterns and compute ratio reports for a timeline."""
    config, total_tasks = _load_config(config_path)
    tl = _load_timeline(timeline_path)
    profile = profile_student(tl, config, total_tasks)
    Path(out_path).write_text(dump_canonical(profile_to_dict(profile)), encoding="utf-8")
    click.echo(f"{len(profile.findings)} findings for {profile.user_id}", err=True)


@main.command()
@click.option("--timeline", "timeline_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["svg", "dot"]), default="svg", show_default=True)
@click.option("--task", "task_id", default=None, help="Restrict to one task's events.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, writable=True))
def render(timeline_path: str, fmt: str, task_id: str | None, out_path: str) -> None:
    """Render the flowchart for a timeline (or one of its tasks)."""
    tl = _load_timeline(timeline_path)
    if task_id is not None:
        if all(ev.task_id != task_id for ev in tl.events):
            raise click.ClickException(f"no events for task {task_id!r}")
        graph = build_task_flowgraph(tl, task_id)
    else:
        graph = build_flowgraph(list(tl.events), FlowScope.FULL_TIMELINE, user_id=tl.user_id)
    text = render_svg(graph) if fmt == "svg" else render_dot(graph)
    Path(out_path).write_text(text, encoding="utf-8")
    click.echo(f"wrote {fmt} with {len(graph.nodes)} nodes to {out_path}", err=True)


@main.command()
@click.option("--cohort-spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "out_dir", required=True, type=click.Path(file_okay=False))
def synth(spec_path: str, out_dir: str) -> None:
    """Generate a synthetic cohort of log pairs plus a manifest."""
    data = _read_json(spec_path)
    mix_raw = data.get("archetypeMix")
    kwargs = {}
    if "masterSeed" in data:
        kwargs["master_seed"] = data["masterSeed"]
    if "lectureCount" in data:
        kwargs["lecture_count"] = data["lectureCount"]
    if "nonLectureCount" in data:
        kwargs["non_lecture_count"] = data["nonLectureCount"]
    if mix_raw is not None:
        try:
            kwargs["archetype_mix"] = {Pattern(k): v for k, v in mix_raw.items()}
        except ValueError as exc:
            raise click.ClickException(f"bad archetypeMix: {exc}")
    try:
        spec = CohortSpec(**kwargs)
        logs = generate_cohort(spec)
    except SrlflowError as exc:
        raise click.ClickException(str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for user_id, (browser_text, ide_text) in logs.items():
        (out / f"{user_id}_browser.csv").write_text(browser_text, encoding="utf-8")
        (out / f"{user_id}_ide.csv").write_text(ide_text, encoding="utf-8")
    (out / "manifest.json").write_text(
        dump_canonical(cohort_manifest(spec)), encoding="utf-8"
    )
    click.echo(f"generated {len(logs)} students into {out_dir}", err=True)


@main.command()
@click.option("--timeline", "timeline_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "out_dir", required=True, type=click.Path(file_okay=False))
def report(timeline_path: str, config_path: str | None, out_dir: str) -> None:
    """Write ratio pie-chart figures and delimited summaries for a timeline."""
    from .report import write_report

    config, total_tasks = _load_config(config_path)
    tl = _load_timeline(timeline_path)
    written = write_report(tl, out_dir, config, total_tasks)
    for path in written:
        click.echo(str(path), err=True)


@main.command()
@click.option("--data-dir", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--port", type=int, default=None, help="Overrides SRLFLOW_PORT.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui-dir", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Static dashboard build to serve under /.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
def serve(data_dir: str, port: int | None, host: str, ui_dir: str | None, config_path: str | None) -> None:
    """Load a data directory and serve the HTTP query API."""
    import uvicorn

    from .service import create_app, load_data_dir

    if port is None:
        try:
            port = int(os.environ.get("SRLFLOW_PORT", DEFAULT_PORT))
        except ValueError:
            raise click.ClickException("SRLFLOW_PORT is not an integer")
    config, _ = _load_config(config_path)
    try:
        snapshot = load_data_dir(data_dir, config)
    except SrlflowError as exc:
        raise click.ClickException(str(exc))
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(snapshot, static_dir=ui_dir)
    click.echo(
        f"serving {len(snapshot.timelines)} users on http://{host}:{port}", err=True
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
