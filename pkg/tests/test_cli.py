"""CLI tests. The commands must be thin wrappers: their file output is
byte-identical to composing the library calls directly."""

import json
import subprocess
import sys
from pathlib import Path

from click.testing import CliRunner
from conftest import make_event, make_timeline

from srlflow.cli import main
from srlflow.fusion import ActionKind, build_timeline, timeline_to_dict
from srlflow.ingest import parse_browsing_log, parse_programming_log
from srlflow.jsonutil import dump_canonical
from srlflow.patterns import (
    DEFAULT_DETECTOR_CONFIG,
    profile_student,
    profile_to_dict,
)
from srlflow.synth import Cohort, CohortSpec, StudentSpec, cohort_manifest, generate_student


def write_logs(tmp_path, seed=3):
    spec = StudentSpec(
        user_id="L01",
        cohort=Cohort.LECTURE,
        seed=seed,
        session_seconds=900,
        task_count=3,
    )
    btext, itext = generate_student(spec)
    bpath = tmp_path / "browser.csv"
    ipath = tmp_path / "ide.csv"
    bpath.write_text(btext, encoding="utf-8")
    ipath.write_text(itext, encoding="utf-8")
    return bpath, ipath, btext, itext


def run_fuse(runner, tmp_path):
    bpath, ipath, btext, itext = write_logs(tmp_path)
    out = tmp_path / "timeline.json"
    result = runner.invoke(
        main, ["fuse", "--browser", str(bpath), "--ide", str(ipath), "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    return out, btext, itext


def test_fuse_output_matches_library_bytes(tmp_path):
    out, btext, itext = run_fuse(CliRunner(), tmp_path)
    brecs, _ = parse_browsing_log(btext)
    irecs, _ = parse_programming_log(itext)
    tl, _ = build_timeline(brecs, irecs)
    assert out.read_text(encoding="utf-8") == dump_canonical(timeline_to_dict(tl))


def test_fuse_missing_input_names_the_path(tmp_path):
    runner = CliRunner()
    missing = tmp_path / "absent.csv"
    _, ipath, _, _ = write_logs(tmp_path)
    result = runner.invoke(
        main,
        ["fuse", "--browser", str(missing), "--ide", str(ipath), "--out",
         str(tmp_path / "o.json")],
    )
    assert result.exit_code != 0
    assert "absent.csv" in result.output


def test_analyze_output_matches_library_bytes(tmp_path):
    runner = CliRunner()
    timeline_path, btext, itext = run_fuse(runner, tmp_path)
    out = tmp_path / "profile.json"
    result = runner.invoke(
        main, ["analyze", "--timeline", str(timeline_path), "--out", str(out)]
    )
    assert result.exit_code == 0, result.output

    brecs, _ = parse_browsing_log(btext)
    irecs, _ = parse_programming_log(itext)
    tl, _ = build_timeline(brecs, irecs)
    profile = profile_student(tl, DEFAULT_DETECTOR_CONFIG, 10)
    assert out.read_text(encoding="utf-8") == dump_canonical(profile_to_dict(profile))


def retry_fixture_path(tmp_path):
    """Timeline file for the compile-retry fixture: error, error, success."""
    events = [
        make_event(1000, ActionKind.COMPILE_ERROR, task="A", msg="x: undefined"),
        make_event(2000, ActionKind.COMPILE_ERROR, task="A", msg="x: undefined"),
        make_event(3000, ActionKind.COMPILE_SUCCESS, task="A", msg="3.14"),
    ]
    path = tmp_path / "retry.json"
    path.write_text(
        dump_canonical(timeline_to_dict(make_timeline(events))), encoding="utf-8"
    )
    return path


def test_analyze_detects_compile_retry_loop(tmp_path):
    runner = CliRunner()
    out = tmp_path / "profile.json"
    result = runner.invoke(
        main,
        ["analyze", "--timeline", str(retry_fixture_path(tmp_path)), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    profile = json.loads(out.read_text(encoding="utf-8"))
    assert [f["pattern"] for f in profile["findings"]] == ["TryAndError"]
    assert profile["findings"][0]["metrics"] == {"retry_count": 2, "resolved": 1}


def test_analyze_config_file_reaches_params(tmp_path):
    runner = CliRunner()
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps({"cautious_min_web_events": 4, "total_tasks": 3}),
        encoding="utf-8",
    )
    out = tmp_path / "profile.json"
    result = runner.invoke(
        main,
        ["analyze", "--timeline", str(retry_fixture_path(tmp_path)),
         "--config", str(config_path), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    profile = json.loads(out.read_text(encoding="utf-8"))
    params = profile["findings"][0]["params"]
    assert params["cautious_min_web_events"] == 4


def test_analyze_rejects_bad_config(tmp_path):
    runner = CliRunner()
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"start_phase_fraction": 0.9}), encoding="utf-8")
    result = runner.invoke(
        main,
        ["analyze", "--timeline", str(retry_fixture_path(tmp_path)),
         "--config", str(config_path), "--out", str(tmp_path / "o.json")],
    )
    assert result.exit_code != 0


def test_render_svg_dot_and_task_filter(tmp_path):
    runner = CliRunner()
    timeline_path, _, _ = run_fuse(runner, tmp_path)

    svg_path = tmp_path / "flow.svg"
    result = runner.invoke(
        main, ["render", "--timeline", str(timeline_path), "--out", str(svg_path)]
    )
    assert result.exit_code == 0, result.output
    assert svg_path.read_text(encoding="utf-8").startswith("<?xml")

    dot_path = tmp_path / "flow.dot"
    result = runner.invoke(
        main,
        ["render", "--timeline", str(timeline_path), "--format", "dot",
         "--out", str(dot_path)],
    )
    assert result.exit_code == 0, result.output
    assert dot_path.read_text(encoding="utf-8").startswith("digraph flow {")

    task_path = tmp_path / "task.svg"
    result = runner.invoke(
        main,
        ["render", "--timeline", str(timeline_path), "--task", "A",
         "--out", str(task_path)],
    )
    assert result.exit_code == 0, result.output
    assert len(task_path.read_text()) < len(svg_path.read_text())

    result = runner.invoke(
        main,
        ["render", "--timeline", str(timeline_path), "--task", "Z",
         "--out", str(tmp_path / "z.svg")],
    )
    assert result.exit_code != 0
    assert "Z" in result.output


def test_synth_writes_cohort_files_and_manifest(tmp_path):
    runner = CliRunner()
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(
        json.dumps({"masterSeed": 5, "lectureCount": 2, "nonLectureCount": 1}),
        encoding="utf-8",
    )
    out_dir = tmp_path / "cohort"
    result = runner.invoke(
        main, ["synth", "--cohort-spec", str(spec_path), "--out-dir", str(out_dir)]
    )
    assert result.exit_code == 0, result.output
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == [
        "L01_browser.csv", "L01_ide.csv",
        "L02_browser.csv", "L02_ide.csv",
        "N01_browser.csv", "N01_ide.csv",
        "manifest.json",
    ]
    expected = cohort_manifest(
        CohortSpec(master_seed=5, lecture_count=2, non_lecture_count=1)
    )
    assert (out_dir / "manifest.json").read_text(encoding="utf-8") == dump_canonical(
        expected
    )

    again = tmp_path / "cohort2"
    result = runner.invoke(
        main, ["synth", "--cohort-spec", str(spec_path), "--out-dir", str(again)]
    )
    assert result.exit_code == 0
    for name in names:
        assert (again / name).read_bytes() == (out_dir / name).read_bytes()


def test_synth_rejects_unknown_archetype(tmp_path):
    runner = CliRunner()
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(
        json.dumps({"archetypeMix": {"NotAPattern": 0.5}}), encoding="utf-8"
    )
    result = runner.invoke(
        main, ["synth", "--cohort-spec", str(spec_path), "--out-dir", str(tmp_path / "o")]
    )
    assert result.exit_code != 0


def test_report_writes_figures_and_tables(tmp_path):
    runner = CliRunner()
    timeline_path, _, _ = run_fuse(runner, tmp_path)
    out_dir = tmp_path / "report"
    result = runner.invoke(
        main, ["report", "--timeline", str(timeline_path), "--out-dir", str(out_dir)]
    )
    assert result.exit_code == 0, result.output
    names = {p.name for p in out_dir.iterdir()}
    assert {"ratios.csv", "findings.csv", "profile.json"} <= names
    pngs = {n for n in names if n.endswith(".png")}
    assert pngs, "expected at least one rendered figure"
    for png in pngs:
        assert (out_dir / png).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_serve_rejects_bad_port_env(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["serve", "--data-dir", str(tmp_path)],
        env={"SRLFLOW_PORT": "not-a-number"},
    )
    assert result.exit_code != 0
    assert "SRLFLOW_PORT" in result.output


def test_console_script_is_installed():
    proc = subprocess.run(
        ["srlflow", "--help"], capture_output=True, text=True, timeout=30
    )
    assert proc.returncode == 0
    assert "fuse" in proc.stdout and "serve" in proc.stdout


def test_version_flag():
    result = CliRunner().invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "0.1.0" in result.output
