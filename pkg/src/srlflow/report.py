"""Batch report: pie-chart figures plus delimited summaries for one student.

Written for the CLI `report` command; produces ratio_<scope>.png figures
and two CSV files (ratios.csv, findings.csv) in the output directory.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .fusion import Timeline
from .jsonutil import dump_canonical
from .patterns import (
    DEFAULT_DETECTOR_CONFIG,
    DetectorConfig,
    StudentProfile,
    profile_student,
)
from .viz import chart_data

_SCOPES = ("browsing", "compile", "all")


def _write_ratios_csv(profile: StudentProfile, path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scope", "category", "count", "ratio"])
        for scope in _SCOPES:
            report = profile.ratios[scope]
            dataset = chart_data(report) if report.counts else None
            if dataset is None:
                continue
            for label, value in zip(dataset.labels, dataset.values):
                writer.writerow(
                    [scope, label, value, report.ratios.get(label, "")]
                )


def _write_findings_csv(profile: StudentProfile, path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pattern", "taskID", "evidence", "metrics"])
        for f in profile.findings:
            writer.writerow(
                [
                    f.pattern.value,
                    f.task_id or "",
                    json.dumps([list(pair) for pair in f.evidence]),
                    json.dumps(f.metrics, sort_keys=True),
                ]
            )


def _figure(profile: StudentProfile, scope: str, path: Path) -> bool:
    report = profile.ratios[scope]
    if not report.counts:
        return False
    dataset = chart_data(report)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.pie(
        dataset.values,
        labels=list(dataset.labels),
        colors=list(dataset.colors),
        autopct="%1.1f%%",
        startangle=90,
        counterclock=False,
    )
    ax.set_title(f"{profile.user_id}: {report.scope.value}")
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return True


def write_report(
    tl: Timeline,
    out_dir: str | Path,
    config: DetectorConfig = DEFAULT_DETECTOR_CONFIG,
    total_tasks: int = 10,
) -> list[Path]:
    """Analyze one timeline and write figures + delimited summaries.
    Returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profile = profile_student(tl, config, total_tasks)
    written = []

    ratios_path = out / "ratios.csv"
    _write_ratios_csv(profile, ratios_path)
    written.append(ratios_path)

    findings_path = out / "findings.csv"
    _write_findings_csv(profile, findings_path)
    written.append(findings_path)

    from .patterns import profile_to_dict

    profile_path = out / "profile.json"
    profile_path.write_text(dump_canonical(profile_to_dict(profile)), encoding="utf-8")
    written.append(profile_path)

    for scope in _SCOPES:
        fig_path = out / f"ratio_{scope}.png"
        if _figure(profile, scope, fig_path):
            written.append(fig_path)
    return written
