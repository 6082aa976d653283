"""HTTP query service over an immutable dataset snapshot.

Reads are pure functions of the current snapshot. The only mutation is
POST /api/ingest, which builds a whole new snapshot off to the side and
publishes it with a single reference assignment, so concurrent readers
always see one consistent dataset and never a mixture.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .errors import (
    AllExcluded,
    MalformedDelimitedText,
    MissingRequiredColumn,
    MixedUsers,
)
from .fusion import Timeline, build_timeline, timeline_to_dict
from .ingest import (
    SchemaReport,
    parse_browsing_log,
    parse_programming_log,
    validate_schema,
)
from .patterns import (
    DEFAULT_DETECTOR_CONFIG,
    DetectorConfig,
    StudentProfile,
    finding_to_dict,
    profile_student,
)
from .viz import (
    FlowScope,
    build_flowgraph,
    build_task_flowgraph,
    chart_data,
    chart_dataset_to_dict,
    render_svg,
)

BROWSER_SUFFIX = "_browser.csv"
IDE_SUFFIX = "_ide.csv"

_SCOPE_KEYS = {"browsing": "browsing", "compile": "compile", "all": "all"}


@dataclass(frozen=True)
class DatasetSnapshot:
    cohort_id: str
    timelines: dict[str, Timeline]
    profiles: dict[str, StudentProfile]
    loaded_at: int  # epoch ms
    config: DetectorConfig = DEFAULT_DETECTOR_CONFIG
    cohorts: dict[str, str] = field(default_factory=dict)  # user -> label


def build_snapshot(
    logs: dict[str, tuple[str, str]],
    cohort_id: str = "default",
    config: DetectorConfig = DEFAULT_DETECTOR_CONFIG,
    cohorts: dict[str, str] | None = None,
) -> DatasetSnapshot:
    """logs maps user id to (browsing log text, programming log text)."""
    timelines = {}
    profiles = {}
    for user_id, (browser_text, ide_text) in sorted(logs.items()):
        browser_records, _ = parse_browsing_log(browser_text)
        ide_records, _ = parse_programming_log(ide_text)
        tl, _ = build_timeline(browser_records, ide_records)
        timelines[user_id] = tl
        profiles[user_id] = profile_student(tl, config)
    return DatasetSnapshot(
        cohort_id=cohort_id,
        timelines=timelines,
        profiles=profiles,
        loaded_at=int(time.time() * 1000),
        config=config,
        cohorts=dict(cohorts or {}),
    )


def load_data_dir(
    data_dir: str | Path, config: DetectorConfig = DEFAULT_DETECTOR_CONFIG
) -> DatasetSnapshot:
    """Load every <user>_browser.csv / <user>_ide.csv pair in a directory.
    A manifest.json, when present, supplies cohort labels."""
    root = Path(data_dir)
    logs = {}
    for browser_path in sorted(root.glob(f"*{BROWSER_SUFFIX}")):
        user_id = browser_path.name[: -len(BROWSER_SUFFIX)]
        ide_path = root / f"{user_id}{IDE_SUFFIX}"
        if ide_path.exists():
            logs[user_id] = (
                browser_path.read_text(encoding="utf-8"),
                ide_path.read_text(encoding="utf-8"),
            )
    cohorts = {}
    manifest_path = root / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        for entry in manifest.get("students", []):
            if "userID" in entry and "cohort" in entry:
                cohorts[entry["userID"]] = entry["cohort"]
    return build_snapshot(logs, cohort_id=root.name, config=config, cohorts=cohorts)


class SnapshotHolder:
    """Holds the currently-published snapshot; swap is a single reference
    assignment, atomic under the interpreter."""

    def __init__(self, snapshot: DatasetSnapshot):
        self._snapshot = snapshot

    @property
    def current(self) -> DatasetSnapshot:
        return self._snapshot

    def swap(self, snapshot: DatasetSnapshot) -> None:
        self._snapshot = snapshot


def _first_header(text: str) -> list[str]:
    try:
        for row in csv.reader(io.StringIO(text)):
            return row
    except csv.Error:
        pass
    return []


def _schema_or_409(text: str, source: str) -> SchemaReport:
    report = validate_schema(_first_header(text), source)
    if report.missing_columns:
        raise HTTPException(status_code=409, detail=report.to_dict())
    return report


def create_app(
    snapshot: DatasetSnapshot, static_dir: str | Path | None = None
) -> FastAPI:
    app = FastAPI(title="srlflow", docs_url=None, redoc_url=None)
    holder = SnapshotHolder(snapshot)
    app.state.holder = holder

    @app.exception_handler(RequestValidationError)
    async def _bad_query(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    def _timeline(user_id: str) -> Timeline:
        tl = holder.current.timelines.get(user_id)
        if tl is None:
            raise HTTPException(status_code=404, detail=f"unknown user: {user_id}")
        return tl

    def _profile(user_id: str) -> StudentProfile:
        profile = holder.current.profiles.get(user_id)
        if profile is None:
            raise HTTPException(status_code=404, detail=f"unknown user: {user_id}")
        return profile

    @app.get("/api/users")
    def list_users():
        snap = holder.current
        users = []
        for user_id in sorted(snap.timelines):
            profile = snap.profiles[user_id]
            summary: dict[str, int] = {}
            for finding in profile.findings:
                key = finding.pattern.value
                summary[key] = summary.get(key, 0) + 1
            users.append(
                {
                    "userID": user_id,
                    "cohort": snap.cohorts.get(user_id),
                    "eventCount": len(snap.timelines[user_id].events),
                    "patternSummary": summary,
                }
            )
        return users

    @app.get("/api/users/{user_id}/timeline")
    def get_timeline(user_id: str):
        return timeline_to_dict(_timeline(user_id))

    @app.get("/api/users/{user_id}/patterns")
    def get_patterns(user_id: str):
        profile = _profile(user_id)
        return {
            "userID": user_id,
            "findings": [finding_to_dict(f) for f in profile.findings],
        }

    @app.get("/api/users/{user_id}/ratios")
    def get_ratios(user_id: str, scope: str, exclude: str = ""):
        profile = _profile(user_id)
        if scope not in _SCOPE_KEYS:
            raise HTTPException(
                status_code=400,
                detail=f"scope must be one of browsing|compile|all, got {scope!r}",
            )
        excluded = {part.strip() for part in exclude.split(",") if part.strip()}
        try:
            dataset = chart_data(profile.ratios[_SCOPE_KEYS[scope]], excluded)
        except AllExcluded:
            raise HTTPException(status_code=400, detail="every category excluded")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return chart_dataset_to_dict(dataset)

    @app.get("/api/users/{user_id}/flowchart.svg")
    def get_flowchart(user_id: str, task: str | None = None):
        tl = _timeline(user_id)
        if task is None:
            graph = build_flowgraph(
                list(tl.events), FlowScope.FULL_TIMELINE, user_id=tl.user_id
            )
        else:
            if all(ev.task_id != task for ev in tl.events):
                raise HTTPException(status_code=404, detail=f"unknown task: {task}")
            graph = build_task_flowgraph(tl, task)
        return Response(content=render_svg(graph), media_type="image/svg+xml")

    @app.get("/api/cohort/patterns")
    def cohort_patterns():
        snap = holder.current
        by_cohort: dict[str, dict] = {}
        for user_id in sorted(snap.profiles):
            label = snap.cohorts.get(user_id) or "unlabeled"
            bucket = by_cohort.setdefault(
                label, {"cohort": label, "students": 0, "patterns": {}}
            )
            bucket["students"] += 1
            seen = {f.pattern.value for f in snap.profiles[user_id].findings}
            for key in seen:
                bucket["patterns"][key] = bucket["patterns"].get(key, 0) + 1
        return {"cohorts": [by_cohort[k] for k in sorted(by_cohort)]}

    @app.post("/api/ingest")
    async def ingest(browser: UploadFile, ide: UploadFile):
        try:
            browser_text = (await browser.read()).decode("utf-8")
            ide_text = (await ide.read()).decode("utf-8")
        except UnicodeDecodeError:
            raise HTTPException(status_code=400, detail="files must be UTF-8 text")
        try:
            _schema_or_409(browser_text, "browser")
            _schema_or_409(ide_text, "ide")
            browser_records, browser_report = parse_browsing_log(browser_text)
            ide_records, ide_report = parse_programming_log(ide_text)
        except MissingRequiredColumn as exc:
            # unreachable after the header check above, but kept as a guard
            raise HTTPException(status_code=409, detail=str(exc))
        except MalformedDelimitedText as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        reports = {"browser": browser_report, "ide": ide_report}
        try:
            tl, dropped = build_timeline(browser_records, ide_records)
        except MixedUsers as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if not tl.user_id:
            raise HTTPException(status_code=400, detail="upload contains no events")

        old = holder.current
        profile = profile_student(tl, old.config)
        holder.swap(
            DatasetSnapshot(
                cohort_id=old.cohort_id,
                timelines={**old.timelines, tl.user_id: tl},
                profiles={**old.profiles, tl.user_id: profile},
                loaded_at=int(time.time() * 1000),
                config=old.config,
                cohorts=old.cohorts,
            )
        )
        return {
            "userID": tl.user_id,
            "eventCount": len(tl.events),
            "dropped": dropped,
            "reports": {k: r.to_dict() for k, r in reports.items()},
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
