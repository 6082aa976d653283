"""Mine self-regulated-learning workflow patterns from a fused timeline.

Five detectors: TryAndError (recompile without consulting the web),
TryAndSearch (web activity between an error and the next compile), Cautious
(web research before the first compile of a task), TimeManagement (preview
several tasks early, before anything succeeds), DoubleChecking (return to
already-submitted tasks near the end of the session). Plus action-ratio
reports and a per-student profile that bundles everything.

All thresholds live in DetectorConfig. Phase boundaries ("start" and "end"
of a session) are fractions of total duration, compared exactly with
rationals so that shifting or scaling timestamps never flips a membership.
"""

from __future__ import annotations

import difflib
from collections import Counter
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import AllExcluded
from .fusion import COMPILE_KINDS, ActionKind, Source, Timeline, UnifiedEvent

# Minimum shared-substring length for deciding a clipboard copy originated
# from a compiler error message.
ERROR_COPY_MIN_OVERLAP = 10


class Pattern(str, Enum):
    TRY_AND_ERROR = "TryAndError"
    TRY_AND_SEARCH = "TryAndSearch"
    CAUTIOUS = "Cautious"
    TIME_MANAGEMENT = "TimeManagement"
    DOUBLE_CHECKING = "DoubleChecking"


@dataclass(frozen=True)
class DetectorConfig:
    cautious_min_web_events: int = 3
    start_phase_fraction: float = 0.15
    end_phase_fraction: float = 0.15
    time_mgmt_min_tasks: int = 3
    double_check_min_revisits: int = 2

    def __post_init__(self) -> None:
        if not (0 < self.start_phase_fraction < 0.5):
            raise ValueError("start_phase_fraction must be in (0, 0.5)")
        if not (0 < self.end_phase_fraction < 0.5):
            raise ValueError("end_phase_fraction must be in (0, 0.5)")
        for name in (
            "cautious_min_web_events",
            "time_mgmt_min_tasks",
            "double_check_min_revisits",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


DEFAULT_DETECTOR_CONFIG = DetectorConfig()


@dataclass(frozen=True)
class TaskSession:
    """All events attributed to one task, in timeline order. Non-contiguous
    work on the same task folds into a single session."""

    user_id: str
    task_id: str
    events: tuple[UnifiedEvent, ...]
    first_compile_index: int | None
    submit_indices: tuple[int, ...]


@dataclass(frozen=True)
class PatternFinding:
    pattern: Pattern
    user_id: str
    task_id: str | None
    # [start, end] inclusive index pairs into the scoped event list:
    # session events for task-scope patterns, timeline events otherwise.
    evidence: tuple[tuple[int, int], ...]
    metrics: dict[str, float]
    params: dict[str, float]


class RatioScope(str, Enum):
    BROWSING_ACTIONS = "BrowsingActions"
    COMPILE_OUTCOMES = "CompileOutcomes"
    ALL_ACTIONS = "AllActions"


@dataclass(frozen=True)
class RatioReport:
    scope: RatioScope
    counts: dict[str, int]
    ratios: dict[str, float]


@dataclass(frozen=True)
class StudentProfile:
    user_id: str
    findings: list[PatternFinding]
    ratios: dict[str, RatioReport]  # keys: browsing, compile, all
    tasks_attempted: int
    tasks_submitted: int
    duration: float  # seconds
    config: DetectorConfig = field(default=DEFAULT_DETECTOR_CONFIG)


def sessionize(tl: Timeline) -> list[TaskSession]:
    """Partition attributed events by task. Events without a task_id are
    left out; sessions appear in order of each task's first event."""
    grouped: dict[str, list[UnifiedEvent]] = {}
    for ev in tl.events:
        if ev.task_id is not None:
            grouped.setdefault(ev.task_id, []).append(ev)
    sessions = []
    for task_id, events in grouped.items():
        first_compile = None
        submits = []
        for i, ev in enumerate(events):
            if first_compile is None and ev.action in COMPILE_KINDS:
                first_compile = i
            if ev.action is ActionKind.SUBMIT:
                submits.append(i)
        sessions.append(
            TaskSession(
                user_id=tl.user_id,
                task_id=task_id,
                events=tuple(events),
                first_compile_index=first_compile,
                submit_indices=tuple(submits),
            )
        )
    return sessions


def _params(cfg: DetectorConfig, **extra: float) -> dict[str, float]:
    snapshot = asdict(cfg)
    snapshot.update(extra)
    return snapshot


def _compile_indices(events: tuple[UnifiedEvent, ...]) -> list[int]:
    return [i for i, ev in enumerate(events) if ev.action in COMPILE_KINDS]


def _browser_between(events: tuple[UnifiedEvent, ...], lo: int, hi: int) -> list[int]:
    """Indices of browser-source events strictly between lo and hi."""
    return [
        i for i in range(lo + 1, hi) if events[i].source is Source.BROWSER
    ]


def detect_try_and_error(
    s: TaskSession, cfg: DetectorConfig = DEFAULT_DETECTOR_CONFIG
) -> list[PatternFinding]:
    """Maximal chains: a CompileError followed by one or more further
    compiles, no browser event between consecutive compiles of the chain."""
    compiles = _compile_indices(s.events)

    def clean(k: int) -> bool:
        return not _browser_between(s.events, compiles[k], compiles[k + 1])

    findings = []
    k = 0
    while k < len(compiles) - 1:
        if s.events[compiles[k]].action is ActionKind.COMPILE_ERROR and clean(k):
            end = k + 1
            while end < len(compiles) - 1 and clean(end):
                end += 1
            findings.append(
                PatternFinding(
                    pattern=Pattern.TRY_AND_ERROR,
                    user_id=s.user_id,
                    task_id=s.task_id,
                    evidence=((compiles[k], compiles[end]),),
                    metrics={
                        "retry_count": end - k,
                        "resolved": int(
                            s.events[compiles[end]].action
                            is ActionKind.COMPILE_SUCCESS
                        ),
                    },
                    params=_params(cfg),
                )
            )
            # Maximality: compiles inside the chain start no new chain.
            k = end
        else:
            k += 1
    return findings


def _shares_substring(a: str, b: str, min_len: int = ERROR_COPY_MIN_OVERLAP) -> bool:
    matcher = difflib.SequenceMatcher(None, a, b, autojunk=False)
    return matcher.find_longest_match(0, len(a), 0, len(b)).size >= min_len


def detect_try_and_search(
    s: TaskSession, cfg: DetectorConfig = DEFAULT_DETECTOR_CONFIG
) -> list[PatternFinding]:
    """One finding per error-to-next-compile interval that contains at least
    one browser event. Disjoint with TryAndError by construction: an interval
    with browsing belongs here, one without belongs to a chain."""
    compiles = _compile_indices(s.events)
    findings = []
    for k in range(len(compiles) - 1):
        i, j = compiles[k], compiles[k + 1]
        if s.events[i].action is not ActionKind.COMPILE_ERROR:
            continue
        web = _browser_between(s.events, i, j)
        if not web:
            continue
        error_msg = s.events[i].msg or ""
        copied = 0
        for w in web:
            ev = s.events[w]
            if (
                ev.action is ActionKind.CLIPBOARD_COPY
                and ev.clipboard_copy
                and error_msg
                and _shares_substring(error_msg, ev.clipboard_copy)
            ):
                copied = 1
                break
        findings.append(
            PatternFinding(
                pattern=Pattern.TRY_AND_SEARCH,
                user_id=s.user_id,
                task_id=s.task_id,
                evidence=((i, j),),
                metrics={
                    "web_events": len(web),
                    "error_copied": copied,
                    "resolved": int(
                        s.events[j].action is ActionKind.COMPILE_SUCCESS
                    ),
                },
                params=_params(cfg),
            )
        )
    return findings


def detect_cautious(
    s: TaskSession, cfg: DetectorConfig = DEFAULT_DETECTOR_CONFIG
) -> PatternFinding | None:
    """Enough web activity before the task's first compile (or, for tasks
    never compiled, before its first submit)."""
    boundary = s.first_compile_index
    if boundary is None:
        boundary = s.submit_indices[0] if s.submit_indices else None
    if boundary is None or boundary == 0:
        return None
    pre = [ev for ev in s.events[:boundary] if ev.source is Source.BROWSER]
    if len(pre) < cfg.cautious_min_web_events:
        return None
    mode = int(any(ev.action is ActionKind.CLIPBOARD_COPY for ev in pre))
    return PatternFinding(
        pattern=Pattern.CAUTIOUS,
        user_id=s.user_id,
        task_id=s.task_id,
        evidence=((0, boundary),),
        metrics={"pre_web_events": len(pre), "mode": mode},
        params=_params(cfg),
    )


def _in_start_phase(ts: int, t_start: int, t_end: int, alpha: float) -> bool:
    dur = t_end - t_start
    if dur == 0:
        return True
    return Fraction(ts - t_start, dur) <= Fraction(alpha)


def _in_end_phase(ts: int, t_start: int, t_end: int, beta: float) -> bool:
    dur = t_end - t_start
    if dur == 0:
        return True
    return Fraction(t_end - ts, dur) <= Fraction(beta)


def detect_time_management(
    tl: Timeline,
    cfg: DetectorConfig = DEFAULT_DETECTOR_CONFIG,
    total_tasks: int = 10,
) -> PatternFinding | None:
    """Several distinct tasks opened in the start phase, all before anything
    succeeded or was submitted. breadth=1 when every task got previewed."""
    if tl.t_start is None or tl.t_end is None:
        return None
    cutoff = len(tl.events)
    for i, ev in enumerate(tl.events):
        if ev.action in (ActionKind.COMPILE_SUCCESS, ActionKind.SUBMIT):
            cutoff = i
            break
    previewed: dict[str, int] = {}
    for i, ev in enumerate(tl.events[:cutoff]):
        if ev.source is not Source.IDE or ev.task_id is None:
            continue
        if not _in_start_phase(
            ev.timestamp, tl.t_start, tl.t_end, cfg.start_phase_fraction
        ):
            continue
        previewed.setdefault(ev.task_id, i)
    if len(previewed) < cfg.time_mgmt_min_tasks:
        return None
    return PatternFinding(
        pattern=Pattern.TIME_MANAGEMENT,
        user_id=tl.user_id,
        task_id=None,
        evidence=tuple((i, i) for i in previewed.values()),
        metrics={
            "tasks_previewed": len(previewed),
            "breadth": int(len(previewed) == total_tasks),
        },
        params=_params(cfg, total_tasks=total_tasks),
    )


def detect_double_checking(
    tl: Timeline, cfg: DetectorConfig = DEFAULT_DETECTOR_CONFIG
) -> PatternFinding | None:
    """IDE activity in the end phase on tasks that were already submitted
    earlier, spanning at least R distinct tasks."""
    if tl.t_start is None or tl.t_end is None or tl.t_start == tl.t_end:
        return None
    first_submit: dict[str, int] = {}
    for i, ev in enumerate(tl.events):
        if ev.action is ActionKind.SUBMIT and ev.task_id is not None:
            first_submit.setdefault(ev.task_id, i)
    revisits: list[int] = []
    revisited: dict[str, None] = {}
    resubmissions = 0
    for i, ev in enumerate(tl.events):
        if ev.source is not Source.IDE or ev.task_id is None:
            continue
        if not _in_end_phase(
            ev.timestamp, tl.t_start, tl.t_end, cfg.end_phase_fraction
        ):
            continue
        submitted_at = first_submit.get(ev.task_id)
        if submitted_at is None or submitted_at >= i:
            continue
        revisits.append(i)
        revisited[ev.task_id] = None
        if ev.action is ActionKind.SUBMIT:
            resubmissions += 1
    if len(revisited) < cfg.double_check_min_revisits:
        return None
    return PatternFinding(
        pattern=Pattern.DOUBLE_CHECKING,
        user_id=tl.user_id,
        task_id=None,
        evidence=tuple((i, i) for i in revisits),
        metrics={"revisited_tasks": len(revisited), "resubmissions": resubmissions},
        params=_params(cfg),
    )


# --- action-ratio reports ---


def _ratio_report(scope: RatioScope, counts: Counter[str]) -> RatioReport:
    total = sum(counts.values())
    ratios = {k: v / total for k, v in counts.items()} if total else {}
    return RatioReport(scope=scope, counts=dict(counts), ratios=ratios)


def browsing_action_ratios(tl: Timeline) -> RatioReport:
    counts = Counter(
        ev.action.value for ev in tl.events if ev.source is Source.BROWSER
    )
    return _ratio_report(RatioScope.BROWSING_ACTIONS, counts)


def compile_outcome_ratios(tl: Timeline) -> RatioReport:
    """Two-way success/error ratio; unknown outcomes appear in counts only."""
    counts: Counter[str] = Counter()
    for ev in tl.events:
        if ev.action is ActionKind.COMPILE_SUCCESS:
            counts["success"] += 1
        elif ev.action is ActionKind.COMPILE_ERROR:
            counts["error"] += 1
        elif ev.action is ActionKind.COMPILE_UNKNOWN:
            counts["unknown"] += 1
    total = counts["success"] + counts["error"]
    ratios = {}
    if total:
        for key in ("success", "error"):
            if counts[key]:
                ratios[key] = counts[key] / total
    return RatioReport(
        scope=RatioScope.COMPILE_OUTCOMES,
        counts={k: v for k, v in counts.items() if v},
        ratios=ratios,
    )


def all_action_ratios(tl: Timeline) -> RatioReport:
    return _ratio_report(RatioScope.ALL_ACTIONS, Counter(ev.action.value for ev in tl.events))


def renormalize_excluding(report: RatioReport, excluded: set[str]) -> RatioReport:
    """Drop categories and renormalize the rest. Equivalent to the exact
    formula r'_c = r_c / (1 - r_k) applied over the excluded set."""
    remaining = {k: v for k, v in report.counts.items() if k not in excluded}
    if report.counts and not remaining:
        raise AllExcluded(sorted(excluded))
    if report.scope is RatioScope.COMPILE_OUTCOMES:
        ratio_total = sum(v for k, v in remaining.items() if k != "unknown")
        ratios = {
            k: v / ratio_total
            for k, v in remaining.items()
            if k != "unknown" and ratio_total
        }
    else:
        total = sum(remaining.values())
        ratios = {k: v / total for k, v in remaining.items()} if total else {}
    return RatioReport(scope=report.scope, counts=remaining, ratios=ratios)


def profile_student(
    tl: Timeline,
    cfg: DetectorConfig = DEFAULT_DETECTOR_CONFIG,
    total_tasks: int = 10,
) -> StudentProfile:
    """Run every detector and ratio report over one attributed timeline."""
    sessions = sessionize(tl)
    findings: list[PatternFinding] = []
    for s in sessions:
        findings.extend(detect_try_and_error(s, cfg))
        findings.extend(detect_try_and_search(s, cfg))
        cautious = detect_cautious(s, cfg)
        if cautious is not None:
            findings.append(cautious)
    tm = detect_time_management(tl, cfg, total_tasks)
    if tm is not None:
        findings.append(tm)
    dc = detect_double_checking(tl, cfg)
    if dc is not None:
        findings.append(dc)
    duration = 0.0
    if tl.t_start is not None and tl.t_end is not None:
        duration = (tl.t_end - tl.t_start) / 1000
    return StudentProfile(
        user_id=tl.user_id,
        findings=findings,
        ratios={
            "browsing": browsing_action_ratios(tl),
            "compile": compile_outcome_ratios(tl),
            "all": all_action_ratios(tl),
        },
        tasks_attempted=len(sessions),
        tasks_submitted=sum(1 for s in sessions if s.submit_indices),
        duration=duration,
        config=cfg,
    )


# --- JSON serialization (schema shared by the CLI and the HTTP API) ---


def finding_to_dict(f: PatternFinding) -> dict:
    return {
        "pattern": f.pattern.value,
        "userID": f.user_id,
        "taskID": f.task_id,
        "evidence": [[a, b] for a, b in f.evidence],
        "metrics": dict(f.metrics),
        "params": dict(f.params),
    }


def ratio_report_to_dict(r: RatioReport) -> dict:
    return {"scope": r.scope.value, "counts": dict(r.counts), "ratios": dict(r.ratios)}


def profile_to_dict(p: StudentProfile) -> dict:
    return {
        "userID": p.user_id,
        "findings": [finding_to_dict(f) for f in p.findings],
        "ratios": {k: ratio_report_to_dict(r) for k, r in p.ratios.items()},
        "tasksAttempted": p.tasks_attempted,
        "tasksSubmitted": p.tasks_submitted,
        "duration": p.duration,
    }
