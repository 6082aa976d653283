"""Fuse the two log streams into one chronological per-user timeline.

Shaping renames and normalizes the source columns into the unified event
schema, filtering drops rows that lost a mandatory value, and fusion merges
both streams sorted by timestamp. IDE wall-clock strings are JST (fixed
UTC+9, no DST); browser timestamps are epoch numbers whose unit is resolved
by magnitude. All internal times are epoch milliseconds UTC.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from urllib.parse import parse_qs, urlsplit

from .errors import MixedUsers, NegativeTimestamp, UnparseableTimestamp
from .ingest import RawBrowsingRecord, RawProgrammingRecord

JST = timezone(timedelta(hours=9))
_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_MS = timedelta(milliseconds=1)

# Below this magnitude an epoch number is taken as seconds, above as
# milliseconds already. Unambiguous until the year 33658.
_MS_THRESHOLD = 10**12


class Source(str, Enum):
    BROWSER = "browser"
    IDE = "ide"


class ActionKind(str, Enum):
    TAB_ACTIVATE = "TabActivate"
    TAB_UPDATE = "TabUpdate"
    TAB_CREATE = "TabCreate"
    TAB_REMOVE = "TabRemove"
    SCROLL = "Scroll"
    CLIPBOARD_COPY = "ClipboardCopy"
    SEARCH_QUERY = "SearchQuery"
    COMPILE_SUCCESS = "CompileSuccess"
    COMPILE_ERROR = "CompileError"
    COMPILE_UNKNOWN = "CompileUnknown"
    SUBMIT = "Submit"
    OTHER_BROWSER = "OtherBrowser"
    OTHER_IDE = "OtherIde"


COMPILE_KINDS = frozenset(
    {ActionKind.COMPILE_SUCCESS, ActionKind.COMPILE_ERROR, ActionKind.COMPILE_UNKNOWN}
)
TAB_KINDS = frozenset(
    {
        ActionKind.TAB_ACTIVATE,
        ActionKind.TAB_UPDATE,
        ActionKind.TAB_CREATE,
        ActionKind.TAB_REMOVE,
        ActionKind.SEARCH_QUERY,
    }
)


class CompileOutcome(str, Enum):
    SUCCESS = "success"
    ERROR = "error"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FusionConfig:
    """Tunables with no single right answer: which URLs count as a search,
    and which compile-message substrings mark an error."""

    search_hosts: tuple[str, ...] = ("google.", "bing.", "duckduckgo.")
    search_query_keys: tuple[str, ...] = ("q",)
    error_markers: tuple[str, ...] = ("error", "exception", "undefined", "unbound")


DEFAULT_CONFIG = FusionConfig()


@dataclass(frozen=True)
class UnifiedEvent:
    timestamp: int  # epoch ms UTC
    user_id: str
    action: ActionKind
    raw_action: str
    source: Source
    task_id: str | None = None
    tab_url: str | None = None
    clipboard_copy: str | None = None
    msg: str | None = None


@dataclass(frozen=True)
class Timeline:
    user_id: str
    events: tuple[UnifiedEvent, ...]
    t_start: int | None
    t_end: int | None
    task_attributed: bool = False


def parse_calendar_string(raw: str) -> datetime:
    """Parse a wall-clock string; naive values are interpreted as JST."""
    text = raw.strip()
    dt = None
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        for fmt in ("%Y/%m/%d %H:%M:%S", "%Y/%m/%d %H:%M"):
            try:
                dt = datetime.strptime(text, fmt)
                break
            except ValueError:
                continue
    if dt is None:
        raise UnparseableTimestamp(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=JST)
    return dt


def normalize_timestamp(raw, source: Source) -> int:
    """Convert a source timestamp to epoch milliseconds UTC.

    Browser values are epoch numbers (seconds below 10^12, milliseconds
    above); IDE values are JST calendar strings.
    """
    if source is Source.BROWSER:
        if not isinstance(raw, (int, float)) or not math.isfinite(raw):
            raise UnparseableTimestamp(raw)
        if raw < 0:
            raise NegativeTimestamp(raw)
        if raw < _MS_THRESHOLD:
            return round(raw * 1000)
        return round(raw)
    if not isinstance(raw, str):
        raise UnparseableTimestamp(raw)
    dt = parse_calendar_string(raw)
    ms = (dt - _EPOCH) // _MS
    if ms < 0:
        raise NegativeTimestamp(raw)
    return ms


def is_search_url(url: str | None, config: FusionConfig = DEFAULT_CONFIG) -> bool:
    if not url:
        return False
    parts = urlsplit(url)
    host = parts.netloc.lower()
    if not any(marker in host for marker in config.search_hosts):
        return False
    query_keys = parse_qs(parts.query, keep_blank_values=True)
    return any(key in query_keys for key in config.search_query_keys)


_ACTION_PREFIXES = (
    ("tab_activate", ActionKind.TAB_ACTIVATE),
    ("tab_update", ActionKind.TAB_UPDATE),
    ("tab_create", ActionKind.TAB_CREATE),
    ("tab_remove", ActionKind.TAB_REMOVE),
    ("scroll", ActionKind.SCROLL),
    ("copy", ActionKind.CLIPBOARD_COPY),
    ("clipboard", ActionKind.CLIPBOARD_COPY),
)


def classify_action(
    raw_action: str, tab_url: str | None = None, config: FusionConfig = DEFAULT_CONFIG
) -> ActionKind:
    """Map a raw browser action label to an ActionKind.

    Unknown labels fall back to OtherBrowser; the logger's action vocabulary
    is open-ended. Tab activations/updates pointing at a search-engine
    results URL are upgraded to SearchQuery.
    """
    label = raw_action.strip().lower()
    kind = ActionKind.OTHER_BROWSER
    for prefix, candidate in _ACTION_PREFIXES:
        if label.startswith(prefix):
            kind = candidate
            break
    if kind in (ActionKind.TAB_UPDATE, ActionKind.TAB_ACTIVATE) and is_search_url(
        tab_url, config
    ):
        return ActionKind.SEARCH_QUERY
    return kind


def classify_compile_outcome(
    msg: str | None, config: FusionConfig = DEFAULT_CONFIG
) -> CompileOutcome:
    if msg is None or not msg.strip():
        return CompileOutcome.UNKNOWN
    lowered = msg.lower()
    if any(marker in lowered for marker in config.error_markers):
        return CompileOutcome.ERROR
    return CompileOutcome.SUCCESS


_OUTCOME_TO_KIND = {
    CompileOutcome.SUCCESS: ActionKind.COMPILE_SUCCESS,
    CompileOutcome.ERROR: ActionKind.COMPILE_ERROR,
    CompileOutcome.UNKNOWN: ActionKind.COMPILE_UNKNOWN,
}


def shape_browsing(
    rec: RawBrowsingRecord, config: FusionConfig = DEFAULT_CONFIG
) -> UnifiedEvent:
    """date -> timestamp, UserID -> user_id, UserAction -> raw_action.
    Scroll metrics, titles, body text and viewport geometry are dropped."""
    return UnifiedEvent(
        timestamp=normalize_timestamp(rec.date, Source.BROWSER),
        user_id=rec.user_id,
        action=classify_action(rec.user_action, rec.tab_url, config),
        raw_action=rec.user_action,
        source=Source.BROWSER,
        tab_url=rec.tab_url,
        clipboard_copy=rec.clipboard_copy,
    )


def shape_programming(
    rec: RawProgrammingRecord, config: FusionConfig = DEFAULT_CONFIG
) -> UnifiedEvent:
    """time -> timestamp (JST conversion), uid -> user_id, op -> raw_action;
    classID and lang are dropped, taskID is kept."""
    op = rec.op.strip().lower()
    if op == "submit":
        action = ActionKind.SUBMIT
    elif op == "compile":
        action = _OUTCOME_TO_KIND[classify_compile_outcome(rec.msg, config)]
    else:
        action = ActionKind.OTHER_IDE
    msg = rec.msg if rec.msg.strip() else None
    return UnifiedEvent(
        timestamp=normalize_timestamp(rec.time, Source.IDE),
        user_id=rec.uid,
        action=action,
        raw_action=rec.op,
        source=Source.IDE,
        task_id=rec.task_id,
        msg=msg,
    )


def filter_events(
    events: list[UnifiedEvent],
) -> tuple[list[UnifiedEvent], dict[str, int]]:
    """Drop events missing a usable timestamp or user, and browser events
    with an empty action label. Returns (kept, drop counts per reason)."""
    kept: list[UnifiedEvent] = []
    dropped: Counter[str] = Counter()
    for ev in events:
        if not isinstance(ev.timestamp, int) or ev.timestamp < 0:
            dropped["invalid_timestamp"] += 1
        elif not ev.user_id:
            dropped["missing_user"] += 1
        elif ev.source is Source.BROWSER and not ev.raw_action.strip():
            dropped["empty_action"] += 1
        else:
            kept.append(ev)
    return kept, dict(dropped)


def fuse(
    browser_events: list[UnifiedEvent], ide_events: list[UnifiedEvent]
) -> Timeline:
    """Stable merge by timestamp; at equal timestamps IDE events sort before
    browser events (a compile result precedes the reaction to it), then by
    original input order."""
    users = {ev.user_id for ev in browser_events} | {ev.user_id for ev in ide_events}
    if len(users) > 1:
        raise MixedUsers(users)
    tagged = [(ev.timestamp, 0, i, ev) for i, ev in enumerate(ide_events)]
    tagged += [(ev.timestamp, 1, i, ev) for i, ev in enumerate(browser_events)]
    tagged.sort(key=lambda t: t[:3])
    events = tuple(t[3] for t in tagged)
    return Timeline(
        user_id=next(iter(users)) if users else "",
        events=events,
        t_start=events[0].timestamp if events else None,
        t_end=events[-1].timestamp if events else None,
    )


def attribute_tasks(tl: Timeline) -> Timeline:
    """Carry the task of the nearest preceding IDE event forward onto
    browser events; events before the first IDE event stay unattributed."""
    current: str | None = None
    events = []
    for ev in tl.events:
        if ev.source is Source.IDE:
            current = ev.task_id
            events.append(ev)
        elif ev.task_id is None and current is not None:
            events.append(replace(ev, task_id=current))
        else:
            events.append(ev)
    return replace(tl, events=tuple(events), task_attributed=True)


def build_timeline(
    browser_records: list[RawBrowsingRecord],
    ide_records: list[RawProgrammingRecord],
    config: FusionConfig = DEFAULT_CONFIG,
) -> tuple[Timeline, dict[str, int]]:
    """Full pipeline: shape both record kinds, filter, fuse, attribute tasks.
    Returns the attributed timeline and drop counts per reason."""
    dropped: Counter[str] = Counter()
    shaped_browser: list[UnifiedEvent] = []
    for rec in browser_records:
        try:
            shaped_browser.append(shape_browsing(rec, config))
        except (UnparseableTimestamp, NegativeTimestamp):
            dropped["invalid_timestamp"] += 1
    shaped_ide: list[UnifiedEvent] = []
    for rec in ide_records:
        try:
            shaped_ide.append(shape_programming(rec, config))
        except (UnparseableTimestamp, NegativeTimestamp):
            dropped["invalid_timestamp"] += 1
    browser_events, drop_b = filter_events(shaped_browser)
    ide_events, drop_i = filter_events(shaped_ide)
    for reason, count in (*drop_b.items(), *drop_i.items()):
        dropped[reason] += count
    return attribute_tasks(fuse(browser_events, ide_events)), dict(dropped)


# --- timeline JSON export (stable schema consumed by the UI and the CLI) ---


def event_to_dict(ev: UnifiedEvent) -> dict:
    return {
        "timestamp": ev.timestamp,
        "userID": ev.user_id,
        "taskID": ev.task_id,
        "userAction": ev.raw_action,
        "tabURL": ev.tab_url,
        "clipboardCopy": ev.clipboard_copy,
        "msg": ev.msg,
        "actionKind": ev.action.value,
        "source": ev.source.value,
    }


def timeline_to_dict(tl: Timeline) -> dict:
    return {
        "userID": tl.user_id,
        "taskAttributed": tl.task_attributed,
        "tStart": tl.t_start,
        "tEnd": tl.t_end,
        "events": [event_to_dict(ev) for ev in tl.events],
    }


def event_from_dict(data: dict) -> UnifiedEvent:
    return UnifiedEvent(
        timestamp=data["timestamp"],
        user_id=data["userID"],
        action=ActionKind(data["actionKind"]),
        raw_action=data["userAction"],
        source=Source(data["source"]),
        task_id=data.get("taskID"),
        tab_url=data.get("tabURL"),
        clipboard_copy=data.get("clipboardCopy"),
        msg=data.get("msg"),
    )


def timeline_from_dict(data: dict) -> Timeline:
    events = tuple(event_from_dict(e) for e in data.get("events", []))
    return Timeline(
        user_id=data["userID"],
        events=events,
        t_start=data.get("tStart"),
        t_end=data.get("tEnd"),
        task_attributed=bool(data.get("taskAttributed", False)),
    )
