"""Parsers for the two source log formats.

Both loggers export UTF-8 comma-delimited text with RFC-4180 quoting. The
browsing log carries one row per browser action (tab switches, scrolls,
clipboard copies); the programming log carries one row per IDE operation
(compile, submit). Rows that fail per-field validation are excluded and
reported, never silently kept.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields

from .errors import MalformedDelimitedText, MissingRequiredColumn

# Column sets as exported by the loggers. Matching is case-insensitive and
# tolerant of underscores/periods, so Tab_URL == tab_url == tab.url.
BROWSING_COLUMNS = (
    "UserID",
    "UserAction",
    "date",
    "Tab_URL",
    "Tab_Title",
    "Tab_BodyText",
    "ClipboardCopy",
    "Scroll_YAxisSpeed",
    "Scroll_VisibleText",
    "Scroll_ViewPort_XScroll",
    "Scroll_ViewPort_YScroll",
    "Scroll_XScrollRate",
    "Scroll_YScrollRate",
    "ViewPortWidth",
    "ViewPortHeight",
    "DocWidth",
    "DocHeight",
)

PROGRAMMING_COLUMNS = ("time", "uid", "classID", "taskID", "lang", "op", "msg")

# Tokens that loggers emit for missing values; normalized to absent on read.
_NAN_TOKENS = {"nan"}


def _canon(name: str) -> str:
    return name.strip().lower().replace("_", "").replace(".", "")


_BROWSING_CANON = {_canon(c): c for c in BROWSING_COLUMNS}
_PROGRAMMING_CANON = {_canon(c): c for c in PROGRAMMING_COLUMNS}

# canonical header key -> record attribute
_BROWSING_FIELD_MAP = {
    "userid": "user_id",
    "useraction": "user_action",
    "date": "date",
    "taburl": "tab_url",
    "tabtitle": "tab_title",
    "tabbodytext": "tab_body_text",
    "clipboardcopy": "clipboard_copy",
    "scrollyaxisspeed": "scroll_y_axis_speed",
    "scrollvisibletext": "scroll_visible_text",
    "scrollviewportxscroll": "scroll_viewport_x",
    "scrollviewportyscroll": "scroll_viewport_y",
    "scrollxscrollrate": "scroll_x_rate",
    "scrollyscrollrate": "scroll_y_rate",
    "viewportwidth": "viewport_width",
    "viewportheight": "viewport_height",
    "docwidth": "doc_width",
    "docheight": "doc_height",
}
_PROGRAMMING_FIELD_MAP = {
    "time": "time",
    "uid": "uid",
    "classid": "class_id",
    "taskid": "task_id",
    "lang": "lang",
    "op": "op",
    "msg": "msg",
}

_BROWSING_NUMERIC_FIELDS = frozenset(
    {
        "scroll_y_axis_speed",
        "scroll_viewport_x",
        "scroll_viewport_y",
        "scroll_x_rate",
        "scroll_y_rate",
        "viewport_width",
        "viewport_height",
        "doc_width",
        "doc_height",
    }
)

_BROWSING_REQUIRED = ("UserID", "UserAction", "date")


@dataclass(frozen=True)
class RawBrowsingRecord:
    """One row of the browsing log, field names normalized to snake case."""

    user_id: str
    user_action: str
    date: float
    tab_url: str | None = None
    tab_title: str | None = None
    tab_body_text: str | None = None
    clipboard_copy: str | None = None
    scroll_y_axis_speed: float | None = None
    scroll_visible_text: str | None = None
    scroll_viewport_x: float | None = None
    scroll_viewport_y: float | None = None
    scroll_x_rate: float | None = None
    scroll_y_rate: float | None = None
    viewport_width: float | None = None
    viewport_height: float | None = None
    doc_width: float | None = None
    doc_height: float | None = None


@dataclass(frozen=True)
class RawProgrammingRecord:
    """One row of the IDE log. `time` is kept verbatim (a JST wall-clock
    string); conversion to epoch time happens in fusion."""

    time: str
    uid: str
    class_id: str
    task_id: str
    lang: str
    op: str
    msg: str = ""


@dataclass
class SchemaReport:
    source: str  # "browser" | "ide"
    missing_columns: list[str] = field(default_factory=list)
    extra_columns: list[str] = field(default_factory=list)
    row_count: int = 0
    rejected_rows: list[tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "missingColumns": list(self.missing_columns),
            "extraColumns": list(self.extra_columns),
            "rowCount": self.row_count,
            "rejectedRows": [
                {"rowIndex": i, "reason": r} for i, r in self.rejected_rows
            ],
        }


def _check_quote_balance(text: str) -> None:
    # RFC-4180 pairs every quote char (field delimiters or doubled escapes),
    # so an odd count means an unterminated quoted field.
    if text.count('"') % 2 != 0:
        raise MalformedDelimitedText("unbalanced quoting in delimited text")


def _read_rows(text: str) -> list[list[str]]:
    _check_quote_balance(text)
    try:
        return list(csv.reader(io.StringIO(text), strict=True))
    except csv.Error as exc:
        raise MalformedDelimitedText(str(exc)) from exc


def _normalize_cell(value: str | None) -> str | None:
    """Empty strings and NAN tokens mean 'absent'."""
    if value is None:
        return None
    value = value.strip()
    if not value or value.lower() in _NAN_TOKENS:
        return None
    return value


def _parse_number(text: str) -> float:
    try:
        return int(text)
    except ValueError:
        value = float(text)  # may raise ValueError for the caller
        if not math.isfinite(value):
            raise ValueError(f"not a finite number: {text}")
        return value


def validate_schema(header: list[str], source: str) -> SchemaReport:
    """Pure header check against the expected column set for `source`."""
    expected = _BROWSING_CANON if source == "browser" else _PROGRAMMING_CANON
    seen = {_canon(h) for h in header}
    missing = [name for canon, name in expected.items() if canon not in seen]
    extra = [h for h in header if _canon(h) not in expected]
    return SchemaReport(source=source, missing_columns=missing, extra_columns=extra)


def _header_index(header: list[str], field_map: dict[str, str]) -> dict[str, int]:
    index = {}
    for pos, name in enumerate(header):
        canon = _canon(name)
        if canon in field_map and canon not in index:
            index[canon] = pos
    return index


def _cell(row: list[str], idx: dict[str, int], canon: str) -> str | None:
    pos = idx.get(canon)
    if pos is None or pos >= len(row):
        return None
    return _normalize_cell(row[pos])


def parse_browsing_log(text: str) -> tuple[list[RawBrowsingRecord], SchemaReport]:
    """Parse browsing-log text into records plus a schema report.

    Raises MissingRequiredColumn when UserID, UserAction, or date is absent
    from the header, and MalformedDelimitedText on unbalanced quoting.
    Accepted records preserve data-row order; len(records) plus
    len(report.rejected_rows) equals the number of data rows.
    """
    rows = _read_rows(text)
    if not rows:
        raise MalformedDelimitedText("input has no header row")
    header, data = rows[0], rows[1:]
    idx = _header_index(header, _BROWSING_FIELD_MAP)
    for required in _BROWSING_REQUIRED:
        if _canon(required) not in idx:
            raise MissingRequiredColumn(required)

    report = validate_schema(header, "browser")
    report.row_count = len(data)
    records: list[RawBrowsingRecord] = []
    for i, row in enumerate(data):
        try:
            records.append(_browsing_record(row, idx))
        except ValueError as exc:
            report.rejected_rows.append((i, str(exc)))
    return records, report


def _browsing_record(row: list[str], idx: dict[str, int]) -> RawBrowsingRecord:
    values: dict[str, object] = {}
    for canon, attr in _BROWSING_FIELD_MAP.items():
        cell = _cell(row, idx, canon)
        if attr == "user_id" or attr == "user_action":
            if cell is None:
                raise ValueError(f"{_BROWSING_CANON[canon]}: empty")
            values[attr] = cell
        elif attr == "date":
            if cell is None:
                raise ValueError("date: empty")
            try:
                number = _parse_number(cell)
            except ValueError:
                raise ValueError(f"date: not a number: {cell}") from None
            if number < 0:
                raise ValueError(f"date: negative: {cell}")
            values[attr] = number
        elif attr in _BROWSING_NUMERIC_FIELDS:
            if cell is None:
                values[attr] = None
            else:
                try:
                    values[attr] = _parse_number(cell)
                except ValueError:
                    raise ValueError(
                        f"{_BROWSING_CANON[canon]}: not a number: {cell}"
                    ) from None
        else:
            values[attr] = cell
    return RawBrowsingRecord(**values)


def parse_programming_log(text: str) -> tuple[list[RawProgrammingRecord], SchemaReport]:
    """Parse IDE-log text into records plus a schema report.

    All seven columns must be present in the header. A row is rejected when
    uid, taskID, or op is empty or its time does not parse as a calendar
    timestamp; `time` itself is kept verbatim.
    """
    rows = _read_rows(text)
    if not rows:
        raise MalformedDelimitedText("input has no header row")
    header, data = rows[0], rows[1:]
    idx = _header_index(header, _PROGRAMMING_FIELD_MAP)
    for column in PROGRAMMING_COLUMNS:
        if _canon(column) not in idx:
            raise MissingRequiredColumn(column)

    report = validate_schema(header, "ide")
    report.row_count = len(data)
    records: list[RawProgrammingRecord] = []
    for i, row in enumerate(data):
        try:
            records.append(_programming_record(row, idx))
        except ValueError as exc:
            report.rejected_rows.append((i, str(exc)))
    return records, report


def _programming_record(row: list[str], idx: dict[str, int]) -> RawProgrammingRecord:
    cells = {canon: _cell(row, idx, canon) for canon in _PROGRAMMING_FIELD_MAP}
    for canon in ("uid", "taskid", "op", "time"):
        if cells[canon] is None:
            raise ValueError(f"{_PROGRAMMING_CANON[canon]}: empty")
    if not parses_as_calendar(cells["time"]):
        raise ValueError(f"time: unparseable timestamp: {cells['time']}")
    return RawProgrammingRecord(
        time=cells["time"],
        uid=cells["uid"],
        class_id=cells["classid"] or "",
        task_id=cells["taskid"],
        lang=cells["lang"] or "",
        op=cells["op"],
        msg=cells["msg"] or "",
    )


def parses_as_calendar(text: str) -> bool:
    from .fusion import parse_calendar_string

    try:
        parse_calendar_string(text)
    except Exception:
        return False
    return True


# --- serialization (round-trip support; also used by the synthetic corpus) ---


def _format_number(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int) or (isinstance(value, float) and value.is_integer()):
        return str(int(value))
    return repr(value)


def browsing_record_to_row(rec: RawBrowsingRecord) -> list[str]:
    """Row values in BROWSING_COLUMNS order; absent fields become empty."""
    out = []
    for canon in (_canon(c) for c in BROWSING_COLUMNS):
        attr = _BROWSING_FIELD_MAP[canon]
        value = getattr(rec, attr)
        if attr == "date" or attr in _BROWSING_NUMERIC_FIELDS:
            out.append(_format_number(value))
        else:
            out.append("" if value is None else str(value))
    return out


def programming_record_to_row(rec: RawProgrammingRecord) -> list[str]:
    return [getattr(rec, _PROGRAMMING_FIELD_MAP[_canon(c)]) for c in PROGRAMMING_COLUMNS]


def _write_log(header: tuple[str, ...], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_browsing_log(records: list[RawBrowsingRecord]) -> str:
    return _write_log(BROWSING_COLUMNS, [browsing_record_to_row(r) for r in records])


def write_programming_log(records: list[RawProgrammingRecord]) -> str:
    return _write_log(
        PROGRAMMING_COLUMNS, [programming_record_to_row(r) for r in records]
    )


def record_fields(record) -> dict:
    return {f.name: getattr(record, f.name) for f in fields(record)}
