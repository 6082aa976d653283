"""Deterministic synthetic browsing+programming log pairs.

Stands in for a study dataset that is not publicly available. Each student
gets a one-hour (at most) session over tasks A-J, laid out as consecutive
per-task time slots. Requested archetypes inject their defining event
subsequence into fixed slots; a baseline student gives up after a failed
compile and moves on, which structurally avoids every archetype:

- one compile per task, so no error-to-compile intervals (TryAndError,
  TryAndSearch impossible);
- at most 2 browser events between a task's opening and its compile
  (below the Cautious threshold of 3);
- task slot i starts at roughly i/task_count of the session, so at most
  two distinct tasks can open inside the 15% start phase (below the
  TimeManagement threshold of 3);
- no IDE event ever follows a submit on the same task (DoubleChecking
  needs revisits of submitted tasks).

Lecture-cohort students succeed more often at compiling; non-lecture
students browse roughly twice as much. These are calibration constants,
not measurements.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from urllib.parse import quote_plus

from .errors import InvalidSpec
from .fusion import JST
from .ingest import (
    RawBrowsingRecord,
    RawProgrammingRecord,
    write_browsing_log,
    write_programming_log,
)
from .patterns import Pattern

SESSION_START = datetime(2023, 5, 1, 10, 0, 0, tzinfo=JST)
_SESSION_START_MS = 1_682_902_800_000  # epoch ms of the line above

MAX_SESSION_SECONDS = 3600
MAX_TASK_COUNT = 10
# The slot scheduler needs breathing room to place events at >= 1 s gaps.
MIN_SECONDS_PER_TASK = 60

TASK_LETTERS = "ABCDEFGHIJ"

TASK_PROMPTS = {
    "A": "Define variable PI as 3.14.",
    "B": "Write a scheme to show PI * 5^2.",
    "C": "Write a scheme to show (-b+sqrt(b^2-3ac))/3a.",
    "D": "Define function areaDisk to calculate circle area from radius r.",
    "E": "Define function areaRing to calculate circle area from outer and inner diameter D, d.",
    "F": "Define function d2y that convert US currency dollar d to Japanese currency yen. Note that 1 US dollar is 108.43 yen.",
    "G": "Define function e2d that convert European currency e to United states dollar. Note that 1 euro is 1.1069 US dollar.",
    "H": "Define function p2e that convert British currency pond p to European currency. Note that 1 pond is 1.1632 euro.",
    "I": "Define function p2y that convert British currency pond p to Japanese currency. Use d2y, e2d, and p2e in the previous questions.",
    "J": "Define function c2f that convert Celsius C to Fahrenheit. Note that f = 1.8c + 32.",
}

_SUCCESS_MSGS = {
    "A": "3.14",
    "B": "78.5",
    "C": "0.28867513459481287",
    "D": "#<procedure:areaDisk>",
    "E": "#<procedure:areaRing>",
    "F": "#<procedure:d2y>",
    "G": "#<procedure:e2d>",
    "H": "#<procedure:p2e>",
    "I": "#<procedure:p2y>",
    "J": "#<procedure:c2f>",
}

# Every entry carries one of the fusion error markers, as a compiler would.
_ERROR_MSGS = (
    "PI: unbound identifier in: PI",
    "areaDisk: unbound identifier in: areaDisk",
    "sqrt: undefined; cannot reference an identifier before its definition",
    "d2y: undefined; cannot reference an identifier before its definition",
    "read-syntax: syntax error: expected a `)` to close `(`",
    "application: arity error; procedure expects 1 argument, given 2",
)

_PAGES = (
    ("https://docs.racket-lang.org/guide/define.html", "Definitions: define - Racket Guide"),
    ("https://docs.racket-lang.org/reference/arithmetic.html", "Arithmetic - Racket Reference"),
    ("https://stackoverflow.com/questions/41386527/define-a-function-in-scheme", "How to define a function in Scheme - Stack Overflow"),
    ("https://en.wikipedia.org/wiki/Scheme_(programming_language)", "Scheme (programming language) - Wikipedia"),
    ("https://htdp.org/2023-8-14/Book/part_one.html", "How to Design Programs: Part I"),
)

_SEARCH_QUERIES = (
    "racket define variable",
    "scheme show value expression",
    "racket sqrt function",
    "racket area of circle function",
    "scheme currency conversion define",
    "racket unbound identifier fix",
)

_COPY_SNIPPETS = (
    "(define PI 3.14)",
    "(define (areaDisk r) (* PI r r))",
    "(* PI (expt 5 2))",
    "(define (d2y d) (* d 108.43))",
    "(sqrt (- (* b b) (* 3 a c)))",
)


class Cohort(str, Enum):
    LECTURE = "lecture"
    NON_LECTURE = "non_lecture"


@dataclass(frozen=True)
class Calibration:
    """Constants that make the two cohorts directionally different."""

    lecture_success_p: float = 0.7
    non_lecture_success_p: float = 0.4
    non_lecture_browse_multiplier: int = 2


DEFAULT_CALIBRATION = Calibration()

_PATTERN_ORDER = (
    Pattern.TRY_AND_ERROR,
    Pattern.TRY_AND_SEARCH,
    Pattern.CAUTIOUS,
    Pattern.TIME_MANAGEMENT,
    Pattern.DOUBLE_CHECKING,
)

# Which task slot hosts each task-scoped injection.
_CAUTIOUS_SLOT = 0
_TRY_AND_ERROR_SLOT = 1
_TRY_AND_SEARCH_SLOT = 2


@dataclass(frozen=True)
class StudentSpec:
    user_id: str
    cohort: Cohort
    archetypes: frozenset[Pattern] = frozenset()
    seed: int = 0
    session_seconds: int = MAX_SESSION_SECONDS
    task_count: int = MAX_TASK_COUNT

    def __post_init__(self) -> None:
        if not self.user_id:
            raise InvalidSpec("user_id must be nonempty")
        if not isinstance(self.cohort, Cohort):
            raise InvalidSpec(f"unknown cohort: {self.cohort!r}")
        if self.session_seconds > MAX_SESSION_SECONDS:
            raise InvalidSpec(
                f"session_seconds {self.session_seconds} exceeds the "
                f"{MAX_SESSION_SECONDS} s session cap"
            )
        if not (1 <= self.task_count <= MAX_TASK_COUNT):
            raise InvalidSpec("task_count must be between 1 and 10")
        if self.session_seconds < MIN_SECONDS_PER_TASK * self.task_count:
            raise InvalidSpec(
                f"session_seconds {self.session_seconds} too short: need at "
                f"least {MIN_SECONDS_PER_TASK} s per task"
            )
        bad = {a for a in self.archetypes if not isinstance(a, Pattern)}
        if bad:
            raise InvalidSpec(f"unknown archetypes: {bad}")
        if Pattern.TIME_MANAGEMENT in self.archetypes and self.task_count < 3:
            raise InvalidSpec("TimeManagement injection needs task_count >= 3")
        if Pattern.DOUBLE_CHECKING in self.archetypes and self.task_count < 2:
            raise InvalidSpec("DoubleChecking injection needs task_count >= 2")
        if (
            Pattern.TRY_AND_SEARCH in self.archetypes
            and self.task_count < _TRY_AND_SEARCH_SLOT + 1
        ):
            raise InvalidSpec("TryAndSearch injection needs task_count >= 3")
        if (
            Pattern.TRY_AND_ERROR in self.archetypes
            and self.task_count < _TRY_AND_ERROR_SLOT + 1
        ):
            raise InvalidSpec("TryAndError injection needs task_count >= 2")


@dataclass(frozen=True)
class CohortSpec:
    master_seed: int = 0
    lecture_count: int = 13
    non_lecture_count: int = 20
    archetype_mix: dict[Pattern, float] = field(
        default_factory=lambda: {p: 0.25 for p in _PATTERN_ORDER}
    )

    def __post_init__(self) -> None:
        if self.lecture_count < 0 or self.non_lecture_count < 0:
            raise InvalidSpec("cohort counts must be >= 0")
        for pattern, prob in self.archetype_mix.items():
            if not isinstance(pattern, Pattern):
                raise InvalidSpec(f"unknown pattern in mix: {pattern!r}")
            if not (0 <= prob <= 1):
                raise InvalidSpec(f"probability for {pattern.value} not in [0,1]")


# --- internal planned-event representation, materialized at the end ---


@dataclass
class _Planned:
    offset: int  # seconds from session start
    stream: str  # "web" | "ide"
    action: str  # UserAction or op
    url: str | None = None
    title: str | None = None
    body: str | None = None
    copy_text: str | None = None
    scroll: bool = False
    task: str | None = None
    msg: str = ""


class _Browser:
    """Generates plausible browsing rows, tracking the current page."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.page = _PAGES[0]

    def goto(self, url: str, title: str) -> None:
        self.page = (url, title)

    def event(self, action: str | None = None) -> _Planned:
        rng = self.rng
        if action is None:
            roll = rng.random()
            if roll < 0.30:
                action = "tab_update"
            elif roll < 0.50:
                action = "tab_activate"
            elif roll < 0.80:
                action = "scroll"
            elif roll < 0.90:
                action = "tab_create"
            else:
                action = "copy"
        if action in ("tab_update", "tab_create") and rng.random() < 0.25:
            query = rng.choice(_SEARCH_QUERIES)
            self.goto(
                f"https://www.google.com/search?q={quote_plus(query)}",
                f"{query} - Google Search",
            )
        elif action in ("tab_update", "tab_create", "tab_activate"):
            self.goto(*rng.choice(_PAGES))
        url, title = self.page
        return _Planned(
            offset=0,
            stream="web",
            action=action,
            url=url,
            title=title,
            body=f"{title}. Related examples and discussion.",
            copy_text=rng.choice(_COPY_SNIPPETS) if action == "copy" else None,
            scroll=action == "scroll",
        )

    def search(self, query: str) -> _Planned:
        self.goto(
            f"https://www.google.com/search?q={quote_plus(query)}",
            f"{query} - Google Search",
        )
        url, title = self.page
        return _Planned(
            offset=0,
            stream="web",
            action="tab_update",
            url=url,
            title=title,
            body=f"Search results for {query}.",
        )

    def copy(self, text: str) -> _Planned:
        url, title = self.page
        return _Planned(
            offset=0,
            stream="web",
            action="copy",
            url=url,
            title=title,
            body=f"{title}. Related examples and discussion.",
            copy_text=text,
        )


def _ide(op: str, task: str, msg: str = "") -> _Planned:
    return _Planned(offset=0, stream="ide", action=op, task=task, msg=msg)


def _spread(rng: random.Random, start: int, end: int, count: int) -> list[int]:
    """Strictly increasing integer offsets in [start, end), exponential-ish
    gaps rescaled to always fit."""
    if count == 0:
        return []
    budget = end - start - count - 1
    if budget < 1:
        raise InvalidSpec("session too dense to place events")
    gaps = [rng.expovariate(1.0) for _ in range(count)]
    scale = budget / sum(gaps)
    offsets = []
    t = start
    for g in gaps:
        t += 1 + int(g * scale)
        offsets.append(t)
    return offsets


def _success_probability(cohort: Cohort, cal: Calibration) -> float:
    if cohort is Cohort.LECTURE:
        return cal.lecture_success_p
    return cal.non_lecture_success_p


def _plan_task(
    spec: StudentSpec,
    cal: Calibration,
    rng: random.Random,
    browser: _Browser,
    index: int,
    letter: str,
    force_success: bool,
) -> list[_Planned]:
    """Planned event sequence for one task slot, in order."""
    p_success = _success_probability(spec.cohort, cal)
    success = force_success or rng.random() < p_success
    ok_msg = _SUCCESS_MSGS[letter]
    plan = [_ide("open", letter, TASK_PROMPTS[letter])]

    if index == _CAUTIOUS_SLOT and Pattern.CAUTIOUS in spec.archetypes:
        pre = rng.randint(4, 6)
        for k in range(pre):
            if k == 1 and rng.random() < 0.5:
                plan.append(browser.copy(rng.choice(_COPY_SNIPPETS)))
            else:
                plan.append(browser.event())
        plan.append(_ide("compile", letter, ok_msg))
        plan.append(_ide("submit", letter))
        return plan

    if index == _TRY_AND_ERROR_SLOT and Pattern.TRY_AND_ERROR in spec.archetypes:
        for _ in range(rng.randint(2, 3)):
            plan.append(_ide("compile", letter, rng.choice(_ERROR_MSGS)))
        plan.append(_ide("compile", letter, ok_msg))
        plan.append(_ide("submit", letter))
        plan.append(browser.event())
        return plan

    if index == _TRY_AND_SEARCH_SLOT and Pattern.TRY_AND_SEARCH in spec.archetypes:
        error = rng.choice(_ERROR_MSGS)
        plan.append(_ide("compile", letter, error))
        plan.append(browser.copy(error))
        plan.append(browser.search(rng.choice(_SEARCH_QUERIES)))
        plan.append(browser.event("scroll"))
        plan.append(_ide("compile", letter, ok_msg))
        plan.append(_ide("submit", letter))
        return plan

    # Baseline flow: browse a little, compile once, submit on success,
    # browse a little more. Never recompile; never exceed 2 pre-compile
    # browser events.
    budget = rng.randint(1, 3)
    if spec.cohort is Cohort.NON_LECTURE:
        budget *= cal.non_lecture_browse_multiplier
    pre = rng.randint(0, min(2, budget))
    for _ in range(pre):
        plan.append(browser.event())
    plan.append(
        _ide("compile", letter, ok_msg if success else rng.choice(_ERROR_MSGS))
    )
    if success:
        plan.append(_ide("submit", letter))
    for _ in range(budget - pre):
        plan.append(browser.event())
    return plan


def _materialize(
    spec: StudentSpec, planned: list[_Planned]
) -> tuple[list[RawBrowsingRecord], list[RawProgrammingRecord]]:
    rng = random.Random(spec.seed ^ 0x5EED)
    web_rows = []
    ide_rows = []
    for ev in planned:
        if ev.stream == "ide":
            wall = SESSION_START + timedelta(seconds=ev.offset)
            ide_rows.append(
                RawProgrammingRecord(
                    time=wall.strftime("%Y-%m-%d %H:%M:%S"),
                    uid=spec.user_id,
                    class_id="cs101",
                    task_id=ev.task or "",
                    lang="scheme",
                    op=ev.action,
                    msg=ev.msg,
                )
            )
            continue
        doc_height = rng.randrange(1600, 6400, 100)
        scroll_y = rng.randrange(0, max(100, doc_height - 800), 10)
        web_rows.append(
            RawBrowsingRecord(
                user_id=spec.user_id,
                user_action=ev.action,
                date=_SESSION_START_MS + ev.offset * 1000,
                tab_url=ev.url,
                tab_title=ev.title,
                tab_body_text=ev.body,
                clipboard_copy=ev.copy_text,
                scroll_y_axis_speed=round(rng.uniform(0.4, 3.0), 2) if ev.scroll else None,
                scroll_visible_text=(ev.body or "")[:48] if ev.scroll else None,
                scroll_viewport_x=0 if ev.scroll else None,
                scroll_viewport_y=scroll_y if ev.scroll else None,
                scroll_x_rate=0.0 if ev.scroll else None,
                scroll_y_rate=round(scroll_y / doc_height, 3) if ev.scroll else None,
                viewport_width=1280,
                viewport_height=800,
                doc_width=1280,
                doc_height=doc_height,
            )
        )
    return web_rows, ide_rows


def generate_student(
    spec: StudentSpec, cal: Calibration = DEFAULT_CALIBRATION
) -> tuple[str, str]:
    """Returns (browsing log text, programming log text); same spec, same
    bytes."""
    rng = random.Random(spec.seed)
    browser = _Browser(rng)
    letters = TASK_LETTERS[: spec.task_count]
    planned: list[_Planned] = []

    cursor = 1
    if Pattern.TIME_MANAGEMENT in spec.archetypes:
        # Preview several tasks right at the session start, before anything
        # compiles: all of them sometimes, otherwise the threshold of 3.
        count = spec.task_count if rng.random() < 0.3 else 3
        for letter in letters[:count]:
            preview = _ide("open", letter, TASK_PROMPTS[letter])
            preview.offset = cursor
            planned.append(preview)
            cursor += rng.randint(2, 4)

    tail = 14 if Pattern.DOUBLE_CHECKING in spec.archetypes else 0
    force_success = set()
    if Pattern.DOUBLE_CHECKING in spec.archetypes:
        force_success = {0, 1}

    span_end = spec.session_seconds - tail
    slot_width = (span_end - cursor) // spec.task_count
    for i, letter in enumerate(letters):
        slot_start = cursor + i * slot_width
        plan = _plan_task(spec, cal, rng, browser, i, letter, i in force_success)
        for ev, offset in zip(
            plan, _spread(rng, slot_start, slot_start + slot_width, len(plan))
        ):
            ev.offset = offset
            planned.append(ev)

    if Pattern.DOUBLE_CHECKING in spec.archetypes:
        # Revisit the first two (already submitted) tasks at the very end.
        t = spec.session_seconds - tail + 1
        for letter in letters[:2]:
            for ev in (_ide("open", letter, TASK_PROMPTS[letter]), _ide("submit", letter)):
                ev.offset = t
                planned.append(ev)
                t += rng.randint(2, 3)

    web_rows, ide_rows = _materialize(spec, planned)
    return write_browsing_log(web_rows), write_programming_log(ide_rows)


def _derive_seeds(master_seed: int, user_id: str) -> tuple[int, int]:
    digest = hashlib.sha256(f"{master_seed}:{user_id}".encode()).digest()
    return (
        int.from_bytes(digest[:8], "big"),
        int.from_bytes(digest[8:16], "big"),
    )


def plan_cohort(spec: CohortSpec) -> list[StudentSpec]:
    """Per-student specs with seeds and archetypes derived from the master
    seed by stable hashing."""
    students = []
    roster = [(Cohort.LECTURE, f"L{i + 1:02d}") for i in range(spec.lecture_count)]
    roster += [
        (Cohort.NON_LECTURE, f"N{i + 1:02d}") for i in range(spec.non_lecture_count)
    ]
    for cohort, user_id in roster:
        event_seed, archetype_seed = _derive_seeds(spec.master_seed, user_id)
        arch_rng = random.Random(archetype_seed)
        archetypes = frozenset(
            p
            for p in _PATTERN_ORDER
            if arch_rng.random() < spec.archetype_mix.get(p, 0.0)
        )
        students.append(
            StudentSpec(
                user_id=user_id, cohort=cohort, archetypes=archetypes, seed=event_seed
            )
        )
    return students


def generate_cohort(spec: CohortSpec) -> dict[str, tuple[str, str]]:
    return {s.user_id: generate_student(s) for s in plan_cohort(spec)}


def cohort_manifest(spec: CohortSpec) -> dict:
    return {
        "masterSeed": spec.master_seed,
        "students": [
            {
                "userID": s.user_id,
                "cohort": s.cohort.value,
                "seed": s.seed,
                "archetypes": sorted(p.value for p in s.archetypes),
            }
            for s in plan_cohort(spec)
        ],
    }
