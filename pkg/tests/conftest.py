from __future__ import annotations

from srlflow.fusion import ActionKind, Source, Timeline, UnifiedEvent, attribute_tasks

IDE_KINDS = {
    ActionKind.COMPILE_SUCCESS,
    ActionKind.COMPILE_ERROR,
    ActionKind.COMPILE_UNKNOWN,
    ActionKind.SUBMIT,
    ActionKind.OTHER_IDE,
}


def make_event(
    ts: int,
    kind: ActionKind,
    user: str = "U1",
    task: str | None = None,
    url: str | None = None,
    copy: str | None = None,
    msg: str | None = None,
) -> UnifiedEvent:
    """Build a unified event directly, bypassing ingest and shaping."""
    source = Source.IDE if kind in IDE_KINDS else Source.BROWSER
    return UnifiedEvent(
        timestamp=ts,
        user_id=user,
        action=kind,
        raw_action=kind.value.lower(),
        source=source,
        task_id=task,
        tab_url=url,
        clipboard_copy=copy,
        msg=msg,
    )


def make_timeline(events: list[UnifiedEvent], attributed: bool = True) -> Timeline:
    """Timeline over pre-sorted events; attribution optional."""
    tl = Timeline(
        user_id=events[0].user_id if events else "U1",
        events=tuple(events),
        t_start=events[0].timestamp if events else None,
        t_end=events[-1].timestamp if events else None,
    )
    return attribute_tasks(tl) if attributed else tl


def golden_events() -> list[UnifiedEvent]:
    """Fixed event sequence behind the golden SVG/DOT artifacts. Exercises
    hyperlinks, every shape family, and label escaping."""
    return [
        make_event(1682902800000, ActionKind.TAB_UPDATE,
                   url="https://docs.racket-lang.org/guide/define.html"),
        make_event(1682902805000, ActionKind.SEARCH_QUERY,
                   url="https://www.google.com/search?q=racket+define"),
        make_event(1682902810000, ActionKind.CLIPBOARD_COPY,
                   copy="(define PI 3.14)"),
        make_event(1682902815000, ActionKind.COMPILE_ERROR, task="A",
                   msg='PI: unbound identifier in: "PI" <here>'),
        make_event(1682902820000, ActionKind.COMPILE_SUCCESS, task="A", msg="3.14"),
        make_event(1682902825000, ActionKind.SUBMIT, task="A"),
    ]
