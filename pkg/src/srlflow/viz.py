"""Flowchart graph model and renderable artifacts (SVG, DOT, chart JSON).

A timeline becomes a horizontal Start -> event -> ... -> End chain. Emission
is deterministic byte-for-byte so outputs are golden-file testable. Shape
convention (the source material names only the terminals): terminals are
stadiums, compile results diamonds, submits rectangles, everything else a
rounded box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urlsplit
from xml.sax.saxutils import escape, quoteattr

from .errors import AllExcluded
from .fusion import COMPILE_KINDS, TAB_KINDS, ActionKind, Source, Timeline, UnifiedEvent
from .patterns import RatioReport

LABEL_DETAIL_MAX = 40


class FlowScope(str, Enum):
    FULL_TIMELINE = "full_timeline"
    SINGLE_TASK = "single_task"


class NodeCategory(str, Enum):
    BROWSE = "Browse"
    SEARCH = "Search"
    COPY = "Copy"
    COMPILE_OK = "CompileOk"
    COMPILE_ERR = "CompileErr"
    SUBMIT = "Submit"
    TERMINAL = "Terminal"
    OTHER = "Other"


class NodeShape(str, Enum):
    ROUNDED = "rounded"
    RECT = "rect"
    DIAMOND = "diamond"
    TERMINAL = "terminal"


_KIND_CATEGORY = {
    ActionKind.TAB_ACTIVATE: NodeCategory.BROWSE,
    ActionKind.TAB_UPDATE: NodeCategory.BROWSE,
    ActionKind.TAB_CREATE: NodeCategory.BROWSE,
    ActionKind.TAB_REMOVE: NodeCategory.BROWSE,
    ActionKind.SCROLL: NodeCategory.BROWSE,
    ActionKind.SEARCH_QUERY: NodeCategory.SEARCH,
    ActionKind.CLIPBOARD_COPY: NodeCategory.COPY,
    ActionKind.COMPILE_SUCCESS: NodeCategory.COMPILE_OK,
    ActionKind.COMPILE_ERROR: NodeCategory.COMPILE_ERR,
    ActionKind.COMPILE_UNKNOWN: NodeCategory.OTHER,
    ActionKind.SUBMIT: NodeCategory.SUBMIT,
    ActionKind.OTHER_BROWSER: NodeCategory.OTHER,
    ActionKind.OTHER_IDE: NodeCategory.OTHER,
}

_CATEGORY_SHAPE = {
    NodeCategory.BROWSE: NodeShape.ROUNDED,
    NodeCategory.SEARCH: NodeShape.ROUNDED,
    NodeCategory.COPY: NodeShape.ROUNDED,
    NodeCategory.COMPILE_OK: NodeShape.DIAMOND,
    NodeCategory.COMPILE_ERR: NodeShape.DIAMOND,
    NodeCategory.SUBMIT: NodeShape.RECT,
    NodeCategory.TERMINAL: NodeShape.TERMINAL,
    NodeCategory.OTHER: NodeShape.ROUNDED,
}

DEFAULT_CATEGORY_COLORS = {
    NodeCategory.BROWSE: "#3b82f6",
    NodeCategory.SEARCH: "#1d4ed8",
    NodeCategory.COPY: "#f59e0b",
    NodeCategory.COMPILE_OK: "#22c55e",
    NodeCategory.COMPILE_ERR: "#ef4444",
    NodeCategory.SUBMIT: "#8b5cf6",
    NodeCategory.TERMINAL: "#9ca3af",
    NodeCategory.OTHER: "#6b7280",
}


@dataclass(frozen=True)
class FlowNode:
    index: int
    label: str
    category: NodeCategory
    color: str
    shape: NodeShape
    hyperlink: str | None = None
    timestamp: int | None = None


@dataclass(frozen=True)
class FlowGraph:
    nodes: tuple[FlowNode, ...]
    edges: tuple[tuple[int, int], ...]
    scope: FlowScope
    user_id: str
    task_id: str | None = None


@dataclass(frozen=True)
class StyleConfig:
    pitch: int = 160
    margin: int = 40
    node_width: int = 120
    node_height: int = 48
    font_size: int = 12
    category_colors: dict[NodeCategory, str] = field(
        default_factory=lambda: dict(DEFAULT_CATEGORY_COLORS)
    )


DEFAULT_STYLE = StyleConfig()


def _truncate(text: str) -> str:
    if len(text) > LABEL_DETAIL_MAX:
        return text[:LABEL_DETAIL_MAX] + "…"
    return text


def _node_detail(ev: UnifiedEvent) -> str | None:
    if ev.source is Source.BROWSER:
        if ev.tab_url:
            return urlsplit(ev.tab_url).netloc or ev.tab_url
        if ev.action is ActionKind.CLIPBOARD_COPY and ev.clipboard_copy:
            return ev.clipboard_copy
        return None
    if ev.action in COMPILE_KINDS:
        return ev.msg
    return ev.task_id


def node_label(ev: UnifiedEvent) -> str:
    detail = _node_detail(ev)
    if detail:
        return f"{ev.action.value}: {_truncate(detail)}"
    return ev.action.value


def build_flowgraph(
    events: list[UnifiedEvent],
    scope: FlowScope = FlowScope.FULL_TIMELINE,
    user_id: str | None = None,
    task_id: str | None = None,
    style: StyleConfig = DEFAULT_STYLE,
) -> FlowGraph:
    """Start + one node per event + End, chained left to right."""
    colors = style.category_colors
    if user_id is None:
        user_id = events[0].user_id if events else ""

    def terminal(index: int, label: str) -> FlowNode:
        return FlowNode(
            index=index,
            label=label,
            category=NodeCategory.TERMINAL,
            color=colors[NodeCategory.TERMINAL],
            shape=NodeShape.TERMINAL,
        )

    nodes = [terminal(0, "Start")]
    for i, ev in enumerate(events, start=1):
        category = _KIND_CATEGORY[ev.action]
        hyperlink = ev.tab_url if ev.action in TAB_KINDS and ev.tab_url else None
        nodes.append(
            FlowNode(
                index=i,
                label=node_label(ev),
                category=category,
                color=colors[category],
                shape=_CATEGORY_SHAPE[category],
                hyperlink=hyperlink,
                timestamp=ev.timestamp,
            )
        )
    nodes.append(terminal(len(nodes), "End"))
    edges = tuple((i, i + 1) for i in range(len(nodes) - 1))
    return FlowGraph(
        nodes=tuple(nodes), edges=edges, scope=scope, user_id=user_id, task_id=task_id
    )


def build_task_flowgraph(
    tl: Timeline, task_id: str, style: StyleConfig = DEFAULT_STYLE
) -> FlowGraph:
    events = [ev for ev in tl.events if ev.task_id == task_id]
    return build_flowgraph(
        events,
        scope=FlowScope.SINGLE_TASK,
        user_id=tl.user_id,
        task_id=task_id,
        style=style,
    )


# --- SVG emission ---


def _svg_shape(node: FlowNode, x: int, y: int, style: StyleConfig) -> str:
    w, h = style.node_width, style.node_height
    common = f'fill={quoteattr(node.color)} fill-opacity="0.9" stroke="#374151"'
    if node.shape is NodeShape.DIAMOND:
        cx, cy = x + w // 2, y + h // 2
        points = f"{cx},{y} {x + w},{cy} {cx},{y + h} {x},{cy}"
        return f'<polygon points="{points}" {common}/>'
    if node.shape is NodeShape.TERMINAL:
        rx = h // 2
    elif node.shape is NodeShape.ROUNDED:
        rx = 8
    else:
        rx = 0
    return f'<rect x="{x}" y="{y}" width="{w}" height="{h}" rx="{rx}" {common}/>'


def render_svg(g: FlowGraph, style: StyleConfig = DEFAULT_STYLE) -> str:
    """Standalone SVG 1.1. Width grows linearly with the node count so the
    chain stays readable by horizontal scrolling; hyperlinked nodes are
    wrapped in anchor elements."""
    n = len(g.nodes)
    width = style.margin + n * style.pitch
    height = 2 * style.margin + style.node_height
    y = style.margin
    cy = y + style.node_height // 2
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
        f'version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 8 8" refX="8" refY="4" markerWidth="8" '
        'markerHeight="8" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#374151"/></marker>',
        "</defs>",
    ]
    for node in g.nodes:
        x = style.margin + node.index * style.pitch
        shape = _svg_shape(node, x, y, style)
        text = (
            f'<text x="{x + style.node_width // 2}" y="{cy + style.font_size // 3}" '
            f'font-family="sans-serif" font-size="{style.font_size}" fill="#111827" '
            f'text-anchor="middle">{escape(node.label)}</text>'
        )
        group = f'<g data-index="{node.index}" data-category={quoteattr(node.category.value)}>{shape}{text}</g>'
        if node.hyperlink:
            href = quoteattr(node.hyperlink)
            group = f"<a xlink:href={href} href={href} target=\"_blank\">{group}</a>"
        parts.append(group)
    for a, b in g.edges:
        x1 = style.margin + a * style.pitch + style.node_width
        x2 = style.margin + b * style.pitch
        parts.append(
            f'<line x1="{x1}" y1="{cy}" x2="{x2}" y2="{cy}" stroke="#374151" '
            'stroke-width="1.5" marker-end="url(#arrow)"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# --- DOT emission ---

_DOT_SHAPE = {
    NodeShape.ROUNDED: ("box", "rounded,filled"),
    NodeShape.RECT: ("box", "filled"),
    NodeShape.DIAMOND: ("diamond", "filled"),
    NodeShape.TERMINAL: ("oval", "filled"),
}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(g: FlowGraph) -> str:
    lines = ["digraph flow {", "  rankdir=LR;"]
    for node in g.nodes:
        shape, dot_style = _DOT_SHAPE[node.shape]
        attrs = (
            f"label={_dot_quote(node.label)}, shape={shape}, "
            f'style="{dot_style}", fillcolor={_dot_quote(node.color)}'
        )
        if node.hyperlink:
            attrs += f", URL={_dot_quote(node.hyperlink)}"
        lines.append(f"  n{node.index} [{attrs}];")
    for a, b in g.edges:
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- pie-chart datasets ---

_CHART_LABEL_COLORS = {
    "success": "#22c55e",
    "error": "#ef4444",
    "unknown": "#9ca3af",
    ActionKind.TAB_ACTIVATE.value: "#3b82f6",
    ActionKind.TAB_UPDATE.value: "#60a5fa",
    ActionKind.TAB_CREATE.value: "#2563eb",
    ActionKind.TAB_REMOVE.value: "#1e40af",
    ActionKind.SCROLL.value: "#93c5fd",
    ActionKind.SEARCH_QUERY.value: "#1d4ed8",
    ActionKind.CLIPBOARD_COPY.value: "#f59e0b",
    ActionKind.COMPILE_SUCCESS.value: "#22c55e",
    ActionKind.COMPILE_ERROR.value: "#ef4444",
    ActionKind.COMPILE_UNKNOWN.value: "#9ca3af",
    ActionKind.SUBMIT.value: "#8b5cf6",
    ActionKind.OTHER_BROWSER.value: "#6b7280",
    ActionKind.OTHER_IDE.value: "#4b5563",
}

_FALLBACK_PALETTE = ("#0ea5e9", "#14b8a6", "#eab308", "#f97316", "#ec4899", "#a855f7")


@dataclass(frozen=True)
class ChartDataset:
    labels: tuple[str, ...]
    values: tuple[int, ...]
    colors: tuple[str, ...]
    excluded: frozenset[str]


def chart_data(r: RatioReport, excluded: set[str] | frozenset[str] = frozenset()) -> ChartDataset:
    """Raw counts for the non-excluded categories; the consumer normalizes.
    Ordering: descending count, ties broken lexically."""
    unknown = set(excluded) - set(r.counts)
    if unknown:
        raise ValueError(f"unknown categories: {sorted(unknown)}")
    remaining = {k: v for k, v in r.counts.items() if k not in excluded}
    if r.counts and not remaining:
        raise AllExcluded(sorted(excluded))
    ordered = sorted(remaining.items(), key=lambda kv: (-kv[1], kv[0]))
    labels = tuple(k for k, _ in ordered)
    values = tuple(v for _, v in ordered)
    colors = tuple(
        _CHART_LABEL_COLORS.get(label, _FALLBACK_PALETTE[i % len(_FALLBACK_PALETTE)])
        for i, label in enumerate(labels)
    )
    return ChartDataset(
        labels=labels, values=values, colors=colors, excluded=frozenset(excluded)
    )


def chart_dataset_to_dict(ds: ChartDataset) -> dict:
    return {
        "labels": list(ds.labels),
        "values": list(ds.values),
        "colors": list(ds.colors),
        "excluded": sorted(ds.excluded),
    }
