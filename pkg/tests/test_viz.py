from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import golden_events, make_event, make_timeline
from srlflow.errors import AllExcluded
from srlflow.fusion import ActionKind
from srlflow.patterns import RatioReport, RatioScope, browsing_action_ratios
from srlflow.viz import (
    FlowScope,
    NodeCategory,
    StyleConfig,
    build_flowgraph,
    build_task_flowgraph,
    chart_data,
    chart_dataset_to_dict,
    render_dot,
    render_svg,
)

GOLDEN_DIR = Path(__file__).parent / "golden"

SVG_NS = "{http://www.w3.org/2000/svg}"


def test_node_and_edge_arithmetic():
    events = [make_event(i * 1000, ActionKind.SCROLL) for i in range(3)]
    g = build_flowgraph(events)
    assert len(g.nodes) == 5
    assert len(g.edges) == 4
    assert g.nodes[0].label == "Start" and g.nodes[-1].label == "End"
    assert g.edges == tuple((i, i + 1) for i in range(4))


def test_empty_graph_is_start_to_end():
    g = build_flowgraph([])
    assert len(g.nodes) == 2
    assert len(g.edges) == 1
    assert all(n.category is NodeCategory.TERMINAL for n in g.nodes)


def test_tab_event_gets_hyperlink_scroll_does_not():
    events = [
        make_event(0, ActionKind.TAB_UPDATE, url="https://a.test/x"),
        make_event(1000, ActionKind.SCROLL, url="https://a.test/x"),
    ]
    g = build_flowgraph(events)
    assert g.nodes[1].hyperlink == "https://a.test/x"
    assert g.nodes[2].hyperlink is None


def test_category_mapping_and_colors():
    events = [
        make_event(0, ActionKind.COMPILE_ERROR, task="A", msg="x: unbound identifier"),
        make_event(1, ActionKind.COMPILE_SUCCESS, task="A", msg="ok"),
        make_event(2, ActionKind.SUBMIT, task="A"),
        make_event(3, ActionKind.SEARCH_QUERY, url="https://www.google.com/search?q=x"),
    ]
    g = build_flowgraph(events)
    categories = [n.category for n in g.nodes[1:-1]]
    assert categories == [
        NodeCategory.COMPILE_ERR,
        NodeCategory.COMPILE_OK,
        NodeCategory.SUBMIT,
        NodeCategory.SEARCH,
    ]
    assert g.nodes[1].color == "#ef4444"
    assert g.nodes[2].color == "#22c55e"
    assert g.nodes[3].color == "#8b5cf6"


def test_long_labels_truncate_with_ellipsis():
    msg = "x" * 100
    g = build_flowgraph([make_event(0, ActionKind.COMPILE_ERROR, task="A", msg=msg)])
    label = g.nodes[1].label
    assert label == "CompileError: " + "x" * 40 + "…"


def test_task_scoped_graph_filters_events():
    events = [
        make_event(0, ActionKind.OTHER_IDE, task="A"),
        make_event(1000, ActionKind.OTHER_IDE, task="B"),
        make_event(2000, ActionKind.SUBMIT, task="A"),
    ]
    tl = make_timeline(events)
    g = build_task_flowgraph(tl, "A")
    assert g.scope is FlowScope.SINGLE_TASK
    assert g.task_id == "A"
    assert len(g.nodes) == 4  # Start + 2 + End


def test_svg_width_formula():
    events = [make_event(0, ActionKind.SCROLL), make_event(1000, ActionKind.SCROLL)]
    svg = render_svg(build_flowgraph(events))
    root = ET.fromstring(svg)
    assert root.get("width") == "680"  # margin 40 + 4 nodes x pitch 160


def test_svg_is_wellformed_with_one_anchor_per_tab_event():
    g = build_flowgraph(golden_events())
    svg = render_svg(g)
    root = ET.fromstring(svg)
    assert root.tag == f"{SVG_NS}svg"
    anchors = root.findall(f".//{SVG_NS}a")
    assert len(anchors) == 2  # TabUpdate + SearchQuery carry URLs
    hrefs = {a.get("href") for a in anchors}
    assert hrefs == {
        "https://docs.racket-lang.org/guide/define.html",
        "https://www.google.com/search?q=racket+define",
    }


def test_svg_honors_style_overrides():
    style = StyleConfig(pitch=100, margin=10)
    svg = render_svg(build_flowgraph([], style=style), style)
    assert ET.fromstring(svg).get("width") == "210"


def test_renderers_are_deterministic():
    g = build_flowgraph(golden_events())
    assert render_svg(g) == render_svg(g)
    assert render_dot(g) == render_dot(g)


def test_golden_svg_bytes():
    svg = render_svg(build_flowgraph(golden_events()))
    assert svg == (GOLDEN_DIR / "flow.svg").read_text(encoding="utf-8")


def test_golden_dot_bytes():
    dot = render_dot(build_flowgraph(golden_events()))
    assert dot == (GOLDEN_DIR / "flow.dot").read_text(encoding="utf-8")


def test_dot_statement_counts_and_escaping():
    g = build_flowgraph(golden_events())
    dot = render_dot(g)
    lines = dot.splitlines()
    node_lines = [l for l in lines if "[label=" in l]
    edge_lines = [l for l in lines if "->" in l]
    assert len(node_lines) == len(g.nodes) == 8
    assert len(edge_lines) == len(g.edges) == 7
    assert lines[0] == "digraph flow {"
    assert "rankdir=LR;" in lines[1]
    assert '\\"PI\\"' in dot  # quotes in labels escaped per DOT rules


def test_chart_data_ordering_and_exclusion():
    report = RatioReport(
        scope=RatioScope.COMPILE_OUTCOMES,
        counts={"success": 3, "error": 1},
        ratios={"success": 0.75, "error": 0.25},
    )
    ds = chart_data(report)
    assert ds.labels == ("success", "error")
    assert ds.values == (3, 1)
    ds = chart_data(report, {"error"})
    assert ds.labels == ("success",)
    assert ds.values == (3,)
    assert ds.excluded == frozenset({"error"})
    with pytest.raises(AllExcluded):
        chart_data(report, {"success", "error"})
    with pytest.raises(ValueError):
        chart_data(report, {"nosuch"})


def test_chart_data_tie_breaks_lexically():
    report = RatioReport(
        scope=RatioScope.BROWSING_ACTIONS,
        counts={"Scroll": 2, "ClipboardCopy": 2, "TabUpdate": 5},
        ratios={},
    )
    assert chart_data(report).labels == ("TabUpdate", "ClipboardCopy", "Scroll")


def test_chart_dataset_serialization():
    report = RatioReport(
        scope=RatioScope.COMPILE_OUTCOMES, counts={"success": 2}, ratios={"success": 1.0}
    )
    data = chart_dataset_to_dict(chart_data(report))
    assert data == {
        "labels": ["success"],
        "values": [2],
        "colors": ["#22c55e"],
        "excluded": [],
    }


@given(
    st.dictionaries(
        st.sampled_from(["a", "b", "c", "d"]), st.integers(1, 50), min_size=1
    )
)
def test_chart_data_preserves_totals(counts):
    report = RatioReport(scope=RatioScope.ALL_ACTIONS, counts=counts, ratios={})
    ds = chart_data(report)
    assert sum(ds.values) == sum(counts.values())
    assert len(ds.labels) == len(ds.values) == len(ds.colors)
    assert list(ds.values) == sorted(ds.values, reverse=True)


@given(st.lists(st.sampled_from([ActionKind.SCROLL, ActionKind.TAB_UPDATE]), max_size=30))
def test_node_count_invariant(kinds):
    events = [
        make_event(i * 1000, kind, url="https://a.test/" if kind is ActionKind.TAB_UPDATE else None)
        for i, kind in enumerate(kinds)
    ]
    g = build_flowgraph(events)
    assert len(g.nodes) == len(events) + 2
    svg = render_svg(g)
    root = ET.fromstring(svg)
    tab_count = sum(1 for k in kinds if k is ActionKind.TAB_UPDATE)
    assert len(root.findall(f".//{SVG_NS}a")) == tab_count
