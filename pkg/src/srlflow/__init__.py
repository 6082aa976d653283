"""srlflow: fuse browsing + IDE activity logs into per-student timelines,
mine self-regulated-learning workflow patterns, and emit flowchart and
ratio-chart artifacts via a CLI and an HTTP query API."""

from .errors import (
    AllExcluded,
    InvalidSpec,
    MalformedDelimitedText,
    MissingRequiredColumn,
    MixedUsers,
    NegativeTimestamp,
    SrlflowError,
    UnparseableTimestamp,
)
from .fusion import (
    ActionKind,
    FusionConfig,
    Source,
    Timeline,
    UnifiedEvent,
    attribute_tasks,
    build_timeline,
    classify_action,
    classify_compile_outcome,
    fuse,
    normalize_timestamp,
    parse_calendar_string,
    timeline_from_dict,
    timeline_to_dict,
)
from .ingest import (
    BROWSING_COLUMNS,
    PROGRAMMING_COLUMNS,
    RawBrowsingRecord,
    RawProgrammingRecord,
    SchemaReport,
    parse_browsing_log,
    parse_programming_log,
    validate_schema,
    write_browsing_log,
    write_programming_log,
)
from .patterns import (
    DEFAULT_DETECTOR_CONFIG,
    DetectorConfig,
    Pattern,
    PatternFinding,
    RatioReport,
    StudentProfile,
    TaskSession,
    all_action_ratios,
    browsing_action_ratios,
    compile_outcome_ratios,
    detect_cautious,
    detect_double_checking,
    detect_time_management,
    detect_try_and_error,
    detect_try_and_search,
    finding_to_dict,
    profile_student,
    profile_to_dict,
    renormalize_excluding,
    sessionize,
)
from .synth import (
    Cohort,
    CohortSpec,
    StudentSpec,
    cohort_manifest,
    generate_cohort,
    generate_student,
)
from .viz import (
    ChartDataset,
    FlowGraph,
    FlowNode,
    FlowScope,
    StyleConfig,
    build_flowgraph,
    build_task_flowgraph,
    chart_data,
    render_dot,
    render_svg,
)

__version__ = "0.1.0"
