import { ApiClient, ApiError, SequenceGate } from "./api.js";
import type { ChartScope, UserSummary } from "./api.js";
import {
  CHART_SCOPES,
  ViewState,
  encodeViewState,
  parseViewState,
  selectTask,
  selectUser,
  setScroll,
  toggleExclusion,
} from "./state.js";
import {
  CohortRow,
  renderBanner,
  renderCharts,
  renderCohortTable,
  renderFlowError,
  renderFlowPane,
  renderStudentShell,
  renderTaskSelector,
} from "./views.js";

const api = new ApiClient();
const root = document.getElementById("app") as HTMLElement;
const cohortGate = new SequenceGate();
const studentGate = new SequenceGate();
const chartGates: Record<ChartScope, SequenceGate> = {
  browsing: new SequenceGate(),
  compile: new SequenceGate(),
  all: new SequenceGate(),
};

let state: ViewState = parseViewState(location.search);
let visibleLabels: Record<ChartScope, string[]> = { browsing: [], compile: [], all: [] };

function pushState(next: ViewState, replace = false): void {
  state = next;
  const query = encodeViewState(state);
  const url = query ? `?${query}` : location.pathname;
  if (replace) {
    history.replaceState(null, "", url);
  } else {
    history.pushState(null, "", url);
  }
}

function banner(message: string): void {
  root.innerHTML = renderBanner(message);
}

async function compileSuccessRatio(userId: string): Promise<number | null> {
  try {
    const ds = await api.ratios(userId, "compile", []);
    let ok = 0;
    let bad = 0;
    ds.labels.forEach((label, i) => {
      if (label === "success") ok = ds.values[i] ?? 0;
      if (label === "error") bad = ds.values[i] ?? 0;
    });
    return ok + bad > 0 ? ok / (ok + bad) : null;
  } catch {
    return null;
  }
}

async function showCohort(): Promise<void> {
  const stamp = cohortGate.next();
  let users: UserSummary[];
  try {
    users = await api.users();
  } catch (err) {
    if (cohortGate.isCurrent(stamp)) banner(describe(err));
    return;
  }
  const rows: CohortRow[] = await Promise.all(
    users.map(async (user) => ({
      user,
      compileSuccess: await compileSuccessRatio(user.userID),
    })),
  );
  if (!cohortGate.isCurrent(stamp)) return;
  root.innerHTML = `<h2>Cohort</h2>` + renderCohortTable(rows);
}

async function loadFlowchart(userId: string, task?: string): Promise<void> {
  const slot = document.getElementById("flow-slot");
  if (!slot) return;
  const stamp = studentGate.next();
  try {
    const svg = await api.flowchartSvg(userId, task);
    if (!studentGate.isCurrent(stamp)) return;
    slot.innerHTML = renderFlowPane(svg);
    const pane = document.getElementById("flow-pane");
    if (pane) {
      pane.scrollLeft = state.scrollPosition;
      pane.addEventListener("scroll", onPaneScroll, { passive: true });
    }
  } catch (err) {
    if (!studentGate.isCurrent(stamp)) return;
    slot.innerHTML = renderFlowError(describe(err));
  }
}

async function loadCharts(userId: string): Promise<void> {
  const slot = document.getElementById("charts-slot");
  if (!slot) return;
  const stamps = CHART_SCOPES.map((scope) => chartGates[scope].next());
  try {
    const [browsing, compile, all] = await Promise.all(
      CHART_SCOPES.map((scope) => api.ratios(userId, scope, state.excluded[scope])),
    );
    if (!CHART_SCOPES.every((scope, i) => chartGates[scope].isCurrent(stamps[i] ?? -1))) {
      return;
    }
    visibleLabels = {
      browsing: browsing!.labels,
      compile: compile!.labels,
      all: all!.labels,
    };
    slot.innerHTML = renderCharts({ browsing: browsing!, compile: compile!, all: all! });
  } catch (err) {
    slot.innerHTML = renderBanner(describe(err));
  }
}

async function showStudent(userId: string): Promise<void> {
  let tasks: string[];
  try {
    const timeline = await api.timeline(userId);
    tasks = [...new Set(timeline.events.map((e) => e.taskID).filter((t): t is string => t !== null))];
  } catch (err) {
    banner(describe(err));
    return;
  }
  root.innerHTML = renderStudentShell(userId, renderTaskSelector(tasks, state.selectedTask));
  await Promise.all([loadFlowchart(userId, state.selectedTask), loadCharts(userId)]);
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `Service error (${err.status}): ${err.detail}`;
  }
  return `Cannot reach the analytics service: ${String(err)}`;
}

function render(): void {
  if (state.selectedUser !== undefined) {
    void showStudent(state.selectedUser);
  } else {
    void showCohort();
  }
}

let scrollTimer: ReturnType<typeof setTimeout> | undefined;
function onPaneScroll(ev: Event): void {
  const pane = ev.target as HTMLElement;
  clearTimeout(scrollTimer);
  scrollTimer = setTimeout(() => {
    pushState(setScroll(state, pane.scrollLeft), true);
  }, 150);
}

root.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement;

  const row = target.closest("tr[data-user]");
  if (row instanceof HTMLElement && row.dataset.user) {
    pushState(selectUser(state, row.dataset.user));
    render();
    return;
  }

  if (target.id === "back") {
    pushState(selectUser(state, undefined));
    render();
    return;
  }

  const restore = target.closest("button[data-restore]");
  if (restore instanceof HTMLElement && restore.dataset.scope) {
    const scope = restore.dataset.scope as ChartScope;
    const next = { ...state, excluded: { ...state.excluded, [scope]: new Set<string>() } };
    pushState(next);
    if (state.selectedUser) void loadCharts(state.selectedUser);
    return;
  }

  const slice = target.closest("[data-scope][data-label]");
  if (slice instanceof HTMLElement && slice.dataset.scope && slice.dataset.label) {
    const scope = slice.dataset.scope as ChartScope;
    const result = toggleExclusion(state, scope, slice.dataset.label, visibleLabels[scope]);
    if (result.refused) {
      slice.setAttribute("title", result.refused);
      return;
    }
    pushState(result.state);
    if (state.selectedUser) void loadCharts(state.selectedUser);
  }
});

root.addEventListener("change", (ev) => {
  const target = ev.target as HTMLSelectElement;
  if (target.id === "task-select" && state.selectedUser) {
    pushState(selectTask(state, target.value || undefined));
    void loadFlowchart(state.selectedUser, state.selectedTask);
  }
});

window.addEventListener("popstate", () => {
  state = parseViewState(location.search);
  render();
});

render();
