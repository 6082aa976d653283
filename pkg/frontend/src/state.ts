// View state and its URL encoding. Deep links reproduce the exact view:
// parseViewState(encodeViewState(s)) === s for every reachable state.

import type { ChartScope } from "./api.js";

export const CHART_SCOPES: ChartScope[] = ["browsing", "compile", "all"];

export interface ViewState {
  selectedUser?: string;
  selectedTask?: string;
  excluded: Record<ChartScope, Set<string>>;
  scrollPosition: number;
}

export function emptyState(): ViewState {
  return {
    excluded: { browsing: new Set(), compile: new Set(), all: new Set() },
    scrollPosition: 0,
  };
}

const EXCLUDE_PARAMS: Record<ChartScope, string> = {
  browsing: "xb",
  compile: "xc",
  all: "xa",
};

export function encodeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.selectedUser !== undefined) {
    params.set("user", state.selectedUser);
  }
  if (state.selectedTask !== undefined) {
    params.set("task", state.selectedTask);
  }
  for (const scope of CHART_SCOPES) {
    const labels = [...state.excluded[scope]].sort();
    if (labels.length) {
      params.set(EXCLUDE_PARAMS[scope], labels.join(","));
    }
  }
  if (state.scrollPosition > 0) {
    params.set("scroll", String(Math.round(state.scrollPosition)));
  }
  return params.toString();
}

export function parseViewState(query: string): ViewState {
  const params = new URLSearchParams(query);
  const state = emptyState();
  const user = params.get("user");
  if (user !== null) {
    state.selectedUser = user;
  }
  const task = params.get("task");
  if (task !== null) {
    state.selectedTask = task;
  }
  for (const scope of CHART_SCOPES) {
    const raw = params.get(EXCLUDE_PARAMS[scope]);
    if (raw) {
      state.excluded[scope] = new Set(raw.split(",").filter((s) => s.length));
    }
  }
  const scroll = Number(params.get("scroll") ?? "0");
  state.scrollPosition = Number.isFinite(scroll) && scroll > 0 ? scroll : 0;
  return state;
}

function cloneState(state: ViewState): ViewState {
  return {
    ...state,
    excluded: {
      browsing: new Set(state.excluded.browsing),
      compile: new Set(state.excluded.compile),
      all: new Set(state.excluded.all),
    },
  };
}

export interface ToggleResult {
  state: ViewState;
  // set when the click was refused so the view can show a tooltip
  refused?: string;
}

// Click-to-exclude with the client-side mirror of the server's
// "every category excluded" error: the last visible slice is unremovable.
export function toggleExclusion(
  state: ViewState,
  scope: ChartScope,
  label: string,
  visibleLabels: string[],
): ToggleResult {
  const next = cloneState(state);
  if (next.excluded[scope].has(label)) {
    next.excluded[scope].delete(label);
    return { state: next };
  }
  if (visibleLabels.length <= 1) {
    return { state, refused: "the last slice cannot be removed" };
  }
  next.excluded[scope].add(label);
  return { state: next };
}

export function selectUser(state: ViewState, userId?: string): ViewState {
  const next = cloneState(state);
  next.selectedUser = userId;
  // task, exclusions, and scroll are per-student views
  delete next.selectedTask;
  next.excluded = emptyState().excluded;
  next.scrollPosition = 0;
  if (userId === undefined) {
    delete next.selectedUser;
  }
  return next;
}

export function selectTask(state: ViewState, task?: string): ViewState {
  const next = cloneState(state);
  if (task === undefined) {
    delete next.selectedTask;
  } else {
    next.selectedTask = task;
  }
  next.scrollPosition = 0;
  return next;
}

export function setScroll(state: ViewState, px: number): ViewState {
  const next = cloneState(state);
  next.scrollPosition = px > 0 ? px : 0;
  return next;
}
