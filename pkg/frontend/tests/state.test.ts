import { describe, expect, it } from "vitest";

import {
  CHART_SCOPES,
  ViewState,
  emptyState,
  encodeViewState,
  parseViewState,
  selectTask,
  selectUser,
  setScroll,
  toggleExclusion,
} from "../src/state.js";

function roundTrip(state: ViewState): ViewState {
  return parseViewState(encodeViewState(state));
}

function expectSameState(a: ViewState, b: ViewState): void {
  expect(a.selectedUser).toBe(b.selectedUser);
  expect(a.selectedTask).toBe(b.selectedTask);
  expect(a.scrollPosition).toBe(b.scrollPosition);
  for (const scope of CHART_SCOPES) {
    expect([...a.excluded[scope]].sort()).toEqual([...b.excluded[scope]].sort());
  }
}

describe("view state URL round-trip", () => {
  it("keeps the empty state empty", () => {
    expect(encodeViewState(emptyState())).toBe("");
    expectSameState(roundTrip(emptyState()), emptyState());
  });

  it("round-trips a fully populated state", () => {
    const state = emptyState();
    state.selectedUser = "N07";
    state.selectedTask = "C";
    state.excluded.browsing = new Set(["Scroll", "TabUpdate"]);
    state.excluded.compile = new Set(["error"]);
    state.scrollPosition = 420;
    expectSameState(roundTrip(state), state);
  });

  it("survives separator and unicode characters in ids", () => {
    const state = emptyState();
    state.selectedUser = "st&dent=1?";
    state.selectedTask = "タスクA";
    expectSameState(roundTrip(state), state);
  });

  it("round-trips every single-field variation", () => {
    const variants: ViewState[] = [];
    for (const user of [undefined, "L01"]) {
      for (const task of [undefined, "A"]) {
        for (const scroll of [0, 17]) {
          const s = emptyState();
          if (user !== undefined) s.selectedUser = user;
          if (task !== undefined) s.selectedTask = task;
          s.scrollPosition = scroll;
          s.excluded.all = new Set(scroll ? ["Submit"] : []);
          variants.push(s);
        }
      }
    }
    for (const v of variants) {
      expectSameState(roundTrip(v), v);
    }
  });

  it("ignores junk query parameters and bad scroll values", () => {
    const state = parseViewState("?mystery=1&scroll=banana");
    expectSameState(state, emptyState());
    expect(parseViewState("?scroll=-5").scrollPosition).toBe(0);
  });
});

describe("click-to-exclude", () => {
  it("adds then removes a label", () => {
    const labels = ["success", "error"];
    const added = toggleExclusion(emptyState(), "compile", "error", labels);
    expect(added.refused).toBeUndefined();
    expect([...added.state.excluded.compile]).toEqual(["error"]);

    const removed = toggleExclusion(added.state, "compile", "error", ["success"]);
    expect(removed.refused).toBeUndefined();
    expect(removed.state.excluded.compile.size).toBe(0);
  });

  it("refuses to remove the last visible slice", () => {
    const one = toggleExclusion(emptyState(), "compile", "success", ["success"]);
    expect(one.refused).toBeTruthy();
    expect(one.state.excluded.compile.size).toBe(0);
  });

  it("never mutates the input state", () => {
    const before = emptyState();
    toggleExclusion(before, "all", "Scroll", ["Scroll", "Submit"]);
    expect(before.excluded.all.size).toBe(0);
  });

  it("scopes are independent", () => {
    const result = toggleExclusion(emptyState(), "browsing", "Scroll", ["Scroll", "TabUpdate"]);
    expect(result.state.excluded.compile.size).toBe(0);
    expect(result.state.excluded.all.size).toBe(0);
  });
});

describe("navigation transitions", () => {
  it("selecting a user resets per-student view state", () => {
    let state = emptyState();
    state.selectedTask = "B";
    state.excluded.all = new Set(["Scroll"]);
    state.scrollPosition = 99;
    state = selectUser(state, "L01");
    expect(state.selectedUser).toBe("L01");
    expect(state.selectedTask).toBeUndefined();
    expect(state.excluded.all.size).toBe(0);
    expect(state.scrollPosition).toBe(0);
  });

  it("clearing the user returns to the cohort view", () => {
    const state = selectUser(selectUser(emptyState(), "L01"), undefined);
    expect(state.selectedUser).toBeUndefined();
  });

  it("task switch resets scroll but keeps exclusions", () => {
    let state = selectUser(emptyState(), "L01");
    state.excluded.browsing = new Set(["Scroll"]);
    state = setScroll(state, 300);
    state = selectTask(state, "B");
    expect(state.selectedTask).toBe("B");
    expect(state.scrollPosition).toBe(0);
    expect([...state.excluded.browsing]).toEqual(["Scroll"]);
  });
});
