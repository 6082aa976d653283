// HTML fragments for the two screens. Pure string builders so they can
// be tested without a DOM; main.ts owns insertion and event wiring.

import type { ChartDataset, UserSummary } from "./api.js";
import { renderPieChart } from "./charts.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderBanner(message: string): string {
  return `<div class="banner" role="alert">${escapeHtml(message)}</div>`;
}

export interface CohortRow {
  user: UserSummary;
  // success / (success + error) from the compile ratios endpoint,
  // null when the student never compiled
  compileSuccess: number | null;
}

const BADGE_ORDER = [
  "TryAndError",
  "TryAndSearch",
  "Cautious",
  "TimeManagement",
  "DoubleChecking",
];

function badges(summary: Record<string, number>): string {
  const parts: string[] = [];
  for (const name of BADGE_ORDER) {
    const count = summary[name];
    if (count) {
      parts.push(
        `<span class="badge badge-${name.toLowerCase()}">${name}${count > 1 ? ` ×${count}` : ""}</span>`,
      );
    }
  }
  return parts.join(" ");
}

export function renderCohortTable(rows: CohortRow[]): string {
  if (!rows.length) {
    return `<p class="empty">No students loaded. Point the service at a data directory or upload logs via the API.</p>`;
  }
  const body = rows
    .map(({ user, compileSuccess }) => {
      const ratio =
        compileSuccess === null ? "&ndash;" : `${(compileSuccess * 100).toFixed(0)}%`;
      return (
        `<tr data-user="${escapeHtml(user.userID)}">` +
        `<td>${escapeHtml(user.userID)}</td>` +
        `<td>${user.cohort === null ? "&ndash;" : escapeHtml(user.cohort)}</td>` +
        `<td class="num">${user.eventCount}</td>` +
        `<td class="num">${ratio}</td>` +
        `<td>${badges(user.patternSummary)}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="cohort">` +
    `<thead><tr><th>student</th><th>cohort</th><th>events</th>` +
    `<th>compile success</th><th>patterns</th></tr></thead>` +
    `<tbody>${body}</tbody></table>`
  );
}

export function renderTaskSelector(tasks: string[], selected?: string): string {
  const options = [
    `<option value=""${selected === undefined ? " selected" : ""}>full timeline</option>`,
    ...tasks.map(
      (t) =>
        `<option value="${escapeHtml(t)}"${t === selected ? " selected" : ""}>task ${escapeHtml(t)}</option>`,
    ),
  ].join("");
  return `<label>scope <select id="task-select">${options}</select></label>`;
}

// The pane embeds the server-rendered SVG inline so its <a> hyperlinks
// stay clickable; overflow-x scrolling is the pane's, not the page's.
export function renderFlowPane(svg: string): string {
  return `<div class="flow-pane" id="flow-pane" tabindex="0">${svg}</div>`;
}

export function renderFlowError(message: string): string {
  return `<div class="flow-pane flow-error" id="flow-pane"><p>${escapeHtml(message)}</p></div>`;
}

export interface RatioCharts {
  browsing: ChartDataset;
  compile: ChartDataset;
  all: ChartDataset;
}

export function renderCharts(charts: RatioCharts): string {
  return (
    `<section class="charts">` +
    renderPieChart(charts.browsing, "browsing", "Browsing actions") +
    renderPieChart(charts.compile, "compile", "Compile outcomes") +
    renderPieChart(charts.all, "all", "All actions") +
    `</section>`
  );
}

export function renderStudentShell(userId: string, taskSelector: string): string {
  return (
    `<header class="student-header">` +
    `<button id="back">&larr; cohort</button>` +
    `<h2>${escapeHtml(userId)}</h2>` +
    taskSelector +
    `</header>` +
    `<div id="flow-slot"></div>` +
    `<div id="charts-slot"></div>`
  );
}

export function nodeLinks(svg: string): string[] {
  const links: string[] = [];
  const re = /<a [^>]*href="([^"]+)"[^>]*>/g;
  let match: RegExpExecArray | null;
  while ((match = re.exec(svg)) !== null) {
    if (match[1] !== undefined && !links.includes(match[1])) {
      links.push(match[1]);
    }
  }
  return links;
}
