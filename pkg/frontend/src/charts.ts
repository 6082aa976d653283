// Pie chart rendering from the API's ChartDataset. The only arithmetic
// done here is renormalizing visible counts into display percentages.

import type { ChartDataset, ChartScope } from "./api.js";

export interface Slice {
  label: string;
  value: number;
  percent: number; // one decimal, largest-remainder rounded
  color: string;
  path: string;
  startAngle: number;
  endAngle: number;
}

// Largest-remainder rounding to one decimal so the displayed numbers
// always sum to exactly 100.0 (the naive per-slice round can drift).
export function displayPercentages(values: number[]): number[] {
  const total = values.reduce((a, b) => a + b, 0);
  if (total <= 0) {
    return values.map(() => 0);
  }
  const exact = values.map((v) => (v / total) * 1000);
  const floored = exact.map(Math.floor);
  let leftover = 1000 - floored.reduce((a, b) => a + b, 0);
  const order = exact
    .map((x, i) => ({ i, frac: x - Math.floor(x) }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  for (const { i } of order) {
    if (leftover <= 0) {
      break;
    }
    floored[i] = (floored[i] ?? 0) + 1;
    leftover -= 1;
  }
  return floored.map((x) => x / 10);
}

const CX = 90;
const CY = 90;
const R = 80;

function point(angle: number): [number, number] {
  return [CX + R * Math.cos(angle), CY + R * Math.sin(angle)];
}

function arcPath(start: number, end: number): string {
  const span = end - start;
  if (span >= Math.PI * 2 - 1e-9) {
    // a single-slice pie: one path, two half arcs so SVG renders a full disc
    const [x0, y0] = point(start);
    const [x1, y1] = point(start + Math.PI);
    return (
      `M ${x0.toFixed(2)} ${y0.toFixed(2)} ` +
      `A ${R} ${R} 0 1 1 ${x1.toFixed(2)} ${y1.toFixed(2)} ` +
      `A ${R} ${R} 0 1 1 ${x0.toFixed(2)} ${y0.toFixed(2)} Z`
    );
  }
  const [x0, y0] = point(start);
  const [x1, y1] = point(end);
  const large = span > Math.PI ? 1 : 0;
  return (
    `M ${CX} ${CY} L ${x0.toFixed(2)} ${y0.toFixed(2)} ` +
    `A ${R} ${R} 0 ${large} 1 ${x1.toFixed(2)} ${y1.toFixed(2)} Z`
  );
}

export function pieSlices(dataset: ChartDataset): Slice[] {
  const total = dataset.values.reduce((a, b) => a + b, 0);
  const percents = displayPercentages(dataset.values);
  const slices: Slice[] = [];
  let angle = -Math.PI / 2;
  dataset.labels.forEach((label, i) => {
    const value = dataset.values[i] ?? 0;
    const span = total > 0 ? (value / total) * Math.PI * 2 : 0;
    slices.push({
      label,
      value,
      percent: percents[i] ?? 0,
      color: dataset.colors[i] ?? "#6b7280",
      path: arcPath(angle, angle + span),
      startAngle: angle,
      endAngle: angle + span,
    });
    angle += span;
  });
  return slices;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderPieChart(dataset: ChartDataset, scope: ChartScope, title: string): string {
  if (!dataset.labels.length) {
    return `<figure class="pie" data-scope="${scope}"><figcaption>${escapeHtml(title)}</figcaption><p class="empty">no events in scope</p></figure>`;
  }
  const slices = pieSlices(dataset);
  const paths = slices
    .map(
      (s) =>
        `<path d="${s.path}" fill="${s.color}" data-scope="${scope}" data-label="${escapeHtml(s.label)}">` +
        `<title>${escapeHtml(s.label)}: ${s.percent.toFixed(1)}%</title></path>`,
    )
    .join("");
  const legend = slices
    .map(
      (s) =>
        `<li data-scope="${scope}" data-label="${escapeHtml(s.label)}">` +
        `<span class="swatch" style="background:${s.color}"></span>` +
        `${escapeHtml(s.label)} &middot; ${s.percent.toFixed(1)}% (${s.value})</li>`,
    )
    .join("");
  const excluded = dataset.excluded.length
    ? `<p class="excluded">excluded: ${dataset.excluded.map(escapeHtml).join(", ")} <button data-scope="${scope}" data-restore>restore</button></p>`
    : "";
  return (
    `<figure class="pie" data-scope="${scope}">` +
    `<figcaption>${escapeHtml(title)}</figcaption>` +
    `<svg viewBox="0 0 180 180" role="img">${paths}</svg>` +
    `<ul class="legend">${legend}</ul>` +
    excluded +
    `</figure>`
  );
}
