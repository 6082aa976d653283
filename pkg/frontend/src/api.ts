// Typed client for the analytics service. The dashboard consumes the API
// exclusively; it never recomputes findings or ratios on its own.

export type ChartScope = "browsing" | "compile" | "all";

export interface UserSummary {
  userID: string;
  cohort: string | null;
  eventCount: number;
  patternSummary: Record<string, number>;
}

export interface EventExport {
  timestamp: number;
  userID: string;
  taskID: string | null;
  userAction: string;
  tabURL: string | null;
  clipboardCopy: string | null;
  msg: string | null;
  actionKind: string;
  source: string;
}

export interface TimelineExport {
  userID: string;
  taskAttributed: boolean;
  tStart: number | null;
  tEnd: number | null;
  events: EventExport[];
}

export interface Finding {
  pattern: string;
  userID: string;
  taskID: string | null;
  evidence: [number, number][];
  metrics: Record<string, number>;
  params: Record<string, unknown>;
}

export interface PatternsResponse {
  userID: string;
  findings: Finding[];
}

export interface ChartDataset {
  labels: string[];
  values: number[];
  colors: string[];
  excluded: string[];
}

export interface CohortBucket {
  cohort: string;
  students: number;
  patterns: Record<string, number>;
}

export interface CohortPatterns {
  cohorts: CohortBucket[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function fail(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (body && body.detail !== undefined) {
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export function ratiosPath(userId: string, scope: ChartScope, excluded: Iterable<string>): string {
  const params = new URLSearchParams({ scope });
  const list = [...excluded].sort();
  if (list.length) {
    params.set("exclude", list.join(","));
  }
  return `/api/users/${encodeURIComponent(userId)}/ratios?${params}`;
}

export function flowchartPath(userId: string, task?: string): string {
  const base = `/api/users/${encodeURIComponent(userId)}/flowchart.svg`;
  return task ? `${base}?task=${encodeURIComponent(task)}` : base;
}

export class ApiClient {
  constructor(private readonly fetcher: FetchLike = (input, init) => fetch(input, init)) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetcher(path, { headers: { Accept: "application/json" } });
    if (!res.ok) {
      await fail(res);
    }
    return (await res.json()) as T;
  }

  users(): Promise<UserSummary[]> {
    return this.getJson("/api/users");
  }

  timeline(userId: string): Promise<TimelineExport> {
    return this.getJson(`/api/users/${encodeURIComponent(userId)}/timeline`);
  }

  patterns(userId: string): Promise<PatternsResponse> {
    return this.getJson(`/api/users/${encodeURIComponent(userId)}/patterns`);
  }

  ratios(userId: string, scope: ChartScope, excluded: Iterable<string>): Promise<ChartDataset> {
    return this.getJson(ratiosPath(userId, scope, excluded));
  }

  cohortPatterns(): Promise<CohortPatterns> {
    return this.getJson("/api/cohort/patterns");
  }

  async flowchartSvg(userId: string, task?: string): Promise<string> {
    const res = await this.fetcher(flowchartPath(userId, task));
    if (!res.ok) {
      await fail(res);
    }
    return res.text();
  }
}

// Discards out-of-order responses: a view keeps one gate, stamps each
// request, and drops any response whose stamp is no longer current.
export class SequenceGate {
  private seq = 0;

  next(): number {
    return ++this.seq;
  }

  isCurrent(stamp: number): boolean {
    return stamp === this.seq;
  }
}
