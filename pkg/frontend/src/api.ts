/**
 * Typed client for the report service's /api/v1 JSON contract.
 *
 * The fetch implementation is injectable so tests can run against a mock
 * without a network; the browser entry point passes window.fetch.
 */

export interface NodeView {
  id: string;
  type: string;
  name: string;
  expanded: boolean;
}

export interface EdgeView {
  source: string;
  relationship_type: string;
  target: string;
}

export interface GraphPayload {
  session_id: string;
  nodes: NodeView[];
  edges: EdgeView[];
}

export interface EntitySummary {
  id: string;
  type: string;
  name: string;
}

export interface Metrics {
  tp: number;
  fp: number;
  fn: number;
  precision: number | null;
  recall: number | null;
  f1: number | null;
  slor_mean?: number;
}

export interface RewriteInfo {
  gate: string;
  fact_recall: number | null;
  estimated_cost: string;
  warning?: string | null;
}

export interface ReportPayload {
  session_id: string;
  report_type: string;
  template_text: string;
  final_text: string;
  metrics: Metrics;
  rewrite: RewriteInfo | null;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body?.detail === "string" ? body.detail : response.statusText;
      throw new ApiError(detail, response.status);
    }
    return body as T;
  }

  health(): Promise<{ status: string; entities: number }> {
    return this.request("/api/v1/health");
  }

  listEntities(type?: string): Promise<{ entities: EntitySummary[] }> {
    const query = type ? `?type=${encodeURIComponent(type)}` : "";
    return this.request(`/api/v1/entities${query}`);
  }

  createSession(rootIds: string[], expand: string[] = []): Promise<GraphPayload> {
    return this.request("/api/v1/sessions", {
      method: "POST",
      body: JSON.stringify({ root_ids: rootIds, expand }),
    });
  }

  getGraph(sessionId: string): Promise<GraphPayload> {
    return this.request(`/api/v1/sessions/${sessionId}/graph`);
  }

  expandNode(sessionId: string, nodeId: string): Promise<GraphPayload> {
    return this.request(`/api/v1/sessions/${sessionId}/expand`, {
      method: "POST",
      body: JSON.stringify({ node_id: nodeId }),
    });
  }

  generate(
    sessionId: string,
    reportType: string,
    focusId: string | null,
    rewrite = false,
  ): Promise<ReportPayload> {
    return this.request(`/api/v1/sessions/${sessionId}/generate`, {
      method: "POST",
      body: JSON.stringify({
        report_type: reportType,
        focus_id: focusId,
        rewrite,
      }),
    });
  }

  lastReport(sessionId: string): Promise<ReportPayload> {
    return this.request(`/api/v1/sessions/${sessionId}/report`);
  }
}
