/**
 * Session store: the single source of truth behind the graph view and
 * report pane. All state is reconstructible from the session API, so a
 * page refresh only needs the session id to rebuild the view.
 */

import {
  ApiClient,
  ApiError,
  GraphPayload,
  ReportPayload,
} from "./api.js";

/** Report types and their focus rules, mirrored from the server contract. */
export const REPORT_TYPES = [
  "overview",
  "subject",
  "timeline",
  "vulnerability",
] as const;

export type ReportType = (typeof REPORT_TYPES)[number];

const FOCUS_REQUIRED: ReadonlySet<string> = new Set(["subject", "vulnerability"]);

export function focusRequired(reportType: string): boolean {
  return FOCUS_REQUIRED.has(reportType);
}

/**
 * Client-side mirror of the server's focus validation: returns an error
 * message for inline display, or null when the request may be sent.
 */
export function validateGenerate(
  reportType: string,
  focusId: string | null,
): string | null {
  if (!REPORT_TYPES.includes(reportType as ReportType)) {
    return `unknown report type: ${reportType}`;
  }
  if (focusRequired(reportType) && !focusId) {
    return `${reportType} reports need a focus entity`;
  }
  if (!focusRequired(reportType) && focusId) {
    return `${reportType} reports do not take a focus entity`;
  }
  return null;
}

export type Toast = { level: "info" | "error"; message: string };

export interface StoreEvents {
  graphChanged(): void;
  reportChanged(): void;
  toast(toast: Toast): void;
}

export class SessionStore {
  graph: GraphPayload | null = null;
  report: ReportPayload | null = null;
  /** Nodes added by the most recent expansion, for visual highlighting. */
  newlyAdded: ReadonlySet<string> = new Set();
  selectedFocus: string | null = null;
  validationError: string | null = null;

  private inFlight = false;

  constructor(
    private readonly api: ApiClient,
    private readonly events: StoreEvents,
  ) {}

  get sessionId(): string | null {
    return this.graph?.session_id ?? null;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  async createSession(rootIds: string[]): Promise<void> {
    this.graph = await this.api.createSession(rootIds);
    this.newlyAdded = new Set();
    this.report = null;
    this.events.graphChanged();
  }

  /** Rebuild the view from the API alone (refresh safety). */
  async restoreSession(sessionId: string): Promise<void> {
    this.graph = await this.api.getGraph(sessionId);
    this.newlyAdded = new Set();
    try {
      this.report = await this.api.lastReport(sessionId);
      this.events.reportChanged();
    } catch (error) {
      if (!(error instanceof ApiError && error.status === 404)) throw error;
      this.report = null;
    }
    this.events.graphChanged();
  }

  /**
   * Expand a node into its stored neighborhood. Exactly one expand call
   * per click; clicks during a pending request are suppressed, and the
   * view is left unchanged on failure.
   */
  async expand(nodeId: string): Promise<void> {
    if (!this.graph || this.inFlight) return;
    const before = new Set(this.graph.nodes.map((n) => n.id));
    this.inFlight = true;
    try {
      const updated = await this.api.expandNode(this.graph.session_id, nodeId);
      this.graph = updated;
      this.newlyAdded = new Set(
        updated.nodes.map((n) => n.id).filter((id) => !before.has(id)),
      );
      this.events.graphChanged();
    } catch (error) {
      this.events.toast({ level: "error", message: describe(error) });
    } finally {
      this.inFlight = false;
    }
  }

  /**
   * Generate a report for the current scope. Validation failures are
   * surfaced inline and no request is sent.
   */
  async generate(reportType: string, rewrite = false): Promise<void> {
    if (!this.graph || this.inFlight) return;
    this.validationError = validateGenerate(reportType, this.selectedFocus);
    if (this.validationError !== null) {
      this.events.reportChanged();
      return;
    }
    this.inFlight = true;
    try {
      this.report = await this.api.generate(
        this.graph.session_id,
        reportType,
        this.selectedFocus,
        rewrite,
      );
      this.events.reportChanged();
    } catch (error) {
      if (error instanceof ApiError && error.status === 502) {
        // provider failure: the payload still carries the fallback report
        this.events.toast({
          level: "error",
          message: "rewrite provider unavailable; showing template stage",
        });
      } else {
        this.events.toast({ level: "error", message: describe(error) });
      }
    } finally {
      this.inFlight = false;
    }
  }

  setFocus(entityId: string | null): void {
    this.selectedFocus = entityId;
    this.validationError = null;
    this.events.graphChanged();
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}
