/**
 * Entry point: wire the store to the DOM and the report service.
 *
 * The session id is kept in the URL hash so a refresh restores the whole
 * view from the API alone.
 */

import { ApiClient } from "./api.js";
import { SessionStore } from "./state.js";
import { GraphView, ReportView, showToast } from "./view.js";

const api = new ApiClient(
  (window as { CTIREPORT_API?: string }).CTIREPORT_API ?? "",
  (url, init) => fetch(url, init),
);

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

async function boot(): Promise<void> {
  const svg = byId<HTMLElement>("graph") as unknown as SVGSVGElement;
  const reportRoot = byId<HTMLElement>("report-pane");
  const toastRoot = byId<HTMLElement>("toasts");
  const rootsInput = byId<HTMLInputElement>("root-ids");
  const typeSelect = byId<HTMLSelectElement>("report-type");
  const rewriteToggle = byId<HTMLInputElement>("rewrite-toggle");

  let graphView: GraphView;
  let reportView: ReportView;
  const store = new SessionStore(api, {
    graphChanged: () => {
      graphView.render();
      reportView.render();
      if (store.sessionId) window.location.hash = store.sessionId;
    },
    reportChanged: () => reportView.render(),
    toast: (toast) => showToast(toastRoot, toast),
  });
  graphView = new GraphView(svg, store);
  reportView = new ReportView(reportRoot, store);

  byId<HTMLButtonElement>("open-session").addEventListener("click", () => {
    const roots = rootsInput.value.split(/[\s,]+/).filter(Boolean);
    if (roots.length === 0) {
      showToast(toastRoot, { level: "error", message: "enter root entity ids" });
      return;
    }
    void store.createSession(roots).catch((error) =>
      showToast(toastRoot, { level: "error", message: String(error) }),
    );
  });

  byId<HTMLButtonElement>("generate").addEventListener("click", () => {
    void store.generate(typeSelect.value, rewriteToggle.checked);
  });

  byId<HTMLButtonElement>("export").addEventListener("click", () =>
    reportView.exportCurrent(),
  );

  const existing = window.location.hash.replace(/^#/, "");
  if (existing) {
    await store.restoreSession(existing).catch(() => {
      window.location.hash = "";
    });
  }
}

void boot();
