// Browser entry point. Query params: ?nb=<notebook id>&mode=branch|linear
// and optionally ?service=<base url> when the service runs elsewhere.

import { App } from "./app.js";
import { ServiceClient } from "./client.js";

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const nbId = params.get("nb") ?? "nb";
  const mode = params.get("mode") === "linear" ? "linear" : "branch";
  const base = params.get("service") ?? "";
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const app = new App(root, new ServiceClient(base, nbId), { mode });
  (window as unknown as Record<string, unknown>).branchbook = app;
  void app.start();
}

boot();
