import type { ApiClient } from "../core/api.js";

/**
 * Collapsible panel for submitting arbitrary text and inspecting the
 * intermediate results of every geo-referencing stage.
 */
export class DebugPanel {
  constructor(container: HTMLElement, api: ApiClient) {
    container.classList.add("geo-debug");
    const details = document.createElement("details");
    const summary = document.createElement("summary");
    summary.textContent = "geo-referencing debug";
    const textarea = document.createElement("textarea");
    textarea.placeholder = "Paste text to geo-reference…";
    const run = document.createElement("button");
    run.textContent = "run";
    const output = document.createElement("pre");
    run.addEventListener("click", async () => {
      output.textContent = "…";
      try {
        const trace = await api.georef(textarea.value);
        output.textContent = JSON.stringify(trace, null, 2);
      } catch (error) {
        output.textContent = String(error);
      }
    });
    details.append(summary, textarea, run, output);
    container.appendChild(details);
  }
}
