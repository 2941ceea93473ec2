import { ApiClient } from "../core/api.js";
import { SearchController, type Scheduler } from "../core/controller.js";
import { rangeFromYears } from "../core/playback.js";
import { ViewStateStore } from "../core/store.js";
import { yearOf } from "../core/playback.js";
import type { DocumentOut, GeoJsonFeature } from "../core/types.js";
import { DebugPanel } from "./debug.js";
import { SlippyMap } from "./map.js";
import { SnippetPanel } from "./panel.js";
import { TimelineWidget } from "./timeline.js";

declare global {
  interface Window {
    GEOLINKER_CONFIG?: { apiBase?: string; tileUrlTemplate?: string };
  }
}

const config = window.GEOLINKER_CONFIG ?? {};
const api = new ApiClient(config.apiBase ?? "");
const store = new ViewStateStore();
const scheduler: Scheduler = {
  set: (fn, ms) => window.setTimeout(fn, ms),
  clear: (id) => window.clearTimeout(id),
};

let lastDocuments: DocumentOut[] = [];

const mapEl = document.getElementById("map")!;
const timelineEl = document.getElementById("timeline")!;
const panelEl = document.getElementById("panel")!;
const debugEl = document.getElementById("debug")!;
const facetsEl = document.getElementById("facets")!;
const statusEl = document.getElementById("status")!;

const panel = new SnippetPanel(panelEl);
new DebugPanel(debugEl, api);

const map = new SlippyMap(
  mapEl,
  {
    tileUrlTemplate:
      config.tileUrlTemplate ?? "https://tile.openstreetmap.org/{z}/{x}/{y}.png",
    center: { lon: 4.9, lat: 52.37 },
    zoom: 7,
    attribution: "© OpenStreetMap contributors",
  },
  {
    onMoved: (viewport, zoom) => controller.mapMoved(viewport, zoom),
    onFeatureClick: (uri) => void showFeature(uri),
  },
);

const timeline = new TimelineWidget(timelineEl, {
  onBrush: (fromYear, toYear) => {
    if (fromYear === null || toYear === null) controller.timeSelected(null);
    else controller.timeSelected(rangeFromYears(fromYear, toYear));
  },
  onPlay: () => controller.play(),
  onPause: () => controller.pause(),
});

let lastBins: import("../core/types.js").TimelineBinOut[] = [];

const controller = new SearchController(store, {
  fetchJson: (path) => api.getJson(path),
  scheduler,
  onSearch: (data, state) => {
    lastDocuments = data.documents;
    map.setOverlays(data.features);
    statusEl.textContent =
      `${data.total} documents, ${data.features.length} places` +
      (state.timeRange ? ` · ${state.timeRange.from}…${state.timeRange.to}` : "");
  },
  onTimeline: (bins, state) => {
    lastBins = bins;
    const selection = state.timeRange
      ? { from: yearOf(state.timeRange.from), to: yearOf(state.timeRange.to) }
      : null;
    timeline.render(bins, selection);
  },
  onError: (error) => {
    statusEl.textContent = `request failed: ${String(error)} (showing stale data)`;
  },
});

// the selection band tracks the state even when no new bins arrive
// (brush and playback both go through setTimeRange)
store.subscribe((state) => {
  const selection = state.timeRange
    ? { from: yearOf(state.timeRange.from), to: yearOf(state.timeRange.to) }
    : null;
  timeline.render(lastBins, selection);
});

async function showFeature(uri: string): Promise<void> {
  try {
    const feature = (await api.getJson(`/feature/${uri}`)) as GeoJsonFeature;
    panel.show(feature, lastDocuments);
  } catch {
    panel.showUnavailable();
  }
}

async function loadFacets(): Promise<void> {
  const bins = (await api.getJson("/timeline?bbox=-180,-90,180,90&zoom=19")) as {
    counts: Record<string, number>;
  }[];
  const facets = [...new Set(bins.flatMap((b) => Object.keys(b.counts)))].sort();
  facetsEl.replaceChildren();
  const active = new Set<string>();
  for (const facet of facets) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.addEventListener("change", () => {
      if (box.checked) active.add(facet);
      else active.delete(facet);
      controller.facetsChanged([...active]);
    });
    label.append(box, facet);
    facetsEl.appendChild(label);
  }
}

controller.start();
controller.mapMoved(map.getViewport(), map.getZoom());
void loadFacets();
