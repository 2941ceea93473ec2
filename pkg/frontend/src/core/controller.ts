import { searchPath, timelinePath } from "./query.js";
import { advanceWindow, initialWindow, yearOf, type YearSpan } from "./playback.js";
import { sameView, ViewStateStore } from "./store.js";
import type {
  BBox,
  SearchResponse,
  TimeRange,
  TimelineBinOut,
  ViewState,
} from "./types.js";

export interface Scheduler {
  set(fn: () => void, ms: number): number;
  clear(id: number): void;
}

export interface ControllerDeps {
  fetchJson: (path: string) => Promise<unknown>;
  scheduler: Scheduler;
  onSearch: (data: SearchResponse, state: ViewState) => void;
  onTimeline: (bins: TimelineBinOut[], state: ViewState) => void;
  onError: (error: unknown) => void;
}

export const DEBOUNCE_MS = 250;
export const DEFAULT_WINDOW_YEARS = 10;
export const DEFAULT_STEP_MS = 500;

/**
 * Binds the view state to the backend: debounced map moves, immediate
 * time/facet refreshes, moving-window playback, and sequence-numbered
 * response reconciliation (a response is dropped when a newer one for the
 * same stream has already been applied, so out-of-order replies can never
 * paint stale overlays).
 */
export class SearchController {
  readonly store: ViewStateStore;
  private deps: ControllerDeps;
  private debounceId: number | null = null;
  private pendingView: { viewport: BBox; zoom: number } | null = null;
  private playTimer: number | null = null;
  private corpusSpan: YearSpan | null = null;

  private searchSeq = 0;
  private searchApplied = 0;
  private timelineSeq = 0;
  private timelineApplied = 0;

  constructor(store: ViewStateStore, deps: ControllerDeps) {
    this.store = store;
    this.deps = deps;
  }

  /** Map idle events funnel here; a trailing 250 ms debounce coalesces
   * continuous panning into one request pair. */
  mapMoved(viewport: BBox, zoom: number): void {
    this.pendingView = { viewport, zoom };
    if (this.debounceId !== null) this.deps.scheduler.clear(this.debounceId);
    this.debounceId = this.deps.scheduler.set(() => {
      this.debounceId = null;
      const pending = this.pendingView;
      this.pendingView = null;
      if (!pending) return;
      if (sameView(pending, this.store.get())) return; // unchanged: no duplicate request
      this.store.setViewport(pending.viewport, pending.zoom);
      this.refreshSearch();
      this.refreshTimeline();
    }, DEBOUNCE_MS);
  }

  /** Timeline brush (or playback) selections re-filter the result set. */
  timeSelected(range: TimeRange | null): void {
    this.store.setTimeRange(range);
    this.refreshSearch();
  }

  facetsChanged(facets: string[]): void {
    this.store.setFacets(facets);
    this.refreshSearch();
    this.refreshTimeline();
  }

  /** Initial load: fetch both streams for the current state. */
  start(): void {
    this.refreshSearch();
    this.refreshTimeline();
  }

  // -- playback ------------------------------------------------------------

  play(windowYears = DEFAULT_WINDOW_YEARS, stepMs = DEFAULT_STEP_MS): void {
    if (!this.corpusSpan) return; // nothing known to play over yet
    this.store.setPlayback({ mode: "playing", windowYears, stepMs });
    const state = this.store.get();
    if (!state.timeRange) {
      this.timeSelected(initialWindow(this.corpusSpan, windowYears));
    }
    this.scheduleTick(stepMs);
  }

  pause(): void {
    this.store.setPlayback({ mode: "stopped" });
    if (this.playTimer !== null) {
      this.deps.scheduler.clear(this.playTimer);
      this.playTimer = null;
    }
  }

  tick(): void {
    const state = this.store.get();
    if (state.playback.mode !== "playing" || !this.corpusSpan) return;
    const current =
      state.timeRange ?? initialWindow(this.corpusSpan, state.playback.windowYears);
    this.timeSelected(advanceWindow(current, this.corpusSpan));
    this.scheduleTick(state.playback.stepMs);
  }

  private scheduleTick(stepMs: number): void {
    if (this.playTimer !== null) this.deps.scheduler.clear(this.playTimer);
    this.playTimer = this.deps.scheduler.set(() => this.tick(), stepMs);
  }

  // -- fetch + reconciliation ------------------------------------------------

  private refreshSearch(): void {
    const state = this.store.get();
    const seq = ++this.searchSeq;
    this.deps
      .fetchJson(searchPath(state))
      .then((data) => {
        if (seq <= this.searchApplied) return; // stale: a newer reply won
        this.searchApplied = seq;
        this.deps.onSearch(data as SearchResponse, state);
      })
      .catch((error) => this.deps.onError(error));
  }

  private refreshTimeline(): void {
    const state = this.store.get();
    const seq = ++this.timelineSeq;
    this.deps
      .fetchJson(timelinePath(state))
      .then((data) => {
        if (seq <= this.timelineApplied) return;
        this.timelineApplied = seq;
        const bins = data as TimelineBinOut[];
        this.noteCorpusSpan(bins);
        this.deps.onTimeline(bins, state);
      })
      .catch((error) => this.deps.onError(error));
  }

  private noteCorpusSpan(bins: TimelineBinOut[]): void {
    const years = bins
      .map((b) => b.period)
      .filter((p) => /^\d{4}$/.test(p))
      .map((p) => parseInt(p, 10));
    if (years.length > 0) {
      this.corpusSpan = { min: Math.min(...years), max: Math.max(...years) };
    }
  }

  /** Exposed for tests and the playback UI. */
  knownCorpusSpan(): YearSpan | null {
    return this.corpusSpan ? { ...this.corpusSpan } : null;
  }
}

export { yearOf };
