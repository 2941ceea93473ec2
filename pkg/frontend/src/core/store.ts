import type { BBox, PlaybackState, TimeRange, ViewState } from "./types.js";
import { defaultViewState } from "./types.js";

export type StateListener = (state: ViewState) => void;

/** Holds the ViewState; every mutation goes through here. */
export class ViewStateStore {
  private state: ViewState;
  private listeners: StateListener[] = [];

  constructor(initial?: ViewState) {
    this.state = initial ?? defaultViewState();
  }

  get(): ViewState {
    return {
      ...this.state,
      viewport: { ...this.state.viewport },
      facets: [...this.state.facets],
      timeRange: this.state.timeRange ? { ...this.state.timeRange } : null,
    };
  }

  subscribe(listener: StateListener): void {
    this.listeners.push(listener);
  }

  private commit(next: ViewState): void {
    this.state = next;
    for (const listener of this.listeners) listener(this.get());
  }

  setViewport(viewport: BBox, zoom: number): void {
    this.commit({ ...this.state, viewport: { ...viewport }, zoom });
  }

  setTimeRange(timeRange: TimeRange | null): void {
    this.commit({ ...this.state, timeRange: timeRange ? { ...timeRange } : null });
  }

  setFacets(facets: string[]): void {
    this.commit({ ...this.state, facets: [...facets].sort() });
  }

  setPlayback(playback: PlaybackState): void {
    this.commit({ ...this.state, playback });
  }
}

export function sameView(a: { viewport: BBox; zoom: number }, b: { viewport: BBox; zoom: number }): boolean {
  return (
    a.zoom === b.zoom &&
    a.viewport.west === b.viewport.west &&
    a.viewport.south === b.viewport.south &&
    a.viewport.east === b.viewport.east &&
    a.viewport.north === b.viewport.north
  );
}
