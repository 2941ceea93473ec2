import type { ViewState } from "./types.js";

/**
 * Canonical query strings derived from ViewState. These are the only
 * places request parameters are built, which is what makes "requests are
 * a pure function of the view state" a checkable property.
 */

function bboxParam(state: ViewState): string {
  const v = state.viewport;
  return [v.west, v.south, v.east, v.north].map(String).join(",");
}

export function searchQueryString(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("bbox", bboxParam(state));
  params.set("zoom", String(state.zoom));
  if (state.timeRange) {
    params.set("from", state.timeRange.from);
    params.set("to", state.timeRange.to);
  }
  for (const facet of [...state.facets].sort()) {
    params.append("facet", facet);
  }
  params.set("max_results", String(state.maxResults));
  return params.toString();
}

/** The timeline always spans the whole corpus: no from/to parameters. */
export function timelineQueryString(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("bbox", bboxParam(state));
  params.set("zoom", String(state.zoom));
  for (const facet of [...state.facets].sort()) {
    params.append("facet", facet);
  }
  return params.toString();
}

export function searchPath(state: ViewState): string {
  return `/search?${searchQueryString(state)}`;
}

export function timelinePath(state: ViewState): string {
  return `/timeline?${timelineQueryString(state)}`;
}
