import type { TimeRange } from "./types.js";

export interface YearSpan {
  min: number;
  max: number;
}

export function yearOf(iso: string): number {
  return parseInt(iso.slice(0, 4), 10);
}

export function rangeFromYears(fromYear: number, toYear: number): TimeRange {
  return { from: `${fromYear}-01-01`, to: `${toYear}-12-31` };
}

/**
 * Shift the playback window one step; wrap to the corpus start once the
 * window would move past the corpus end.
 */
export function advanceWindow(current: TimeRange, span: YearSpan, stepYears = 1): TimeRange {
  const width = yearOf(current.to) - yearOf(current.from);
  const nextFrom = yearOf(current.from) + stepYears;
  if (nextFrom + width > span.max) {
    return rangeFromYears(span.min, span.min + width);
  }
  return rangeFromYears(nextFrom, nextFrom + width);
}

/** Initial playback window: the leading `windowYears` of the corpus. */
export function initialWindow(span: YearSpan, windowYears: number): TimeRange {
  const width = Math.max(0, Math.min(windowYears - 1, span.max - span.min));
  return rangeFromYears(span.min, span.min + width);
}
