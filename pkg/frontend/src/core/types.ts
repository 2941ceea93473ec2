export interface BBox {
  west: number;
  south: number;
  east: number;
  north: number;
}

/** Inclusive ISO date range, as sent in the from/to query parameters. */
export interface TimeRange {
  from: string;
  to: string;
}

export type PlaybackState =
  | { mode: "stopped" }
  | { mode: "playing"; windowYears: number; stepMs: number };

/**
 * The single source of truth for both the map and the timeline: every
 * request the client issues is a pure function of this state.
 */
export interface ViewState {
  viewport: BBox;
  zoom: number;
  timeRange: TimeRange | null;
  facets: string[]; // kept sorted so the derived query string is canonical
  playback: PlaybackState;
  maxResults: number;
}

export interface AnnotationOut {
  feature_uri: string;
  span: [number, number];
  confidence: number;
  bbox: [number, number, number, number];
}

export interface DocumentOut {
  doc_id: string;
  date: string | null;
  facet: string | null;
  text: string;
  max_confidence: number;
  annotations: AnnotationOut[];
}

export interface GeoJsonFeature {
  type: "Feature";
  geometry: { type: string; coordinates: unknown };
  bbox?: number[];
  properties: {
    uri: string;
    loc_type: string;
    primary_name: string;
    alt_names: string[];
  };
}

export interface SearchResponse {
  documents: DocumentOut[];
  features: GeoJsonFeature[];
  total: number;
}

export interface TimelineBinOut {
  period: string;
  counts: Record<string, number>;
  total: number;
}

export function defaultViewState(): ViewState {
  return {
    viewport: { west: 3.0, south: 50.5, east: 7.5, north: 53.8 },
    zoom: 7,
    timeRange: null,
    facets: [],
    playback: { mode: "stopped" },
    maxResults: 50,
  };
}
