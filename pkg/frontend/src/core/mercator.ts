import type { BBox } from "./types.js";

export const TILE_SIZE = 256;

/** Web Mercator world-pixel coordinates at a given zoom. */
export function project(lon: number, lat: number, zoom: number): { x: number; y: number } {
  const scale = TILE_SIZE * 2 ** zoom;
  const clamped = Math.max(-85.05112878, Math.min(85.05112878, lat));
  const phi = (clamped * Math.PI) / 180;
  return {
    x: ((lon + 180) / 360) * scale,
    y: ((1 - Math.log(Math.tan(phi) + 1 / Math.cos(phi)) / Math.PI) / 2) * scale,
  };
}

export function unproject(x: number, y: number, zoom: number): { lon: number; lat: number } {
  const scale = TILE_SIZE * 2 ** zoom;
  const lon = (x / scale) * 360 - 180;
  const n = Math.PI - (2 * Math.PI * y) / scale;
  const lat = (180 / Math.PI) * Math.atan(0.5 * (Math.exp(n) - Math.exp(-n)));
  return { lon, lat };
}

/** Viewport of a w x h pixel screen centered on (lon, lat). */
export function viewportOf(
  lon: number,
  lat: number,
  zoom: number,
  width: number,
  height: number,
): BBox {
  const center = project(lon, lat, zoom);
  const nw = unproject(center.x - width / 2, center.y - height / 2, zoom);
  const se = unproject(center.x + width / 2, center.y + height / 2, zoom);
  return {
    west: Math.max(-180, nw.lon),
    south: Math.max(-90, se.lat),
    east: Math.min(180, se.lon),
    north: Math.min(90, nw.lat),
  };
}
