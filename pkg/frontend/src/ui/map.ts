import { project, unproject, viewportOf, TILE_SIZE } from "../core/mercator.js";
import type { BBox, GeoJsonFeature } from "../core/types.js";

export interface MapOptions {
  tileUrlTemplate: string;
  center: { lon: number; lat: number };
  zoom: number;
  attribution?: string;
}

export interface MapCallbacks {
  onMoved(viewport: BBox, zoom: number): void;
  onFeatureClick(uri: string): void;
}

const FILL_BY_TYPE: Record<string, string> = {
  Country: "#7b3294",
  Province: "#c2a5cf",
  Water: "#2c7bb6",
  Municipality: "#d7191c",
  Neighborhood: "#fdae61",
  Road: "#e66101",
  Building: "#1a9641",
};

/**
 * Minimal slippy map: an XYZ tile pane plus an SVG overlay that renders
 * every mentioned place with its true geometry. Dragging pans, the wheel
 * and the +/- controls zoom; an idle event fires after each interaction.
 */
export class SlippyMap {
  private lon: number;
  private lat: number;
  private zoom: number;
  private tilePane: HTMLDivElement;
  private overlay: SVGSVGElement;
  private features: GeoJsonFeature[] = [];

  constructor(
    private container: HTMLElement,
    private options: MapOptions,
    private callbacks: MapCallbacks,
  ) {
    this.lon = options.center.lon;
    this.lat = options.center.lat;
    this.zoom = options.zoom;
    container.classList.add("geo-map");

    this.tilePane = document.createElement("div");
    this.tilePane.className = "geo-tiles";
    container.appendChild(this.tilePane);

    this.overlay = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.overlay.classList.add("geo-overlay");
    container.appendChild(this.overlay);

    const controls = document.createElement("div");
    controls.className = "geo-zoom-controls";
    for (const [label, delta] of [
      ["+", 1],
      ["−", -1],
    ] as const) {
      const button = document.createElement("button");
      button.textContent = label;
      button.addEventListener("click", () => this.zoomBy(delta));
      controls.appendChild(button);
    }
    container.appendChild(controls);

    if (options.attribution) {
      const credit = document.createElement("div");
      credit.className = "geo-attribution";
      credit.textContent = options.attribution;
      container.appendChild(credit);
    }

    this.bindPan();
    container.addEventListener(
      "wheel",
      (event) => {
        event.preventDefault();
        this.zoomBy(event.deltaY < 0 ? 1 : -1);
      },
      { passive: false },
    );
    this.render();
  }

  private bindPan(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.container.addEventListener("pointerdown", (event) => {
      dragging = true;
      lastX = event.clientX;
      lastY = event.clientY;
      this.container.setPointerCapture(event.pointerId);
    });
    this.container.addEventListener("pointermove", (event) => {
      if (!dragging) return;
      const center = project(this.lon, this.lat, this.zoom);
      const moved = unproject(
        center.x - (event.clientX - lastX),
        center.y - (event.clientY - lastY),
        this.zoom,
      );
      lastX = event.clientX;
      lastY = event.clientY;
      this.lon = moved.lon;
      this.lat = Math.max(-85, Math.min(85, moved.lat));
      this.render();
    });
    this.container.addEventListener("pointerup", () => {
      if (!dragging) return;
      dragging = false;
      this.emitMoved();
    });
  }

  zoomBy(delta: number): void {
    const next = Math.max(0, Math.min(19, this.zoom + delta));
    if (next === this.zoom) return;
    this.zoom = next;
    this.render();
    this.emitMoved();
  }

  setView(lon: number, lat: number, zoom: number): void {
    this.lon = lon;
    this.lat = lat;
    this.zoom = Math.max(0, Math.min(19, zoom));
    this.render();
    this.emitMoved();
  }

  getViewport(): BBox {
    const rect = this.container.getBoundingClientRect();
    return viewportOf(this.lon, this.lat, this.zoom, rect.width || 800, rect.height || 600);
  }

  getZoom(): number {
    return this.zoom;
  }

  private emitMoved(): void {
    this.callbacks.onMoved(this.getViewport(), this.zoom);
  }

  setOverlays(features: GeoJsonFeature[]): void {
    this.features = features;
    this.renderOverlay();
  }

  private render(): void {
    this.renderTiles();
    this.renderOverlay();
  }

  private renderTiles(): void {
    const rect = this.container.getBoundingClientRect();
    const width = rect.width || 800;
    const height = rect.height || 600;
    const center = project(this.lon, this.lat, this.zoom);
    const originX = center.x - width / 2;
    const originY = center.y - height / 2;
    const maxTile = 2 ** this.zoom;
    this.tilePane.replaceChildren();
    const firstX = Math.floor(originX / TILE_SIZE);
    const firstY = Math.floor(originY / TILE_SIZE);
    const lastX = Math.floor((originX + width) / TILE_SIZE);
    const lastY = Math.floor((originY + height) / TILE_SIZE);
    for (let tx = firstX; tx <= lastX; tx++) {
      for (let ty = Math.max(0, firstY); ty <= Math.min(maxTile - 1, lastY); ty++) {
        const img = document.createElement("img");
        const wrappedX = ((tx % maxTile) + maxTile) % maxTile;
        img.src = this.options.tileUrlTemplate
          .replace("{z}", String(this.zoom))
          .replace("{x}", String(wrappedX))
          .replace("{y}", String(ty));
        img.className = "geo-tile";
        img.style.left = `${tx * TILE_SIZE - originX}px`;
        img.style.top = `${ty * TILE_SIZE - originY}px`;
        img.alt = "";
        this.tilePane.appendChild(img);
      }
    }
  }

  private toScreen(lon: number, lat: number): { x: number; y: number } {
    const rect = this.container.getBoundingClientRect();
    const width = rect.width || 800;
    const height = rect.height || 600;
    const center = project(this.lon, this.lat, this.zoom);
    const point = project(lon, lat, this.zoom);
    return { x: point.x - center.x + width / 2, y: point.y - center.y + height / 2 };
  }

  private renderOverlay(): void {
    const svg = this.overlay;
    svg.replaceChildren();
    for (const feature of this.features) {
      const color = FILL_BY_TYPE[feature.properties.loc_type] ?? "#444";
      const group = document.createElementNS("http://www.w3.org/2000/svg", "g");
      group.setAttribute("data-uri", feature.properties.uri);
      group.classList.add("geo-feature");
      this.renderGeometry(group, feature.geometry, color);
      group.addEventListener("click", (event) => {
        event.stopPropagation();
        this.callbacks.onFeatureClick(feature.properties.uri);
      });
      const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
      title.textContent = `${feature.properties.primary_name} (${feature.properties.loc_type})`;
      group.appendChild(title);
      svg.appendChild(group);
    }
  }

  private renderGeometry(group: SVGGElement, geometry: { type: string; coordinates: unknown }, color: string): void {
    const ns = "http://www.w3.org/2000/svg";
    const addCircle = (coord: number[]) => {
      const seen = this.toScreen(coord[0] ?? 0, coord[1] ?? 0);
      const circle = document.createElementNS(ns, "circle");
      circle.setAttribute("cx", String(seen.x));
      circle.setAttribute("cy", String(seen.y));
      circle.setAttribute("r", "6");
      circle.setAttribute("fill", color);
      circle.setAttribute("fill-opacity", "0.8");
      group.appendChild(circle);
    };
    const pathOf = (ring: number[][]) =>
      ring
        .map((coord, index) => {
          const seen = this.toScreen(coord[0] ?? 0, coord[1] ?? 0);
          return `${index === 0 ? "M" : "L"}${seen.x.toFixed(1)},${seen.y.toFixed(1)}`;
        })
        .join(" ");
    const addLine = (line: number[][]) => {
      const path = document.createElementNS(ns, "path");
      path.setAttribute("d", pathOf(line));
      path.setAttribute("fill", "none");
      path.setAttribute("stroke", color);
      path.setAttribute("stroke-width", "3");
      group.appendChild(path);
    };
    const addPolygon = (rings: number[][][]) => {
      const path = document.createElementNS(ns, "path");
      path.setAttribute("d", rings.map((r) => pathOf(r) + " Z").join(" "));
      path.setAttribute("fill", color);
      path.setAttribute("fill-opacity", "0.25");
      path.setAttribute("fill-rule", "evenodd");
      path.setAttribute("stroke", color);
      path.setAttribute("stroke-width", "1.5");
      group.appendChild(path);
    };

    const coords = geometry.coordinates;
    switch (geometry.type) {
      case "Point":
        addCircle(coords as number[]);
        break;
      case "MultiPoint":
        (coords as number[][]).forEach(addCircle);
        break;
      case "LineString":
        addLine(coords as number[][]);
        break;
      case "MultiLineString":
        (coords as number[][][]).forEach(addLine);
        break;
      case "Polygon":
        addPolygon(coords as number[][][]);
        break;
      case "MultiPolygon":
        (coords as number[][][][]).forEach(addPolygon);
        break;
      default:
        break;
    }
  }
}
