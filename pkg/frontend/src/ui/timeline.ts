import type { TimelineBinOut } from "../core/types.js";

export interface TimelineCallbacks {
  onBrush(fromYear: number | null, toYear: number | null): void;
  onPlay(): void;
  onPause(): void;
}

const FACET_COLORS = ["#d7191c", "#2c7bb6", "#1a9641", "#fdae61", "#7b3294", "#e66101"];

/**
 * Stacked yearly bars with a brushable selection band and playback
 * controls. Brushing emits inclusive year bounds; the moving-window
 * playback reuses the same path, so the map refresh is identical.
 */
export class TimelineWidget {
  private svg: SVGSVGElement;
  private status: HTMLSpanElement;
  private bins: TimelineBinOut[] = [];
  private selection: { from: number; to: number } | null = null;
  private brushStart: number | null = null;
  private width = 640;
  private height = 120;

  constructor(
    container: HTMLElement,
    private callbacks: TimelineCallbacks,
  ) {
    container.classList.add("geo-timeline");
    const controls = document.createElement("div");
    controls.className = "geo-timeline-controls";
    const play = document.createElement("button");
    play.textContent = "▶";
    play.title = "moving-window playback";
    play.addEventListener("click", () => this.callbacks.onPlay());
    const pause = document.createElement("button");
    pause.textContent = "■";
    pause.addEventListener("click", () => this.callbacks.onPause());
    const clear = document.createElement("button");
    clear.textContent = "clear";
    clear.addEventListener("click", () => {
      this.selection = null;
      this.callbacks.onBrush(null, null);
      this.draw();
    });
    this.status = document.createElement("span");
    this.status.className = "geo-timeline-status";
    controls.append(play, pause, clear, this.status);
    container.appendChild(controls);

    this.svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.svg.classList.add("geo-timeline-chart");
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    container.appendChild(this.svg);
    this.bindBrush();
  }

  render(bins: TimelineBinOut[], selection: { from: number; to: number } | null): void {
    this.bins = bins;
    this.selection = selection;
    this.draw();
  }

  private yearBins(): TimelineBinOut[] {
    return this.bins.filter((b) => /^\d{4}$/.test(b.period));
  }

  private barWidth(): number {
    return this.width / Math.max(1, this.bins.length);
  }

  private yearAt(pixelX: number): number | null {
    const index = Math.floor(pixelX / this.barWidth());
    const bin = this.bins[index];
    if (!bin || !/^\d{4}$/.test(bin.period)) return null;
    return parseInt(bin.period, 10);
  }

  private bindBrush(): void {
    this.svg.addEventListener("pointerdown", (event) => {
      this.brushStart = this.svgX(event);
    });
    this.svg.addEventListener("pointermove", (event) => {
      if (this.brushStart === null) return;
      this.previewSelection(this.brushStart, this.svgX(event));
    });
    this.svg.addEventListener("pointerup", (event) => {
      if (this.brushStart === null) return;
      const a = this.yearAt(Math.min(this.brushStart, this.svgX(event)));
      const b = this.yearAt(Math.max(this.brushStart, this.svgX(event)));
      this.brushStart = null;
      if (a !== null && b !== null) {
        this.selection = { from: a, to: b };
        this.callbacks.onBrush(a, b);
        this.draw();
      }
    });
  }

  private svgX(event: PointerEvent): number {
    const rect = this.svg.getBoundingClientRect();
    return ((event.clientX - rect.left) / Math.max(1, rect.width)) * this.width;
  }

  private previewSelection(x0: number, x1: number): void {
    const a = this.yearAt(Math.min(x0, x1));
    const b = this.yearAt(Math.max(x0, x1));
    if (a !== null && b !== null) {
      this.selection = { from: a, to: b };
      this.draw();
    }
  }

  setStatus(text: string): void {
    this.status.textContent = text;
  }

  private draw(): void {
    const ns = "http://www.w3.org/2000/svg";
    this.svg.replaceChildren();
    const facets = [...new Set(this.bins.flatMap((b) => Object.keys(b.counts)))].sort();
    const colorOf = new Map(facets.map((f, i) => [f, FACET_COLORS[i % FACET_COLORS.length]]));
    const peak = Math.max(1, ...this.bins.map((b) => b.total));
    const barW = this.barWidth();
    const chartH = this.height - 18;

    this.bins.forEach((bin, index) => {
      let y = chartH;
      const x = index * barW + 1;
      const draw = (value: number, color: string) => {
        if (value <= 0) return;
        const h = (value / peak) * (chartH - 4);
        y -= h;
        const rect = document.createElementNS(ns, "rect");
        rect.setAttribute("x", String(x));
        rect.setAttribute("y", String(y));
        rect.setAttribute("width", String(Math.max(1, barW - 2)));
        rect.setAttribute("height", String(h));
        rect.setAttribute("fill", color);
        this.svg.appendChild(rect);
      };
      for (const facet of facets) draw(bin.counts[facet] ?? 0, colorOf.get(facet) ?? "#888");
      const unfaceted =
        bin.total - Object.values(bin.counts).reduce((sum, value) => sum + value, 0);
      draw(unfaceted, "#9a9a9a");

      if (index % 2 === 0 || this.bins.length <= 8) {
        const label = document.createElementNS(ns, "text");
        label.setAttribute("x", String(x + barW / 2));
        label.setAttribute("y", String(this.height - 4));
        label.setAttribute("text-anchor", "middle");
        label.setAttribute("class", "geo-timeline-label");
        label.textContent = bin.period;
        this.svg.appendChild(label);
      }
    });

    if (this.selection) {
      const years = this.yearBins().map((b) => parseInt(b.period, 10));
      const fromIndex = this.bins.findIndex((b) => b.period === String(this.selection?.from));
      const toIndex = this.bins.findIndex((b) => b.period === String(this.selection?.to));
      if (fromIndex >= 0 && toIndex >= 0 && years.length > 0) {
        const band = document.createElementNS(ns, "rect");
        band.setAttribute("x", String(fromIndex * barW));
        band.setAttribute("y", "0");
        band.setAttribute("width", String((toIndex - fromIndex + 1) * barW));
        band.setAttribute("height", String(chartH));
        band.setAttribute("class", "geo-timeline-band");
        this.svg.appendChild(band);
      }
    }
  }
}
