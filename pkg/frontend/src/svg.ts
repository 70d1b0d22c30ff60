/** Tiny deterministic SVG scene builder with linear and log-10 axes. */

export interface Extent {
  min: number;
  max: number;
}

export class Scale {
  constructor(
    readonly domain: Extent,
    readonly range: Extent,
    readonly log: boolean,
  ) {}

  private t(v: number): number {
    return this.log ? Math.log10(v) : v;
  }

  map(v: number): number {
    const d0 = this.t(this.domain.min);
    const d1 = this.t(this.domain.max);
    const span = d1 - d0 || 1;
    const frac = (this.t(v) - d0) / span;
    return this.range.min + frac * (this.range.max - this.range.min);
  }

  ticks(): number[] {
    if (this.log) {
      const lo = Math.floor(Math.log10(this.domain.min));
      const hi = Math.ceil(Math.log10(this.domain.max));
      const out: number[] = [];
      const step = Math.max(1, Math.ceil((hi - lo) / 8));
      for (let e = lo; e <= hi; e += step) out.push(10 ** e);
      return out;
    }
    const span = this.domain.max - this.domain.min || 1;
    const step = 10 ** Math.floor(Math.log10(span / 4));
    const mult = span / step > 20 ? 5 : span / step > 8 ? 2 : 1;
    const s = step * mult;
    const start = Math.ceil(this.domain.min / s) * s;
    const out: number[] = [];
    for (let v = start; v <= this.domain.max + 1e-12 * span; v += s) out.push(v);
    return out;
  }
}

function fmtTick(v: number, log: boolean): string {
  if (log) {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  }
  return Number.isInteger(v) ? String(v) : v.toPrecision(3);
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export class Svg {
  private parts: string[] = [];

  constructor(
    readonly width = 720,
    readonly height = 480,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, dashed = false): void {
    const attr = dashed ? ' stroke-dasharray="6 4"' : "";
    const path = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="1.6"${attr} points="${path}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#333", width = 1): void {
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" ` +
        `y2="${y2.toFixed(2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; fill?: string } = {}): void {
    const { size = 11, anchor = "start", fill = "#222" } = opts;
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" ` +
        `text-anchor="${anchor}" fill="${fill}">${escapeXml(content)}</text>`,
    );
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string): void {
    const x0 = xScale.range.min;
    const x1 = xScale.range.max;
    const yBottom = yScale.range.min;
    const yTop = yScale.range.max;
    this.line(x0, yBottom, x1, yBottom);
    this.line(x0, yBottom, x0, yTop);
    for (const t of xScale.ticks()) {
      const x = xScale.map(t);
      this.line(x, yBottom, x, yBottom + 4);
      this.text(x, yBottom + 16, fmtTick(t, xScale.log), { anchor: "middle" });
    }
    for (const t of yScale.ticks()) {
      const y = yScale.map(t);
      this.line(x0 - 4, y, x0, y);
      this.line(x0, y, x1, y, "#eee");
      this.text(x0 - 7, y + 3, fmtTick(t, yScale.log), { anchor: "end" });
    }
    this.text((x0 + x1) / 2, yBottom + 32, xLabel, { anchor: "middle", size: 12 });
    this.parts.push(
      `<text x="14" y="${(yBottom + yTop) / 2}" font-size="12" text-anchor="middle" ` +
        `fill="#222" transform="rotate(-90 14 ${(yBottom + yTop) / 2})">${escapeXml(yLabel)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
