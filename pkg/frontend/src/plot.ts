/** Figure rendering: gradient-norm convergence curves and sweep slope plots. */

import { writeFileSync } from "node:fs";

import { InputError, readSweep, readTrace, SweepRow, TraceRow } from "./csv.js";
import { PALETTE, Scale, Svg } from "./svg.js";

export interface PlotSpec {
  inputs: string[];
  labels?: string[];
  output: string;
  logY?: boolean;
  width?: number;
  height?: number;
}

const MARGIN = { left: 64, right: 16, top: 20, bottom: 48 };

function frame(width: number, height: number): { x: [number, number]; y: [number, number] } {
  return {
    x: [MARGIN.left, width - MARGIN.right],
    y: [height - MARGIN.bottom, MARGIN.top],
  };
}

/** One gradient-norm curve per trace file, restart boundaries marked. */
export function renderTraces(spec: PlotSpec): string {
  if (spec.inputs.length === 0) {
    throw new InputError("at least one trace file is required");
  }
  const logY = spec.logY ?? true;
  const traces: TraceRow[][] = spec.inputs.map((p) => readTrace(p));
  const labels = spec.labels ?? spec.inputs.map((p) => p.replace(/^.*\//, ""));

  let yMin = Infinity;
  let yMax = -Infinity;
  let xMax = 0;
  for (const rows of traces) {
    for (const row of rows) {
      const v = row.gradNormF;
      if (logY && v <= 0) continue;
      yMin = Math.min(yMin, v);
      yMax = Math.max(yMax, v);
    }
    xMax = Math.max(xMax, rows.length ? rows[rows.length - 1].globalIter : 0);
  }
  if (!Number.isFinite(yMin)) {
    throw new InputError("no positive gradient norms to plot on a log axis");
  }

  const width = spec.width ?? 720;
  const height = spec.height ?? 480;
  const fr = frame(width, height);
  const xScale = new Scale({ min: 0, max: Math.max(xMax, 1) }, { min: fr.x[0], max: fr.x[1] }, false);
  const yScale = new Scale({ min: yMin, max: yMax }, { min: fr.y[0], max: fr.y[1] }, logY);

  const svg = new Svg(width, height);
  svg.axes(xScale, yScale, "iteration", "gradient norm");
  traces.forEach((rows, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts: Array<[number, number]> = [];
    for (const row of rows) {
      if (logY && row.gradNormF <= 0) continue;
      pts.push([xScale.map(row.globalIter), yScale.map(row.gradNormF)]);
    }
    svg.polyline(pts, color);
    for (const row of rows) {
      if (row.innerIter === 0 && !(logY && row.gradNormF <= 0)) {
        svg.circle(xScale.map(row.globalIter), yScale.map(row.gradNormF), 2.4, color);
      }
    }
    svg.text(fr.x[1] - 8, fr.y[1] + 14 + 14 * i, labels[i] ?? `trace ${i}`, {
      anchor: "end",
      fill: color,
      size: 12,
    });
  });

  const out = svg.render();
  writeFileSync(spec.output, out);
  return out;
}

function theoreticalExponent(row: SweepRow): number {
  return row.mode === "gap" ? (-2 * (row.p + 1)) / (3 * row.p + 1) : -2 / (3 * row.p + 1);
}

function leastSquaresSlope(xs: number[], ys: number[]): { slope: number; intercept: number } {
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) ** 2;
  }
  const slope = num / den;
  return { slope, intercept: my - slope * mx };
}

/** Log-log scatter of total iterations vs tolerance, fit and reference lines. */
export function renderSweep(input: string, output: string, size?: { width: number; height: number }): string {
  const rows = readSweep(input);
  if (rows.length < 3) {
    throw new InputError(`${input}: need at least 3 sweep points, got ${rows.length}`);
  }
  const xs = rows.map((r) => Math.log10(r.eps));
  const ys = rows.map((r) => Math.log10(Math.max(r.totalInnerIterations, 1)));
  const { slope, intercept } = leastSquaresSlope(xs, ys);
  const ref = theoreticalExponent(rows[0]);

  const width = size?.width ?? 720;
  const height = size?.height ?? 480;
  const fr = frame(width, height);
  const xScale = new Scale(
    { min: Math.min(...rows.map((r) => r.eps)), max: Math.max(...rows.map((r) => r.eps)) },
    { min: fr.x[0], max: fr.x[1] },
    true,
  );
  const tMin = Math.min(...rows.map((r) => r.totalInnerIterations));
  const tMax = Math.max(...rows.map((r) => r.totalInnerIterations));
  const yScale = new Scale(
    { min: tMin / 2, max: tMax * 2 },
    { min: fr.y[0], max: fr.y[1] },
    true,
  );

  const svg = new Svg(width, height);
  svg.axes(xScale, yScale, "tolerance", "total inner iterations");

  const fitPts: Array<[number, number]> = [];
  const refPts: Array<[number, number]> = [];
  const mx = xs.reduce((a, b) => a + b, 0) / xs.length;
  const my = ys.reduce((a, b) => a + b, 0) / ys.length;
  for (const lx of [Math.min(...xs), Math.max(...xs)]) {
    fitPts.push([xScale.map(10 ** lx), yScale.map(10 ** (intercept + slope * lx))]);
    refPts.push([xScale.map(10 ** lx), yScale.map(10 ** (my + ref * (lx - mx)))]);
  }
  svg.polyline(fitPts, "#1f77b4");
  svg.polyline(refPts, "#d62728", true);
  for (const row of rows) {
    svg.circle(xScale.map(row.eps), yScale.map(row.totalInnerIterations), 3.4, "#1f77b4");
  }
  svg.text(fr.x[0] + 10, fr.y[1] + 14, `fitted slope ${slope.toFixed(3)}`, {
    fill: "#1f77b4",
    size: 12,
  });
  svg.text(fr.x[0] + 10, fr.y[1] + 30, `reference slope ${ref.toFixed(1)} (${rows[0].mode} mode)`, {
    fill: "#d62728",
    size: 12,
  });

  const out = svg.render();
  writeFileSync(output, out);
  return out;
}
