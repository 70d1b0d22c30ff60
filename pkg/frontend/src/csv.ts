/** CSV ingestion for the bench trace and sweep contracts. */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}
export class InputError extends Error {}

export const TRACE_HEADER = [
  "restart_index",
  "global_iter",
  "inner_iter",
  "L",
  "f_value",
  "grad_norm_f",
  "grad_norm_reg",
  "tensor_trials_cum",
  "wall_seconds",
] as const;

export const SWEEP_HEADER = [
  "eps",
  "mode",
  "p",
  "total_inner_iterations",
  "restarts",
  "final_grad_norm",
  "guarantee_met",
] as const;

export interface TraceRow {
  restartIndex: number;
  globalIter: number;
  innerIter: number;
  fValue: number;
  gradNormF: number;
  gradNormReg: number;
}

export interface SweepRow {
  eps: number;
  mode: string;
  p: number;
  totalInnerIterations: number;
}

function parseCsv(path: string): { header: string[]; records: string[][] } {
  const text = readFileSync(path, "utf8").trim();
  if (text.length === 0) {
    throw new SchemaError(`${path}: empty CSV`);
  }
  const lines = text.split(/\r?\n/);
  const header = lines[0].split(",");
  const records = lines.slice(1).map((line) => line.split(","));
  return { header, records };
}

function columnIndex(
  path: string,
  header: string[],
  expected: readonly string[],
): Map<string, number> {
  const index = new Map<string, number>();
  for (const column of expected) {
    const at = header.indexOf(column);
    if (at < 0) {
      throw new SchemaError(`${path}: missing column '${column}'`);
    }
    index.set(column, at);
  }
  return index;
}

export function readTrace(path: string): TraceRow[] {
  const { header, records } = parseCsv(path);
  const col = columnIndex(path, header, TRACE_HEADER);
  const num = (record: string[], name: string) => Number(record[col.get(name)!]);
  return records.map((record) => ({
    restartIndex: num(record, "restart_index"),
    globalIter: num(record, "global_iter"),
    innerIter: num(record, "inner_iter"),
    fValue: num(record, "f_value"),
    gradNormF: num(record, "grad_norm_f"),
    gradNormReg: num(record, "grad_norm_reg"),
  }));
}

export function readSweep(path: string): SweepRow[] {
  const { header, records } = parseCsv(path);
  const col = columnIndex(path, header, SWEEP_HEADER);
  return records.map((record) => ({
    eps: Number(record[col.get("eps")!]),
    mode: record[col.get("mode")!],
    p: Number(record[col.get("p")!]),
    totalInnerIterations: Number(record[col.get("total_inner_iterations")!]),
  }));
}
