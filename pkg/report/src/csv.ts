/**
 * Frozen-schema CSV access.
 *
 * Values stay strings end to end: the report must never reformat a number,
 * so every cell it emits can be grepped back into the source CSVs verbatim.
 */

import fs from "node:fs";
import Papa from "papaparse";

export const SCHEMA = [
  "experiment_id",
  "case",
  "k_index",
  "k_mag",
  "lambda",
  "alpha",
  "beta",
  "estimator",
  "value",
  "stderr",
  "bound",
  "pass",
  "n_paths",
  "seed",
] as const;

export const FIT_SCHEMA = [
  "sweep_id",
  "exponent",
  "half_width",
  "r2",
  "expected_exponent",
  "pass",
] as const;

export type Row = Record<string, string>;

export class SchemaError extends Error {
  constructor(public column: string, path: string) {
    super(`schema mismatch in ${path}: column '${column}'`);
  }
}

export function readCsv(path: string, schema: readonly string[] = SCHEMA): Row[] {
  const text = fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((ln) => !ln.startsWith("#"))
    .join("\n");
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new Error(`parse error in ${path}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  const header = rows[0];
  for (const col of schema) {
    if (!header.includes(col)) throw new SchemaError(col, path);
  }
  for (const col of header) {
    if (!schema.includes(col)) throw new SchemaError(col, path);
  }
  return rows.slice(1).map((cells) => {
    const rec: Row = {};
    header.forEach((h, i) => (rec[h] = cells[i] ?? ""));
    return rec;
  });
}

/** Numeric view of a string cell for plot geometry only. */
export function num(cell: string): number {
  return Number(cell);
}
