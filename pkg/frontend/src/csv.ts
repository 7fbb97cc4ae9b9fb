/**
 * Strict CSV reading for the harness output schemas.
 *
 * The harness writes plain comma-separated numeric tables with a header row
 * and no quoting; anything else is a schema violation worth failing loudly
 * on, naming the offending column.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV input");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`row ${i + 1} has ${cells.length} cells, expected ${columns.length}`);
    }
    return cells;
  });
  return { columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Column values as numbers; throws a SchemaError naming a missing column. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}' (found: ${table.columns.join(", ")})`);
  }
  return table.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new SchemaError(`column '${name}' row ${i + 1} is not numeric: '${row[idx]}'`);
    }
    return value;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}' (found: ${table.columns.join(", ")})`);
  }
  return table.rows.map((row) => row[idx]);
}

export function readJson(path: string): any {
  return JSON.parse(readFileSync(path, "utf8"));
}
