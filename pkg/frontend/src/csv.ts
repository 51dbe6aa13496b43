import Papa from "papaparse";

/** Raised when a CSV does not match the documented schema for its figure. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
}

/** Parse RFC-4180 CSV text into a header row plus data rows. */
export function parseCsv(text: string): Table {
  const res = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (res.errors.length > 0) {
    throw new SchemaError(`CSV parse error: ${res.errors[0].message}`);
  }
  const data = res.data as string[][];
  if (data.length === 0) {
    throw new SchemaError("CSV is empty: no header row");
  }
  return { header: data[0], rows: data.slice(1) };
}

/**
 * Check the header against the documented schema and return a name -> index
 * lookup.  Any mismatch is a hard error carrying the offending diff; silent
 * reinterpretation of columns is never attempted.
 */
export function requireColumns(table: Table, required: string[], kind: string): Map<string, number> {
  const have = new Set(table.header);
  const missing = required.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `schema mismatch for figure '${kind}': missing columns [${missing.join(", ")}]; ` +
        `header has [${table.header.join(", ")}]`,
    );
  }
  const idx = new Map<string, number>();
  table.header.forEach((name, i) => idx.set(name, i));
  return idx;
}

export function requireRows(table: Table, kind: string): void {
  if (table.rows.length === 0) {
    throw new SchemaError(`no data rows for figure '${kind}'`);
  }
}

export function num(value: string): number {
  if (value === "" || value === undefined) return NaN;
  if (value === "inf") return Infinity;
  if (value === "-inf") return -Infinity;
  const x = Number(value);
  if (Number.isNaN(x)) {
    throw new SchemaError(`expected a number, got '${value}'`);
  }
  return x;
}
