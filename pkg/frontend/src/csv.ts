/**
 * Readers for the nlkglab output formats.
 *
 * Every file is self-describing: comment lines of the form `# key = value`
 * carry the producing configuration (and, for trajectory and functional
 * files, fitted scalars in a trailer).  CSV bodies are plain comma tables;
 * checkpoint state files are two whitespace columns with no header row.
 */
import Papa from "papaparse";

export class SchemaError extends Error {}
export class EmptySeriesError extends Error {}

export interface Table {
  /** merged `key = value` pairs from all comment lines, verbatim strings */
  meta: Record<string, string>;
  columns: string[];
  rows: Record<string, unknown>[];
  /** basename of the source file, used for overlay legends */
  label: string;
}

export interface StateFile {
  meta: Record<string, string>;
  x: number[];
  u1: number[];
  u2: number[];
  label: string;
}

function splitComments(text: string): { meta: Record<string, string>; body: string[] } {
  const meta: Record<string, string> = {};
  const body: string[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("#")) {
      const inner = line.slice(1).trim();
      const eq = inner.indexOf("=");
      if (eq > 0) {
        meta[inner.slice(0, eq).trim()] = inner.slice(eq + 1).trim();
      }
    } else if (line.trim() !== "") {
      body.push(line);
    }
  }
  return { meta, body };
}

export function parseTable(text: string, label: string): Table {
  const { meta, body } = splitComments(text);
  if (body.length === 0) {
    throw new EmptySeriesError(`${label}: no CSV content`);
  }
  const parsed = Papa.parse<Record<string, unknown>>(body.join("\n"), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${label}: ${e.message} (row ${e.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  if (parsed.data.length === 0) {
    throw new EmptySeriesError(`${label}: header only, no data rows`);
  }
  return { meta, columns, rows: parsed.data, label };
}

/** Numeric column accessor; throws SchemaError when the column is absent. */
export function column(table: Table, name: string): number[] {
  if (!table.columns.includes(name)) {
    throw new SchemaError(
      `${table.label}: missing column "${name}" (has: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((r) => {
    const v = r[name];
    return typeof v === "number" ? v : Number(v);
  });
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(
        `${table.label}: missing column "${name}" (has: ${table.columns.join(", ")})`,
      );
    }
  }
}

/** Checkpoint state file: `# key = value` header, then `u1 u2` rows. */
export function parseState(text: string, label: string): StateFile {
  const { meta, body } = splitComments(text);
  if (body.length === 0) {
    throw new EmptySeriesError(`${label}: no state rows`);
  }
  const u1: number[] = [];
  const u2: number[] = [];
  for (const line of body) {
    const parts = line.trim().split(/\s+/);
    if (parts.length !== 2) {
      throw new SchemaError(`${label}: expected two columns, got "${line}"`);
    }
    u1.push(Number(parts[0]));
    u2.push(Number(parts[1]));
  }
  const L = Number(meta["L"]);
  const n = Number(meta["n"]);
  if (!Number.isFinite(L) || !Number.isFinite(n)) {
    throw new SchemaError(`${label}: header must carry L and n`);
  }
  if (u1.length !== n) {
    throw new SchemaError(`${label}: ${u1.length} rows but header n = ${n}`);
  }
  // node grid on [0, L] with spacing L/(n-1), matching the producer
  const dx = L / (n - 1);
  const x = u1.map((_, k) => k * dx);
  return { meta, x, u1, u2, label };
}
