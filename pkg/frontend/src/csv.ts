/**
 * Minimal CSV reader for the platoonshape output schemas.
 *
 * Files are plain comma-separated tables with a fixed header row; numeric
 * cells may be empty (lead-only trace fields), which parse to NaN.
 */

export interface Table {
  columns: string[];
  /** column name -> values, row-aligned; empty cells are NaN */
  data: Map<string, number[]>;
  /** raw string cells for non-numeric columns (e.g. parity) */
  text: Map<string, string[]>;
  rowCount: number;
}

export class SchemaError extends Error {
  constructor(public readonly file: string, public readonly missing: string[], present: string[]) {
    super(
      `${file}: missing required column(s) [${missing.join(", ")}]; ` +
      `header has [${present.join(", ")}]`,
    );
  }
}

export function parseCsv(content: string): Table {
  const lines = content.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const columns = lines[0].split(",");
  const data = new Map<string, number[]>();
  const text = new Map<string, string[]>();
  for (const col of columns) {
    data.set(col, []);
    text.set(col, []);
  }
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(`row ${i} has ${cells.length} cells, header has ${columns.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      const cell = cells[j];
      text.get(columns[j])!.push(cell);
      data.get(columns[j])!.push(cell === "" ? NaN : Number(cell));
    }
  }
  return { columns, data, text, rowCount: lines.length - 1 };
}

/** Validate that every required column exists before any drawing happens. */
export function requireColumns(table: Table, required: string[], file: string): void {
  const missing = required.filter((col) => !table.columns.includes(col));
  if (missing.length > 0) {
    throw new SchemaError(file, missing, table.columns);
  }
}

export function column(table: Table, name: string): number[] {
  const values = table.data.get(name);
  if (!values) {
    throw new Error(`no column ${name}`);
  }
  return values;
}

/** Split a trace table into per-vehicle row index lists, in file order. */
export function groupByVehicle(table: Table): Map<number, number[]> {
  const ids = column(table, "i");
  const groups = new Map<number, number[]>();
  for (let row = 0; row < table.rowCount; row++) {
    const id = ids[row];
    if (!groups.has(id)) {
      groups.set(id, []);
    }
    groups.get(id)!.push(row);
  }
  return groups;
}
