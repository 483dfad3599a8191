import { readFileSync } from "node:fs";

/** Parse failure pinned to a file and 1-based line number. */
export class CsvError extends Error {
  readonly file: string;
  readonly line: number;

  constructor(file: string, line: number, message: string) {
    super(`${file}:${line}: ${message}`);
    this.name = "CsvError";
    this.file = file;
    this.line = line;
  }
}

export interface Table {
  file: string;
  /** column names from the first non-comment line */
  columns: string[];
  /** raw string cells, one entry per data row */
  rows: string[][];
  /** 1-based source line of each data row, for error reporting */
  rowLines: number[];
  /** "# name: value" comment entries other than config */
  meta: Map<string, string>;
  /** "# config: section.key = value" entries */
  config: Map<string, string>;
}

function splitComments(file: string, text: string) {
  const meta = new Map<string, string>();
  const config = new Map<string, string>();
  const data: Array<{ line: number; cells: string[] }> = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!;
    if (line === "" && i === lines.length - 1) continue; // trailing newline
    if (line.startsWith("#")) {
      const body = line.replace(/^#\s*/, "");
      const colon = body.indexOf(":");
      if (colon < 0) throw new CsvError(file, i + 1, "comment line without a key");
      const key = body.slice(0, colon).trim();
      const value = body.slice(colon + 1).trim();
      if (key === "config") {
        const eq = value.indexOf("=");
        if (eq < 0) throw new CsvError(file, i + 1, "config line without '='");
        config.set(value.slice(0, eq).trim(), value.slice(eq + 1).trim());
      } else {
        meta.set(key, value);
      }
      continue;
    }
    data.push({ line: i + 1, cells: line.split(",") });
  }
  return { meta, config, data };
}

/** Read a table whose first non-comment line names the columns. */
export function readTable(path: string): Table {
  const text = readFileSync(path, "utf8");
  const { meta, config, data } = splitComments(path, text);
  if (data.length === 0) throw new CsvError(path, 1, "no data rows");
  const header = data[0]!;
  const columns = header.cells;
  const rows: string[][] = [];
  const rowLines: number[] = [];
  for (const { line, cells } of data.slice(1)) {
    if (cells.length !== columns.length) {
      throw new CsvError(
        path, line,
        `expected ${columns.length} cells, found ${cells.length}`,
      );
    }
    rows.push(cells);
    rowLines.push(line);
  }
  return { file: path, columns, rows, rowLines, meta, config };
}

export function parseNumber(file: string, line: number, cell: string): number {
  const value = Number(cell);
  if (cell.trim() === "" || Number.isNaN(value)) {
    throw new CsvError(file, line, `not a number: '${cell}'`);
  }
  return value;
}

/** Numeric column by name, with per-cell errors. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(table.file, 1, `missing column '${name}'`);
  }
  return table.rows.map((cells, r) =>
    parseNumber(table.file, table.rowLines[r]!, cells[idx]!),
  );
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(table.file, 1, `missing column '${name}'`);
  }
  return table.rows.map((cells) => cells[idx]!);
}

export interface Matrix {
  file: string;
  meta: Map<string, string>;
  config: Map<string, string>;
  /** named axis comment, parsed to floats */
  axis: (name: string) => number[];
  values: number[][];
}

/** Read a headerless numeric matrix with axes stored as comment lines. */
export function readMatrix(path: string): Matrix {
  const text = readFileSync(path, "utf8");
  const { meta, config, data } = splitComments(path, text);
  if (data.length === 0) throw new CsvError(path, 1, "no data rows");
  const values = data.map(({ line, cells }) =>
    cells.map((c) => parseNumber(path, line, c)),
  );
  const width = values[0]!.length;
  for (let r = 1; r < values.length; r++) {
    if (values[r]!.length !== width) {
      throw new CsvError(
        path, data[r]!.line,
        `expected ${width} cells, found ${values[r]!.length}`,
      );
    }
  }
  const axis = (name: string): number[] => {
    const raw = meta.get(name);
    if (raw === undefined) {
      throw new CsvError(path, 1, `missing '# ${name}:' header`);
    }
    return raw.split(",").map((c) => parseNumber(path, 1, c));
  };
  return { file: path, meta, config, axis, values };
}
