/** CSV reader for the simulator's outputs.
 *
 * Every file starts with a `# scenario=<hash> seed=<seed> version=<v>`
 * comment followed by a header row; fields are plain (no quoting).
 */

export class SchemaMismatch extends Error {}
export class MissingSeries extends Error {}

export interface CsvTable {
  meta: Record<string, string>;
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2 || !lines[0].startsWith("# ")) {
    throw new SchemaMismatch("expected a '# scenario=...' header comment");
  }
  const meta: Record<string, string> = {};
  for (const part of lines[0].slice(2).trim().split(/\s+/)) {
    const eq = part.indexOf("=");
    if (eq > 0) meta[part.slice(0, eq)] = part.slice(eq + 1);
  }
  if (!("scenario" in meta)) {
    throw new SchemaMismatch("header comment carries no scenario hash");
  }
  const columns = lines[1].split(",");
  if (columns.length < 2) {
    throw new SchemaMismatch("header row has fewer than two columns");
  }
  const rows: string[][] = [];
  for (const line of lines.slice(2)) {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaMismatch(
        `row has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    rows.push(cells);
  }
  return { meta, columns, rows };
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new SchemaMismatch(`column '${name}' missing`);
  return idx;
}

export function requireColumns(table: CsvTable, names: string[]): void {
  for (const name of names) columnIndex(table, name);
}

export function num(cell: string): number {
  const v = Number(cell);
  if (!Number.isFinite(v)) throw new SchemaMismatch(`non-numeric cell '${cell}'`);
  return v;
}
