/** CSV reader for smoothtm outputs: '#' comment lines, one header row,
 * numeric cells where they parse as finite numbers. */
import { readFileSync } from "node:fs";

export type Row = Record<string, number | string>;

export function readCsv(path: string): Row[] {
  const lines = readFileSync(path, "utf8").split(/\r?\n/)
    .filter((l) => l.length > 0 && !l.startsWith("#"));
  if (lines.length === 0) throw new Error(`${path}: empty csv`);
  const header = lines[0].split(",").map((h) => h.trim());
  const rows: Row[] = [];
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`${path}: ragged row ${JSON.stringify(line)}`);
    }
    const row: Row = {};
    header.forEach((h, i) => {
      const v = Number(cells[i]);
      row[h] = Number.isFinite(v) && cells[i].trim() !== "" ? v : cells[i];
    });
    rows.push(row);
  }
  return rows;
}

export function numbers(rows: Row[], col: string): number[] {
  return rows.map((r) => {
    const v = r[col];
    if (typeof v !== "number") {
      throw new Error(`column ${col} missing or non-numeric`);
    }
    return v;
  });
}

export function requireColumns(rows: Row[], cols: string[], what: string): void {
  for (const c of cols) {
    if (rows.length === 0 || !(c in rows[0])) {
      throw new Error(`${what}: missing column ${c}`);
    }
  }
}
