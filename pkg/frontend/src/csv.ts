/**
 * Parsers for the simulator's CSV outputs.
 *
 * The files are plain comma-separated numerics with a fixed header (no
 * quoting), so a hand-rolled split is all that is needed. Schema violations
 * throw SchemaError naming the offending column or row; the renderers are
 * read-only consumers and never touch the files themselves.
 */

export interface TimeseriesRow {
  time_s: number;
  algorithm: string;
  absorbed: number;
  fraction: number;
  analytic_fraction: number;
}

export interface DistributionRow {
  step: number;
  time_s: number;
  newly_absorbed: number;
  probability: number;
}

export interface SummaryRow {
  step: number;
  time_s: number;
  mean: number;
  variance: number;
  analytic_increment: number;
}

export class SchemaError extends Error {
  constructor(message: string, readonly column?: string) {
    super(message);
    this.name = "SchemaError";
  }
}

const TIMESERIES_COLUMNS = ["time_s", "algorithm", "absorbed", "fraction", "analytic_fraction"];
const DISTRIBUTION_COLUMNS = ["step", "time_s", "newly_absorbed", "probability"];
const SUMMARY_COLUMNS = ["step", "time_s", "mean", "variance", "analytic_increment"];

interface RawCsv {
  header: string[];
  rows: string[][];
}

function splitCsv(text: string, what: string): RawCsv {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${what}: file is empty`);
  }
  const header = lines[0].split(",").map((col) => col.trim());
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new SchemaError(`${what}: no data rows`);
  }
  return { header, rows };
}

/** Maps required column names to their indices; missing columns are errors. */
function columnIndex(raw: RawCsv, required: string[], what: string): Map<string, number> {
  const index = new Map<string, number>();
  for (const name of required) {
    const at = raw.header.indexOf(name);
    if (at < 0) {
      throw new SchemaError(`${what}: missing column: ${name}`, name);
    }
    index.set(name, at);
  }
  return index;
}

function numberAt(cells: string[], at: number, column: string, row: number): number {
  const value = Number(cells[at]);
  if (cells[at] === undefined || cells[at].trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(
      `column ${column}, data row ${row + 1}: not a number: ${JSON.stringify(cells[at])}`,
      column,
    );
  }
  return value;
}

export function parseTimeseries(text: string): TimeseriesRow[] {
  const raw = splitCsv(text, "timeseries");
  const at = columnIndex(raw, TIMESERIES_COLUMNS, "timeseries");
  return raw.rows.map((cells, row) => ({
    time_s: numberAt(cells, at.get("time_s")!, "time_s", row),
    algorithm: (cells[at.get("algorithm")!] ?? "").trim(),
    absorbed: numberAt(cells, at.get("absorbed")!, "absorbed", row),
    fraction: numberAt(cells, at.get("fraction")!, "fraction", row),
    analytic_fraction: numberAt(cells, at.get("analytic_fraction")!, "analytic_fraction", row),
  }));
}

export function parseDistribution(text: string): DistributionRow[] {
  const raw = splitCsv(text, "distribution");
  const at = columnIndex(raw, DISTRIBUTION_COLUMNS, "distribution");
  return raw.rows.map((cells, row) => ({
    step: numberAt(cells, at.get("step")!, "step", row),
    time_s: numberAt(cells, at.get("time_s")!, "time_s", row),
    newly_absorbed: numberAt(cells, at.get("newly_absorbed")!, "newly_absorbed", row),
    probability: numberAt(cells, at.get("probability")!, "probability", row),
  }));
}

export function parseSummary(text: string): SummaryRow[] {
  const raw = splitCsv(text, "summary");
  const at = columnIndex(raw, SUMMARY_COLUMNS, "summary");
  return raw.rows.map((cells, row) => ({
    step: numberAt(cells, at.get("step")!, "step", row),
    time_s: numberAt(cells, at.get("time_s")!, "time_s", row),
    mean: numberAt(cells, at.get("mean")!, "mean", row),
    variance: numberAt(cells, at.get("variance")!, "variance", row),
    analytic_increment: numberAt(cells, at.get("analytic_increment")!, "analytic_increment", row),
  }));
}

/** Per-step probability masses should sum to 1; returns a warning per bad step. */
export function probabilitySumWarnings(rows: DistributionRow[], tolerance = 1e-9): string[] {
  const totals = new Map<number, number>();
  for (const row of rows) {
    totals.set(row.step, (totals.get(row.step) ?? 0) + row.probability);
  }
  const warnings: string[] = [];
  for (const [step, total] of [...totals.entries()].sort((a, b) => a[0] - b[0])) {
    if (Math.abs(total - 1) > tolerance) {
      warnings.push(`step ${step}: probabilities sum to ${total}, not 1`);
    }
  }
  return warnings;
}
