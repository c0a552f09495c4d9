/** Figure construction from the simulator's CSV outputs: BER vs SNR,
 * sum-rate vs SNR, per-user-rate CDF, and a text table in the BER-vs-CSI
 * layout. Rendering is a pure function of CSV content. */

import {
  columnIndex,
  CsvTable,
  MissingSeries,
  num,
  parseCsv,
  requireColumns,
  SchemaMismatch,
} from "./csv.js";
import { renderPlot, Series } from "./svg.js";

export interface SeriesSpec {
  precoder: string;
  pa: string;
  label?: string;
}

export interface FigureSpec {
  kind: "ber" | "sumrate" | "cdf" | "table";
  input: string;
  output: string;
  series: SeriesSpec[];
  title?: string;
  /** filter rows to one CSI-quality value when the CSV holds several */
  n?: number;
  /** table kind: SNR point to tabulate */
  snrDb?: number;
  /** cdf kind: probability levels to mark, e.g. [0.95] */
  percentileMarkers?: number[];
}

export function validateSpec(raw: unknown): FigureSpec {
  const spec = raw as Partial<FigureSpec>;
  if (!spec || typeof spec !== "object") {
    throw new SchemaMismatch("figure spec must be an object");
  }
  if (!["ber", "sumrate", "cdf", "table"].includes(spec.kind as string)) {
    throw new SchemaMismatch(`unknown figure kind '${spec.kind}'`);
  }
  if (typeof spec.input !== "string" || typeof spec.output !== "string") {
    throw new SchemaMismatch("figure spec needs input and output paths");
  }
  if (!Array.isArray(spec.series) || spec.series.length === 0) {
    throw new SchemaMismatch("figure spec needs a non-empty series list");
  }
  for (const s of spec.series) {
    if (typeof s.precoder !== "string" || typeof s.pa !== "string") {
      throw new SchemaMismatch("each series needs precoder and pa");
    }
  }
  return spec as FigureSpec;
}

function seriesKey(s: SeriesSpec): string {
  return `${s.precoder}+${s.pa}`;
}

function seriesLabel(s: SeriesSpec): string {
  return s.label ?? `${s.precoder} ${s.pa}`;
}

function filterRows(table: CsvTable, spec: FigureSpec, s: SeriesSpec): string[][] {
  const ip = columnIndex(table, "precoder");
  const ia = columnIndex(table, "pa");
  const iN = columnIndex(table, "n");
  const rows = table.rows.filter(
    (r) =>
      r[ip] === s.precoder &&
      r[ia] === s.pa &&
      (spec.n === undefined || num(r[iN]) === spec.n),
  );
  if (rows.length === 0) {
    throw new MissingSeries(
      `series ${seriesKey(s)}${spec.n !== undefined ? ` (n=${spec.n})` : ""} not in CSV`,
    );
  }
  return rows;
}

function berFigure(spec: FigureSpec, table: CsvTable): string {
  requireColumns(table, ["snr_db", "precoder", "pa", "n", "ber", "stderr", "bits"]);
  const iS = columnIndex(table, "snr_db");
  const iB = columnIndex(table, "ber");
  const iE = columnIndex(table, "stderr");
  const series: Series[] = spec.series.map((s) => {
    const pts = filterRows(table, spec, s)
      .map((r) => {
        const ber = num(r[iB]);
        const se = num(r[iE]);
        return {
          x: num(r[iS]),
          y: ber,
          ylo: Math.max(ber - 2 * se, 1e-12),
          yhi: ber + 2 * se,
        };
      })
      .sort((a, b) => a.x - b.x);
    return { key: seriesKey(s), label: seriesLabel(s), points: pts };
  });
  return renderPlot({
    title: spec.title ?? "BER vs SNR",
    xLabel: "SNR (dB)",
    yLabel: "BER",
    logY: true,
    series,
  });
}

function sumrateFigure(spec: FigureSpec, table: CsvTable): string {
  requireColumns(table, ["snr_db", "precoder", "pa", "n", "sum_rate"]);
  const iS = columnIndex(table, "snr_db");
  const iR = columnIndex(table, "sum_rate");
  const series: Series[] = spec.series.map((s) => ({
    key: seriesKey(s),
    label: seriesLabel(s),
    points: filterRows(table, spec, s)
      .map((r) => ({ x: num(r[iS]), y: num(r[iR]) }))
      .sort((a, b) => a.x - b.x),
  }));
  return renderPlot({
    title: spec.title ?? "Sum-rate vs SNR",
    xLabel: "SNR (dB)",
    yLabel: "Sum-rate (bits/s/Hz)",
    logY: false,
    series,
  });
}

function cdfFigure(spec: FigureSpec, table: CsvTable): string {
  requireColumns(table, ["precoder", "pa", "n", "rate_sample"]);
  const iR = columnIndex(table, "rate_sample");
  const markers: Array<{ x: number; y: number; label: string }> = [];
  const series: Series[] = spec.series.map((s) => {
    const samples = filterRows(table, spec, s)
      .map((r) => num(r[iR]))
      .sort((a, b) => a - b);
    const k = samples.length;
    const step = Math.max(1, Math.floor(k / 400)); // decimate large sample sets
    const pts: Array<{ x: number; y: number }> = [];
    for (let i = 0; i < k; i += step) {
      pts.push({ x: samples[i], y: (i + 1) / k });
    }
    pts.push({ x: samples[k - 1], y: 1.0 });
    for (const p of spec.percentileMarkers ?? []) {
      const idx = Math.min(k - 1, Math.max(0, Math.ceil(p * k) - 1));
      markers.push({
        x: samples[idx],
        y: p,
        label: `${seriesLabel(s)} p${Math.round(p * 100)}`,
      });
    }
    return { key: seriesKey(s), label: seriesLabel(s), points: pts };
  });
  return renderPlot({
    title: spec.title ?? "CDF vs per-user rate",
    xLabel: "Per-user rate (bits/s/Hz)",
    yLabel: "CDF",
    logY: false,
    series,
    markers,
  });
}

function tableText(spec: FigureSpec, table: CsvTable): string {
  requireColumns(table, ["snr_db", "precoder", "pa", "n", "ber"]);
  const iS = columnIndex(table, "snr_db");
  const iN = columnIndex(table, "n");
  const iB = columnIndex(table, "ber");
  const snr =
    spec.snrDb ?? Math.max(...table.rows.map((r) => num(r[iS])));
  const nValues = [...new Set(table.rows.map((r) => num(r[iN])))].sort(
    (a, b) => b - a,
  );
  const cells = new Map<string, string>();
  for (const s of spec.series) {
    for (const row of filterRows(table, spec, s)) {
      if (num(row[iS]) === snr) {
        cells.set(`${s.precoder}|${num(row[iN])}`, num(row[iB]).toExponential(2));
      }
    }
  }
  const precoders = [...new Set(spec.series.map((s) => s.precoder))];
  const colw = 12;
  const lines: string[] = [];
  lines.push(spec.title ?? `BER at SNR = ${snr} dB`);
  lines.push(
    "".padEnd(8) + nValues.map((n) => `n = ${n}`.padStart(colw)).join(""),
  );
  for (const prec of precoders) {
    const row = nValues.map((n) =>
      (cells.get(`${prec}|${n}`) ?? "-").padStart(colw),
    );
    lines.push(prec.padEnd(8) + row.join(""));
  }
  return lines.join("\n") + "\n";
}

export function renderFigure(spec: FigureSpec, csvText: string): string {
  const table = parseCsv(csvText);
  switch (spec.kind) {
    case "ber":
      return berFigure(spec, table);
    case "sumrate":
      return sumrateFigure(spec, table);
    case "cdf":
      return cdfFigure(spec, table);
    case "table":
      return tableText(spec, table);
  }
}
