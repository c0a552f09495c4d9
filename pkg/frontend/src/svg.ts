/** Deterministic SVG plot builder: fixed layout, fixed fonts, fixed number
 * formatting, no timestamps, so identical data renders identical bytes. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { left: 70, right: 160, top: 40, bottom: 55 };

const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

/** style keyed by precoder+pa so a series always looks the same */
const PALETTE: Record<string, string> = {
  "RMMSE+OPA": "#c0392b",
  "RMMSE+UPA": "#e67e22",
  "MMSE+OPA": "#2980b9",
  "MMSE+UPA": "#16a085",
  "ZF+OPA": "#8e44ad",
  "ZF+UPA": "#2c3e50",
  "CB+OPA": "#7f8c8d",
  "CB+UPA": "#95a5a6",
};

export function seriesColor(key: string): string {
  return PALETTE[key] ?? "#000000";
}

export function fmt(x: number): string {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (a >= 0.01 && a < 10000) {
    return String(Number(x.toPrecision(5)));
  }
  return x.toExponential(3);
}

export interface Scale {
  (v: number): number;
  ticks: number[];
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi === lo) {
    hi = lo + 1;
  }
  const f = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  const step = niceStep((hi - lo) / 6);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * Math.abs(step); t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  f.ticks = ticks;
  return f;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const f = ((v: number) =>
    outLo + ((Math.log10(v) - llo) / (lhi - llo || 1)) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.floor(llo); e <= Math.ceil(lhi); e += 1) {
    const t = Math.pow(10, e);
    if (t >= lo / 1.0001 && t <= hi * 1.0001) ticks.push(t);
  }
  f.ticks = ticks;
  return f;
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(raw) || 1)));
  const r = raw / mag;
  const n = r >= 5 ? 10 : r >= 2 ? 5 : r >= 1 ? 2 : 1;
  return n * mag;
}

export interface Series {
  key: string;
  label: string;
  points: Array<{ x: number; y: number; ylo?: number; yhi?: number }>;
}

export interface PlotSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  series: Series[];
  markers?: Array<{ x: number; y: number; label: string }>;
}

export function renderPlot(spec: PlotSpec): string {
  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = spec.series.flatMap((s) =>
    s.points.flatMap((p) => [p.y, p.ylo ?? p.y, p.yhi ?? p.y]),
  );
  const posYs = ys.filter((y) => y > 0);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = spec.logY ? Math.min(...posYs) : Math.min(...ys, 0);
  const yHi = spec.logY ? Math.max(...posYs) : Math.max(...ys);

  const sx = linearScale(xLo, xHi, MARGIN.left, MARGIN.left + PLOT_W);
  const sy = spec.logY
    ? logScale(yLo, yHi, MARGIN.top + PLOT_H, MARGIN.top)
    : linearScale(yLo, yHi * 1.05, MARGIN.top + PLOT_H, MARGIN.top);

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="monospace" font-size="12">`,
  );
  out.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  out.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${esc(spec.title)}</text>`,
  );

  // frame
  const x0 = MARGIN.left;
  const x1 = MARGIN.left + PLOT_W;
  const y0 = MARGIN.top;
  const y1 = MARGIN.top + PLOT_H;
  out.push(
    `<rect x="${x0}" y="${y0}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#333333"/>`,
  );

  for (const t of sx.ticks) {
    const px = fmt2(sx(t));
    out.push(`<line x1="${px}" y1="${y1}" x2="${px}" y2="${y1 + 5}" stroke="#333333"/>`);
    out.push(
      `<text x="${px}" y="${y1 + 18}" text-anchor="middle">${fmt(t)}</text>`,
    );
    out.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#dddddd" stroke-dasharray="2,4"/>`,
    );
  }
  for (const t of sy.ticks) {
    const py = fmt2(sy(t));
    out.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333333"/>`);
    out.push(
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text>`,
    );
    out.push(
      `<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#dddddd" stroke-dasharray="2,4"/>`,
    );
  }
  out.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle">${esc(spec.xLabel)}</text>`,
  );
  out.push(
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${esc(spec.yLabel)}</text>`,
  );

  spec.series.forEach((s, idx) => {
    const color = seriesColor(s.key);
    const pts = s.points
      .filter((p) => !spec.logY || p.y > 0)
      .map((p) => `${fmt2(sx(p.x))},${fmt2(sy(p.y))}`)
      .join(" ");
    out.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    for (const p of s.points) {
      if (spec.logY && p.y <= 0) continue;
      out.push(
        `<circle cx="${fmt2(sx(p.x))}" cy="${fmt2(sy(p.y))}" r="3" fill="${color}"/>`,
      );
      if (p.ylo !== undefined && p.yhi !== undefined && p.ylo > 0) {
        out.push(
          `<line x1="${fmt2(sx(p.x))}" y1="${fmt2(sy(p.ylo))}" ` +
            `x2="${fmt2(sx(p.x))}" y2="${fmt2(sy(p.yhi))}" stroke="${color}"/>`,
        );
      }
    }
    const ly = y0 + 16 * idx + 10;
    out.push(
      `<line x1="${x1 + 10}" y1="${ly - 4}" x2="${x1 + 34}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="1.8"/>`,
    );
    out.push(`<text x="${x1 + 40}" y="${ly}">${esc(s.label)}</text>`);
  });

  for (const m of spec.markers ?? []) {
    out.push(
      `<circle cx="${fmt2(sx(m.x))}" cy="${fmt2(sy(m.y))}" r="4" fill="none" stroke="#000000"/>`,
    );
    out.push(
      `<text x="${fmt2(sx(m.x) + 6)}" y="${fmt2(sy(m.y) - 6)}">${esc(m.label)}</text>`,
    );
  }

  out.push("</svg>");
  return out.join("\n") + "\n";
}

function fmt2(v: number): string {
  return String(Math.round(v * 100) / 100);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
