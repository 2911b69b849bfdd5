/**
 * Deterministic SVG chart builder: fixed canvas, fixed fonts, fixed number
 * formatting, no timestamps. Same input data renders byte-identical files.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  kind: "line" | "scatter";
  /** draw every nth point (scatter thinning); default 1 */
  stride?: number;
  dash?: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  /** single emphasized point, e.g. a curve minimum */
  marker?: { x: number; y: number; label: string };
}

const W = 720;
const H = 480;
const M = { left: 72, right: 24, top: 44, bottom: 56 };

function fmt(value: number): string {
  // fixed-precision grid coordinates keep the output byte-stable
  return value.toFixed(2);
}

function tickLabel(value: number): string {
  const text = value.toPrecision(6);
  return text.includes(".") ? text.replace(/\.?0+$/, "") : text;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[candidates.length - 1];
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = first; t <= hi + 1e-12; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

function finiteExtent(values: number[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const array of values) {
    for (const v of array) {
      if (Number.isFinite(v)) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
      }
    }
  }
  if (lo === Infinity) {
    return [0, 1];
  }
  if (lo === hi) {
    return [lo - 1, hi + 1];
  }
  const pad = (hi - lo) * 0.04;
  return [lo - pad, hi + pad];
}

export function renderChart(spec: ChartSpec): string {
  const xs = spec.series.map((s) => s.x);
  const ys = spec.series.map((s) => s.y);
  if (spec.marker) {
    xs.push([spec.marker.x]);
    ys.push([spec.marker.y]);
  }
  const [x0, x1] = finiteExtent(xs);
  const [y0, y1] = finiteExtent(ys);
  const plotW = W - M.left - M.right;
  const plotH = H - M.top - M.bottom;
  const sx = (v: number) => M.left + ((v - x0) / (x1 - x0)) * plotW;
  const sy = (v: number) => M.top + plotH - ((v - y0) / (y1 - y0)) * plotH;

  let out = `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" `
    + `viewBox="0 0 ${W} ${H}" font-family="Helvetica,Arial,sans-serif">\n`;
  out += `<rect width="${W}" height="${H}" fill="#ffffff"/>\n`;
  out += `<text x="${W / 2}" y="24" text-anchor="middle" font-size="16">${spec.title}</text>\n`;

  // grid and axes
  for (const t of niceTicks(x0, x1, 8)) {
    const px = fmt(sx(t));
    out += `<line x1="${px}" y1="${M.top}" x2="${px}" y2="${M.top + plotH}" stroke="#e0e0e0" stroke-width="1"/>\n`;
    out += `<text x="${px}" y="${M.top + plotH + 18}" text-anchor="middle" font-size="11">${tickLabel(t)}</text>\n`;
  }
  for (const t of niceTicks(y0, y1, 6)) {
    const py = fmt(sy(t));
    out += `<line x1="${M.left}" y1="${py}" x2="${M.left + plotW}" y2="${py}" stroke="#e0e0e0" stroke-width="1"/>\n`;
    out += `<text x="${M.left - 6}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="11">${tickLabel(t)}</text>\n`;
  }
  out += `<rect x="${M.left}" y="${M.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#404040"/>\n`;
  out += `<text x="${M.left + plotW / 2}" y="${H - 14}" text-anchor="middle" font-size="13">${spec.xLabel}</text>\n`;
  out += `<text x="20" y="${M.top + plotH / 2}" text-anchor="middle" font-size="13" `
    + `transform="rotate(-90 20 ${M.top + plotH / 2})">${spec.yLabel}</text>\n`;

  for (const series of spec.series) {
    const stride = series.stride ?? 1;
    if (series.kind === "line") {
      let d = "";
      let pen = false;
      for (let k = 0; k < series.x.length; k += stride) {
        const x = series.x[k];
        const y = series.y[k];
        if (!Number.isFinite(x) || !Number.isFinite(y)) {
          pen = false;
          continue;
        }
        d += `${pen ? "L" : "M"}${fmt(sx(x))},${fmt(sy(y))}`;
        pen = true;
      }
      const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
      out += `<path d="${d}" fill="none" stroke="${series.color}" stroke-width="1.5"${dash}/>\n`;
    } else {
      for (let k = 0; k < series.x.length; k += stride) {
        const x = series.x[k];
        const y = series.y[k];
        if (!Number.isFinite(x) || !Number.isFinite(y)) {
          continue;
        }
        out += `<circle cx="${fmt(sx(x))}" cy="${fmt(sy(y))}" r="1.8" fill="${series.color}" fill-opacity="0.6"/>\n`;
      }
    }
  }

  if (spec.marker) {
    const mx = fmt(sx(spec.marker.x));
    const my = fmt(sy(spec.marker.y));
    out += `<circle cx="${mx}" cy="${my}" r="5" fill="none" stroke="#000000" stroke-width="1.5"/>\n`;
    out += `<text x="${fmt(sx(spec.marker.x) + 9)}" y="${fmt(sy(spec.marker.y) - 8)}" font-size="11">${spec.marker.label}</text>\n`;
  }

  // legend: unique labels in series order
  const seen = new Set<string>();
  let ly = M.top + 14;
  for (const series of spec.series) {
    if (!series.label || seen.has(series.label)) {
      continue;
    }
    seen.add(series.label);
    const lx = M.left + plotW - 150;
    out += `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${series.color}" stroke-width="2"/>\n`;
    out += `<text x="${lx + 28}" y="${ly}" font-size="11">${series.label}</text>\n`;
    ly += 16;
  }

  out += "</svg>\n";
  return out;
}
