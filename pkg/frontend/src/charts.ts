/**
 * The three figure kinds, rendered into a software framebuffer: RLCT vs
 * max-length with a one-standard-deviation band, energy-vs-1/beta
 * regression scatter with fitted lines, and the K-landscape heatmap with
 * the zero locus overlaid. All numbers come from the CSV inputs; the only
 * computation here is rendering (the regression falls back to a local
 * least-squares line only when no fits file is supplied).
 */
import { numbers, requireColumns, Row } from "./csv.js";
import { BLACK, Canvas, fmtTick, GRAY, niceTicks, RGBA, Scale, WHITE } from "./raster.js";

const BAND: RGBA = [120, 160, 220, 120];
const LINE: RGBA = [30, 60, 160, 255];
const SERIES: RGBA[] = [
  [30, 60, 160, 255],
  [180, 60, 40, 255],
  [40, 140, 70, 255],
  [150, 90, 160, 255],
];

export interface Frame {
  canvas: Canvas;
  x: Scale;
  y: Scale;
}

export function frame(width: number, height: number, xlo: number, xhi: number,
                      ylo: number, yhi: number, xlabel: string,
                      ylabel: string): Frame {
  const canvas = new Canvas(width, height);
  const left = 64;
  const right = width - 16;
  const top = 16;
  const bottom = height - 44;
  const x = new Scale(xlo, xhi, left, right);
  const y = new Scale(ylo, yhi, bottom, top);
  canvas.line(left, top, left, bottom, BLACK);
  canvas.line(left, bottom, right, bottom, BLACK);
  for (const tx of niceTicks(xlo, xhi)) {
    const px = x.at(tx);
    canvas.line(px, bottom, px, bottom + 4, BLACK);
    const label = fmtTick(tx);
    canvas.text(px - canvas.textWidth(label) / 2, bottom + 8, label, BLACK);
  }
  for (const ty of niceTicks(ylo, yhi)) {
    const py = y.at(ty);
    canvas.line(left - 4, py, left, py, BLACK);
    const label = fmtTick(ty);
    canvas.text(left - 8 - canvas.textWidth(label), py - 3, label, BLACK);
  }
  canvas.text((left + right) / 2 - canvas.textWidth(xlabel) / 2,
              height - 14, xlabel, BLACK);
  canvas.text(4, 4, ylabel, BLACK);
  return { canvas, x, y };
}

export function renderRlctBand(rows: Row[]): Canvas {
  requireColumns(rows, ["max_length", "lambda", "std"], "rlct band input");
  const xs = numbers(rows, "max_length");
  const ys = numbers(rows, "lambda");
  const ss = numbers(rows, "std");
  const order = xs.map((_, i) => i).sort((a, b) => xs[a] - xs[b]);
  const lo = Math.min(...ys.map((v, i) => v - ss[i]));
  const hi = Math.max(...ys.map((v, i) => v + ss[i]));
  const pad = 0.08 * (hi - lo || 1);
  const xpad = xs.length > 1 ? 0.04 * (Math.max(...xs) - Math.min(...xs)) : 0.5;
  const f = frame(560, 400, Math.min(...xs) - xpad, Math.max(...xs) + xpad,
                  lo - pad, hi + pad, "MAX LENGTH", "RLCT");
  // One-standard-deviation band: vertical fills between consecutive points
  // (degenerate single-point inputs still draw their error bar).
  for (let k = 0; k + 1 < order.length; k++) {
    const i = order[k];
    const j = order[k + 1];
    const px0 = Math.round(f.x.at(xs[i]));
    const px1 = Math.round(f.x.at(xs[j]));
    for (let px = px0; px <= px1; px++) {
      const t = px1 === px0 ? 0 : (px - px0) / (px1 - px0);
      const upper = (ys[i] + ss[i]) * (1 - t) + (ys[j] + ss[j]) * t;
      const lower = (ys[i] - ss[i]) * (1 - t) + (ys[j] - ss[j]) * t;
      f.canvas.line(px, f.y.at(upper), px, f.y.at(lower), BAND);
    }
  }
  if (order.length === 1) {
    const i = order[0];
    const px = f.x.at(xs[i]);
    f.canvas.line(px, f.y.at(ys[i] + ss[i]), px, f.y.at(ys[i] - ss[i]), BAND);
  }
  for (let k = 0; k + 1 < order.length; k++) {
    const i = order[k];
    const j = order[k + 1];
    f.canvas.line(f.x.at(xs[i]), f.y.at(ys[i]), f.x.at(xs[j]), f.y.at(ys[j]), LINE);
  }
  for (const i of order) f.canvas.marker(f.x.at(xs[i]), f.y.at(ys[i]), LINE);
  return f.canvas;
}

export function renderEnergyRegression(rows: Row[], fits?: Row[]): Canvas {
  requireColumns(rows, ["dataset_id", "inv_beta", "e_nln", "stderr"],
                 "energy input");
  const xs = numbers(rows, "inv_beta");
  const ys = numbers(rows, "e_nln");
  const ss = numbers(rows, "stderr");
  const ids = numbers(rows, "dataset_id");
  const xlo = Math.min(...xs);
  const xhi = Math.max(...xs);
  const ylo = Math.min(...ys.map((v, i) => v - 2 * ss[i]));
  const yhi = Math.max(...ys.map((v, i) => v + 2 * ss[i]));
  const padx = 0.06 * (xhi - xlo || 1);
  const pady = 0.1 * (yhi - ylo || 1);
  const f = frame(560, 400, xlo - padx, xhi + padx, ylo - pady, yhi + pady,
                  "1/BETA", "E[NLN]");
  const datasets = [...new Set(ids)].sort((a, b) => a - b);
  for (const [d, ds] of datasets.entries()) {
    const color = SERIES[d % SERIES.length];
    let slope: number;
    let intercept: number;
    const fit = fits?.find((r) => r.dataset_id === ds);
    if (fit) {
      slope = fit.lambda as number;
      intercept = fit.intercept as number;
    } else {
      // Fallback when no fits file is shipped: plain least squares.
      const sel = ids.map((v, i) => i).filter((i) => ids[i] === ds);
      const mx = sel.reduce((a, i) => a + xs[i], 0) / sel.length;
      const my = sel.reduce((a, i) => a + ys[i], 0) / sel.length;
      const sxy = sel.reduce((a, i) => a + (xs[i] - mx) * (ys[i] - my), 0);
      const sxx = sel.reduce((a, i) => a + (xs[i] - mx) ** 2, 0);
      slope = sxx === 0 ? 0 : sxy / sxx;
      intercept = my - slope * mx;
    }
    f.canvas.line(f.x.at(xlo), f.y.at(intercept + slope * xlo),
                  f.x.at(xhi), f.y.at(intercept + slope * xhi), color);
    for (let i = 0; i < xs.length; i++) {
      if (ids[i] !== ds) continue;
      f.canvas.line(f.x.at(xs[i]), f.y.at(ys[i] - ss[i]),
                    f.x.at(xs[i]), f.y.at(ys[i] + ss[i]), GRAY);
      f.canvas.marker(f.x.at(xs[i]), f.y.at(ys[i]), color);
    }
  }
  return f.canvas;
}

export function renderKHeatmap(raster: Row[], zeros?: Row[],
                               clip = 0.01): Canvas {
  requireColumns(raster, ["h", "k", "K"], "raster input");
  const hs = numbers(raster, "h");
  const ks = numbers(raster, "k");
  const kv = numbers(raster, "K");
  const hAxis = [...new Set(hs)].sort((a, b) => a - b);
  const kAxis = [...new Set(ks)].sort((a, b) => a - b);
  const res = hAxis.length;
  if (raster.length !== res * kAxis.length) {
    throw new Error(`ragged raster: ${raster.length} rows for `
      + `${res}x${kAxis.length} grid`);
  }
  const size = 420;
  const f = frame(size + 80, size + 64, 0, 1, 0, 1, "H", "K COORD");
  const hIndex = new Map(hAxis.map((v, i) => [v, i]));
  const kIndex = new Map(kAxis.map((v, i) => [v, i]));
  const cellW = (f.x.at(1) - f.x.at(0)) / res;
  const cellH = (f.y.at(0) - f.y.at(1)) / kAxis.length;
  for (let r = 0; r < raster.length; r++) {
    const t = Math.min(kv[r], clip) / clip;
    const color: RGBA = [Math.round(255 * t), 40, Math.round(255 * (1 - t)), 255];
    const px = f.x.at(hs[r]) - cellW / 2;
    const py = f.y.at(ks[r]) - cellH / 2;
    f.canvas.fillRect(Math.round(px), Math.round(py),
                      Math.ceil(cellW) + 1, Math.ceil(cellH) + 1, color);
    void hIndex.get(hs[r]);
    void kIndex.get(ks[r]);
  }
  if (zeros) {
    requireColumns(zeros, ["h", "k"], "zero-set input");
    for (const row of zeros) {
      f.canvas.marker(f.x.at(row.h as number), f.y.at(row.k as number), WHITE, 1);
    }
  }
  return f.canvas;
}
