/**
 * Software framebuffer with just enough drawing primitives for the three
 * chart kinds: filled rectangles, 1px lines, markers and bitmap text.
 */
import { GLYPH_H, GLYPH_W, glyphFor } from "./font.js";

export type RGBA = [number, number, number, number];

export const WHITE: RGBA = [255, 255, 255, 255];
export const BLACK: RGBA = [0, 0, 0, 255];
export const GRAY: RGBA = [160, 160, 160, 255];

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: RGBA = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, c: RGBA): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    const a = c[3] / 255;
    for (let k = 0; k < 3; k++) {
      this.data[i + k] = Math.round(c[k] * a + this.data[i + k] * (1 - a));
    }
    this.data[i + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: RGBA): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) this.set(x, y, c);
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: RGBA): void {
    // Bresenham on rounded endpoints.
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, c);
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  marker(x: number, y: number, c: RGBA, r = 2): void {
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) this.set(x + dx, y + dy, c);
      }
    }
  }

  text(x: number, y: number, s: string, c: RGBA, scale = 1): void {
    let cx = Math.round(x);
    for (const ch of s) {
      const rows = glyphFor(ch);
      for (let ry = 0; ry < GLYPH_H; ry++) {
        for (let rx = 0; rx < GLYPH_W; rx++) {
          if ((rows[ry] >> (GLYPH_W - 1 - rx)) & 1) {
            this.fillRect(cx + rx * scale, Math.round(y) + ry * scale,
                          scale, scale, c);
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }

  textWidth(s: string, scale = 1): number {
    return s.length * (GLYPH_W + 1) * scale;
  }
}

/** Linear data-to-pixel axis mapping for one dimension. */
export class Scale {
  constructor(readonly d0: number, readonly d1: number,
              readonly p0: number, readonly p1: number) {}

  at(v: number): number {
    const t = (v - this.d0) / (this.d1 - this.d0 || 1);
    return this.p0 + t * (this.p1 - this.p0);
  }
}

export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag)
    .find((s) => span / s <= count + 1) ?? mag * 10;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    out.push(Number(v.toFixed(12)));
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.001) return v.toExponential(1).toUpperCase();
  return Number(v.toPrecision(4)).toString();
}
