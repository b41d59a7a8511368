/**
 * Perceptual average-hash of an RGBA buffer: grayscale, 8x8 box
 * downsample, threshold at the mean, 64 bits as 16 hex digits. Golden
 * comparisons use Hamming distance so small rendering drift stays green
 * while different figures do not.
 */

export function averageHash(width: number, height: number, rgba: Uint8Array): string {
  const N = 8;
  const cells = new Float64Array(N * N);
  const counts = new Float64Array(N * N);
  for (let y = 0; y < height; y++) {
    const cy = Math.min(N - 1, Math.floor((y * N) / height));
    for (let x = 0; x < width; x++) {
      const cx = Math.min(N - 1, Math.floor((x * N) / width));
      const i = (y * width + x) * 4;
      const g = 0.299 * rgba[i] + 0.587 * rgba[i + 1] + 0.114 * rgba[i + 2];
      cells[cy * N + cx] += g;
      counts[cy * N + cx] += 1;
    }
  }
  for (let i = 0; i < N * N; i++) cells[i] /= counts[i] || 1;
  const mean = cells.reduce((a, b) => a + b, 0) / (N * N);
  let bits = 0n;
  for (let i = 0; i < N * N; i++) {
    bits = (bits << 1n) | (cells[i] > mean ? 1n : 0n);
  }
  return bits.toString(16).padStart(16, "0");
}

export function hamming(a: string, b: string): number {
  let x = BigInt("0x" + a) ^ BigInt("0x" + b);
  let d = 0;
  while (x > 0n) {
    d += Number(x & 1n);
    x >>= 1n;
  }
  return d;
}
