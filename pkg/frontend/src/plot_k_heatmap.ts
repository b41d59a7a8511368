/** K-landscape heatmap clipped at 0.01 with the zero locus in white. */
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { parsePlotArgs } from "./args.js";
import { renderKHeatmap } from "./charts.js";
import { readCsv } from "./csv.js";
import { averageHash } from "./phash.js";
import { encodePng } from "./png.js";

const args = parsePlotArgs(process.argv.slice(2),
  "plot_k_heatmap <raster.csv> [--zeros zeroset.csv] -o <out.png>",
  ["--zeros"]);
const zeros = args.extra.zeros ? readCsv(args.extra.zeros) : undefined;
const canvas = renderKHeatmap(readCsv(args.input), zeros);
mkdirSync(dirname(args.output), { recursive: true });
writeFileSync(args.output, encodePng(canvas.width, canvas.height, canvas.data));
console.log(`${args.output} ${averageHash(canvas.width, canvas.height, canvas.data)}`);
