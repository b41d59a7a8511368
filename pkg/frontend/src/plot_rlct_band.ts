/** RLCT-estimate band plot: CSV (max_length, lambda, std) in, PNG out. */
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { parsePlotArgs } from "./args.js";
import { renderRlctBand } from "./charts.js";
import { readCsv } from "./csv.js";
import { averageHash } from "./phash.js";
import { encodePng } from "./png.js";

const args = parsePlotArgs(process.argv.slice(2),
  "plot_rlct_band <results.csv> -o <out.png>");
const canvas = renderRlctBand(readCsv(args.input));
mkdirSync(dirname(args.output), { recursive: true });
writeFileSync(args.output, encodePng(canvas.width, canvas.height, canvas.data));
console.log(`${args.output} ${averageHash(canvas.width, canvas.height, canvas.data)}`);
