/** Energy-vs-1/beta scatter with fitted lines: energies CSV in, PNG out.
 * Fitted slopes/intercepts come from the companion fits CSV when given. */
import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { parsePlotArgs } from "./args.js";
import { renderEnergyRegression } from "./charts.js";
import { readCsv } from "./csv.js";
import { averageHash } from "./phash.js";
import { encodePng } from "./png.js";

const args = parsePlotArgs(process.argv.slice(2),
  "plot_energy_regression <energies.csv> [--fits fits.csv] -o <out.png>",
  ["--fits"]);
const fits = args.extra.fits ? readCsv(args.extra.fits) : undefined;
const canvas = renderEnergyRegression(readCsv(args.input), fits);
mkdirSync(dirname(args.output), { recursive: true });
writeFileSync(args.output, encodePng(canvas.width, canvas.height, canvas.data));
console.log(`${args.output} ${averageHash(canvas.width, canvas.height, canvas.data)}`);
