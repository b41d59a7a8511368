/** The golden-image cases shared by tests and the updater. */
import { renderEnergyRegression, renderKHeatmap, renderRlctBand } from "./charts.js";
import { readCsv, Row } from "./csv.js";
import type { Canvas } from "./raster.js";

export interface GoldenCase {
  name: string;
  render: () => Canvas;
}

export function goldenCases(root = "."): GoldenCase[] {
  const fx = (p: string) => `${root}/fixtures/${p}`;
  const constantRaster: Row[] = [];
  for (let i = 0; i < 32; i++) {
    for (let j = 0; j < 32; j++) {
      constantRaster.push({ h: i / 31, k: j / 31, K: 0.005 });
    }
  }
  return [
    {
      name: "rlct_band_table1",
      render: () => renderRlctBand(readCsv(fx("table1_detectA_log1000.csv"))),
    },
    {
      name: "rlct_band_monotone",
      render: () => renderRlctBand(readCsv(fx("synthetic_monotone.csv"))),
    },
    {
      name: "rlct_band_single_point",
      render: () => renderRlctBand([{ max_length: 7, lambda: 6.5, std: 2.0 }]),
    },
    {
      name: "energy_regression",
      render: () => renderEnergyRegression(readCsv(fx("energies.csv")),
                                           readCsv(fx("fits.csv"))),
    },
    {
      name: "k_heatmap_example2",
      render: () => renderKHeatmap(readCsv(fx("k_example2_raster.csv")),
                                   readCsv(fx("k_example2_zeroset.csv"))),
    },
    {
      name: "k_heatmap_constant",
      render: () => renderKHeatmap(constantRaster),
    },
  ];
}
