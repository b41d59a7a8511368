/** Regenerate the stored perceptual hashes for every golden fixture. */
import { writeFileSync } from "node:fs";
import { goldenCases } from "./goldens.js";

for (const c of goldenCases()) {
  const canvas = c.render();
  const { averageHash } = await import("./phash.js");
  writeFileSync(`goldens/${c.name}.hash.txt`,
    averageHash(canvas.width, canvas.height, canvas.data) + "\n");
  console.log(`golden ${c.name} updated`);
}
