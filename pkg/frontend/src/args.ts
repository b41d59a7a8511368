/** Tiny argv helper shared by the plot scripts. */
export interface PlotArgs {
  input: string;
  output: string;
  extra: Record<string, string>;
}

export function parsePlotArgs(argv: string[], usage: string,
                              extraFlags: string[] = []): PlotArgs {
  let input = "";
  let output = "";
  const extra: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "-o" || a === "--out") {
      output = argv[++i] ?? "";
    } else if (extraFlags.includes(a)) {
      extra[a.replace(/^--/, "")] = argv[++i] ?? "";
    } else if (!a.startsWith("-") && !input) {
      input = a;
    } else {
      throw new Error(`unexpected argument ${a}\nusage: ${usage}`);
    }
  }
  if (!input || !output) throw new Error(`usage: ${usage}`);
  return { input, output, extra };
}
