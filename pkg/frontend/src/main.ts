/**
 * Figure renderer CLI.
 *
 * Usage:
 *   node dist/main.js --trace out/trace.csv --curve out/curve.csv \
 *     --design out/profile_samples.csv --out-dir figures [--figs fig2,fig6]
 *
 * Writes one SVG per requested figure plus index.json describing what was
 * generated. Exits nonzero with column diagnostics on a schema mismatch.
 */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import { join } from "path";

import { Table, parseCsv } from "./csv";
import { FIGURES, FigureDef, InputKind, validateInputs } from "./figures";

interface Args {
  trace?: string;
  curve?: string;
  design?: string;
  outDir: string;
  figs: string[];
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { outDir: "figures", figs: FIGURES.map((f) => f.id) };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = () => {
      i += 1;
      if (i >= argv.length) {
        throw new Error(`missing value for ${flag}`);
      }
      return argv[i];
    };
    switch (flag) {
      case "--trace": args.trace = value(); break;
      case "--curve": args.curve = value(); break;
      case "--design": args.design = value(); break;
      case "--out-dir": args.outDir = value(); break;
      case "--figs": args.figs = value().split(",").map((f) => f.trim()).filter(Boolean); break;
      default: throw new Error(`unknown flag ${flag}`);
    }
  }
  return args;
}

export function renderAll(args: Args): { file: string; id: string; meta: Record<string, number | string> }[] {
  const tables = new Map<InputKind, Table>();
  const fileNames = new Map<InputKind, string>();
  const sources: [InputKind, string | undefined][] = [
    ["trace", args.trace], ["curve", args.curve], ["design", args.design],
  ];
  for (const [kind, path] of sources) {
    if (path) {
      tables.set(kind, parseCsv(readFileSync(path, "utf8")));
      fileNames.set(kind, path);
    }
  }

  const defs = args.figs.map((id) => {
    const def = FIGURES.find((f) => f.id === id);
    if (!def) {
      throw new Error(`unknown figure id ${id}; known: ${FIGURES.map((f) => f.id).join(", ")}`);
    }
    return def;
  });

  mkdirSync(args.outDir, { recursive: true });
  const generated: { file: string; id: string; meta: Record<string, number | string> }[] = [];
  for (const def of defs) {
    validateInputs(def.id, tables, fileNames);
    const result = (def as FigureDef).build(tables);
    const file = `${def.id}.svg`;
    writeFileSync(join(args.outDir, file), result.svg);
    generated.push({ id: def.id, file, meta: result.meta });
  }
  writeFileSync(
    join(args.outDir, "index.json"),
    JSON.stringify({ figures: generated }, null, 2) + "\n",
  );
  return generated;
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    const generated = renderAll(args);
    for (const entry of generated) {
      console.log(`${entry.id} -> ${join(args.outDir, entry.file)}`);
    }
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
