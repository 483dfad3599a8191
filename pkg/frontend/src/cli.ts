import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { CsvError } from "./csv.js";
import { FigureKind, FigureSpec, renderFigure } from "./figures.js";

const KINDS: ReadonlyArray<FigureKind> = ["wigner", "vstate", "schedule", "sweep"];

const USAGE = `usage: gkpforge-plots --kind KIND --in FILE [--in FILE ...] --out FILE.svg
                      [--q-range LO,HI] [--p-range LO,HI]

kinds: wigner (wigner.csv), vstate (amplitudes.csv interpolation.csv),
       schedule (schedule.csv), sweep (sweep.csv per channel)`;

function parseRange(raw: string | undefined): [number, number] | undefined {
  if (raw === undefined) return undefined;
  const parts = raw.split(",").map(Number);
  if (parts.length !== 2 || parts.some(Number.isNaN) || parts[0]! >= parts[1]!) {
    throw new UsageError(`range must be LO,HI with LO < HI, got '${raw}'`);
  }
  return [parts[0]!, parts[1]!];
}

class UsageError extends Error {}

/** parseArgs refuses detached values that start with a dash, e.g. -3,3 */
function joinDashValues(argv: string[]): string[] {
  const out: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    const next = argv[i + 1];
    if (
      (arg === "--q-range" || arg === "--p-range") &&
      next !== undefined && /^-\d|^-\./.test(next)
    ) {
      out.push(`${arg}=${next}`);
      i++;
    } else {
      out.push(arg);
    }
  }
  return out;
}

export function buildSpec(argv: string[]): FigureSpec {
  let parsed;
  try {
    parsed = parseArgs({
      args: joinDashValues(argv),
      options: {
        kind: { type: "string" },
        in: { type: "string", multiple: true },
        out: { type: "string" },
        "q-range": { type: "string" },
        "p-range": { type: "string" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    throw new UsageError((err as Error).message);
  }
  const { values } = parsed;
  if (!values.kind || !KINDS.includes(values.kind as FigureKind)) {
    throw new UsageError(`--kind must be one of ${KINDS.join(", ")}`);
  }
  if (!values.in || values.in.length === 0) throw new UsageError("--in is required");
  if (!values.out) throw new UsageError("--out is required");
  return {
    kind: values.kind as FigureKind,
    inputs: values.in,
    output: values.out,
    qRange: parseRange(values["q-range"]),
    pRange: parseRange(values["p-range"]),
  };
}

export function run(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = buildSpec(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n${USAGE}\n`);
    return 2;
  }
  try {
    writeFileSync(spec.output, renderFigure(spec));
  } catch (err) {
    if (err instanceof CsvError) {
      process.stderr.write(`malformed input: ${err.message}\n`);
    } else {
      process.stderr.write(`${(err as Error).message}\n`);
    }
    return 1;
  }
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(run(process.argv.slice(2)));
}
