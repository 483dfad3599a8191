import { CsvError, numericColumn, readMatrix, readTable, stringColumn } from "./csv.js";

export interface WignerData {
  q: number[];
  p: number[];
  /** values[i][j] at (q[i], p[j]) */
  values: number[][];
  configHash: string | undefined;
}

export function loadWigner(path: string): WignerData {
  const m = readMatrix(path);
  const q = m.axis("q_axis");
  const p = m.axis("p_axis");
  if (m.values.length !== q.length) {
    throw new CsvError(path, 1, `q_axis has ${q.length} entries but table has ${m.values.length} rows`);
  }
  if (m.values[0]!.length !== p.length) {
    throw new CsvError(path, 1, `p_axis has ${p.length} entries but rows have ${m.values[0]!.length} cells`);
  }
  return { q, p, values: m.values, configHash: m.meta.get("config_hash") };
}

export interface VStateData {
  /** centered ladder coordinate of each register level */
  levels: number[];
  re: number[];
  im: number[];
  /** continuous-coordinate samples of the interpolated state */
  curveY: number[];
  curveAbs2: number[];
}

export function loadVState(amplitudesPath: string, interpolationPath: string): VStateData {
  const amps = readTable(amplitudesPath);
  const curve = readTable(interpolationPath);
  return {
    levels: numericColumn(amps, "level"),
    re: numericColumn(amps, "re"),
    im: numericColumn(amps, "im"),
    curveY: numericColumn(curve, "y"),
    curveAbs2: numericColumn(curve, "abs2"),
  };
}

export interface ScheduleSegment {
  start: number;
  duration: number;
  alphaRe: number;
  alphaIm: number;
  /** instantaneous gates applied at the start of the segment */
  preOps: string[];
}

export function loadSchedule(path: string): ScheduleSegment[] {
  const table = readTable(path);
  const start = numericColumn(table, "start");
  const duration = numericColumn(table, "duration");
  const alphaRe = numericColumn(table, "alpha_re");
  const alphaIm = numericColumn(table, "alpha_im");
  const preOps = stringColumn(table, "pre_ops");
  return start.map((s, i) => ({
    start: s,
    duration: duration[i]!,
    alphaRe: alphaRe[i]!,
    alphaIm: alphaIm[i]!,
    preOps: preOps[i] === "" ? [] : preOps[i]!.split(";"),
  }));
}

export interface SweepSeries {
  channel: string;
  ratios: number[];
  fidelities: number[];
}

/** Merge sweep tables, one series per channel, points sorted by rate. */
export function loadSweep(paths: string[]): SweepSeries[] {
  const byChannel = new Map<string, Array<[number, number]>>();
  for (const path of paths) {
    const table = readTable(path);
    const ratios = numericColumn(table, "rate_ratio");
    const fids = numericColumn(table, "fidelity");
    const channels = stringColumn(table, "channel");
    for (let i = 0; i < ratios.length; i++) {
      const channel = channels[i]!;
      if (!byChannel.has(channel)) byChannel.set(channel, []);
      byChannel.get(channel)!.push([ratios[i]!, fids[i]!]);
    }
  }
  return [...byChannel.entries()].map(([channel, points]) => {
    points.sort((a, b) => a[0] - b[0]);
    return {
      channel,
      ratios: points.map((p) => p[0]),
      fidelities: points.map((p) => p[1]),
    };
  });
}
