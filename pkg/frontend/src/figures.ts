import { cssColor, diverging, phaseColor } from "./color.js";
import { loadSchedule, loadSweep, loadVState, loadWigner } from "./data.js";
import { encodePng } from "./png.js";
import { axes, document, esc, fmt, makeFrame, polyline, ticks } from "./svg.js";

export type FigureKind = "wigner" | "vstate" | "schedule" | "sweep";

export interface FigureSpec {
  kind: FigureKind;
  /** vstate takes [amplitudes, interpolation]; sweep accepts several files */
  inputs: string[];
  output: string;
  qRange?: [number, number];
  pRange?: [number, number];
}

const SERIES_COLORS = ["#1b6ca8", "#c2410c", "#2f7d32", "#7b2d8b", "#9a6a00"];

function within(axis: number[], range?: [number, number]): number[] {
  const idx: number[] = [];
  for (let i = 0; i < axis.length; i++) {
    const v = axis[i]!;
    if (!range || (v >= range[0] && v <= range[1])) idx.push(i);
  }
  if (idx.length === 0) throw new Error("axis range selects no samples");
  return idx;
}

export function renderWigner(spec: FigureSpec): string {
  const data = loadWigner(spec.inputs[0]!);
  const qi = within(data.q, spec.qRange);
  const pi = within(data.p, spec.pRange);
  const q = qi.map((i) => data.q[i]!);
  const p = pi.map((i) => data.p[i]!);

  let vmax = 0;
  for (const i of qi) {
    for (const j of pi) {
      vmax = Math.max(vmax, Math.abs(data.values[i]![j]!));
    }
  }
  if (vmax === 0) vmax = 1;

  // one pixel per sample; p runs bottom-up so the top scanline is max p
  const raster = new Uint8Array(q.length * p.length * 3);
  for (let row = 0; row < p.length; row++) {
    const j = pi[p.length - 1 - row]!;
    for (let col = 0; col < q.length; col++) {
      const [r, g, b] = diverging(data.values[qi[col]!]![j]! / vmax);
      const at = (row * q.length + col) * 3;
      raster[at] = r;
      raster[at + 1] = g;
      raster[at + 2] = b;
    }
  }
  const png = encodePng(q.length, p.length, raster).toString("base64");

  const dq = q.length > 1 ? q[1]! - q[0]! : 1;
  const dp = p.length > 1 ? p[1]! - p[0]! : 1;
  const frame = makeFrame(
    [q[0]! - dq / 2, q[q.length - 1]! + dq / 2],
    [p[0]! - dp / 2, p[p.length - 1]! + dp / 2],
  );
  const parts: string[] = [];
  parts.push(
    `<image x="${frame.left}" y="${frame.top}" width="${frame.width}" height="${frame.height}" ` +
    `preserveAspectRatio="none" image-rendering="pixelated" href="data:image/png;base64,${png}"/>`,
  );
  parts.push(axes(frame, "q", "p"));

  // colorbar, symmetric about zero by construction
  const barX = frame.left + frame.width + 18;
  const stops: string[] = [];
  for (let i = 0; i <= 16; i++) {
    // offset 0% sits at +vmax, 100% at -vmax
    stops.push(
      `<stop offset="${(i * 100) / 16}%" stop-color="${cssColor(diverging(1 - i / 8))}"/>`,
    );
  }
  parts.push(
    `<defs><linearGradient id="wbar" x1="0" y1="0" x2="0" y2="1">${stops.join("")}</linearGradient></defs>`,
    `<rect x="${barX}" y="${frame.top}" width="14" height="${frame.height}" fill="url(#wbar)" stroke="#444"/>`,
  );
  for (const [value, pos] of [[vmax, 0], [0, 0.5], [-vmax, 1]] as const) {
    const y = frame.top + pos * frame.height;
    parts.push(
      `<text x="${barX + 19}" y="${y}" font-size="10" dominant-baseline="middle" fill="#222">${fmt(value)}</text>`,
    );
  }
  return document(barX + 70, frame.top + frame.height + 44, parts.join("\n"));
}

export function renderVState(spec: FigureSpec): string {
  if (spec.inputs.length < 2) {
    throw new Error("vstate needs an amplitudes file and an interpolation file");
  }
  const data = loadVState(spec.inputs[0]!, spec.inputs[1]!);
  const mags = data.re.map((re, i) => Math.hypot(re, data.im[i]!));
  const magMax = Math.max(...mags, 1e-12);
  const xs = [...data.levels, ...data.curveY];
  const xDomain: [number, number] = [Math.min(...xs) - 0.5, Math.max(...xs) + 0.5];

  const top = makeFrame(xDomain, [0, magMax * 1.08], 58, 16, 360, 130);
  const parts: string[] = [];
  const barW = Math.min(18, (top.width / data.levels.length) * 0.6);
  for (let i = 0; i < data.levels.length; i++) {
    const mag = mags[i]!;
    const fill = mag < 1e-12 ? "#bbb" : cssColor(phaseColor(Math.atan2(data.im[i]!, data.re[i]!)));
    const x = top.x(data.levels[i]!) - barW / 2;
    const y = top.y(mag);
    parts.push(
      `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${barW.toFixed(2)}" ` +
      `height="${(top.y(0) - y).toFixed(2)}" fill="${fill}" stroke="#333" stroke-width="0.5"/>`,
    );
  }
  parts.push(axes(top, "", "|amplitude|"));

  const abs2Max = Math.max(...data.curveAbs2, 1e-12);
  const bottom = makeFrame(xDomain, [0, abs2Max * 1.08], 58, 196, 360, 130);
  parts.push(polyline(bottom, data.curveY, data.curveAbs2, "#1b6ca8"));
  parts.push(axes(bottom, "y", "|v(y)|^2"));
  parts.push(
    `<text x="${top.left + top.width - 4}" y="${top.top + 12}" font-size="10" text-anchor="end" fill="#555">bar color = phase</text>`,
  );
  return document(488, 374, parts.join("\n"));
}

export function renderSchedule(spec: FigureSpec): string {
  const segments = loadSchedule(spec.inputs[0]!);
  const tEnd = segments[segments.length - 1]!.start + segments[segments.length - 1]!.duration;
  let aMax = 0;
  for (const s of segments) {
    aMax = Math.max(aMax, Math.abs(s.alphaRe), Math.abs(s.alphaIm));
  }
  const frame = makeFrame([0, tEnd], [-aMax * 1.15, aMax * 1.15]);
  const stepXs: number[] = [];
  const reYs: number[] = [];
  const imYs: number[] = [];
  for (const s of segments) {
    stepXs.push(s.start, s.start + s.duration);
    reYs.push(s.alphaRe, s.alphaRe);
    imYs.push(s.alphaIm, s.alphaIm);
  }
  const parts: string[] = [];
  parts.push(
    `<line x1="${frame.left}" y1="${frame.y(0)}" x2="${frame.left + frame.width}" y2="${frame.y(0)}" stroke="#ccc"/>`,
  );
  parts.push(polyline(frame, stepXs, reYs, SERIES_COLORS[0]!));
  parts.push(polyline(frame, stepXs, imYs, SERIES_COLORS[1]!));
  for (const s of segments) {
    if (s.preOps.length === 0) continue;
    const x = frame.x(s.start).toFixed(2);
    parts.push(
      `<line x1="${x}" y1="${frame.top}" x2="${x}" y2="${frame.top + frame.height}" ` +
      `stroke="#888" stroke-dasharray="3,3"/>`,
      `<text x="${x}" y="${frame.top - 4}" font-size="9" text-anchor="middle" fill="#555">${esc(s.preOps.join(","))}</text>`,
    );
  }
  parts.push(axes(frame, "t", "drive amplitude"));
  parts.push(
    `<text x="${frame.left + 8}" y="${frame.top + 14}" font-size="11" fill="${SERIES_COLORS[0]}">Re</text>`,
    `<text x="${frame.left + 30}" y="${frame.top + 14}" font-size="11" fill="${SERIES_COLORS[1]}">Im</text>`,
  );
  return document(452, 344, parts.join("\n"));
}

export function renderSweep(spec: FigureSpec): string {
  const series = loadSweep(spec.inputs);
  const allRatios = series.flatMap((s) => s.ratios);
  const allFids = series.flatMap((s) => s.fidelities);
  const fLo = Math.min(...allFids);
  const fHi = Math.max(...allFids);
  const pad = Math.max((fHi - fLo) * 0.1, 1e-3);
  const frame = makeFrame(
    [Math.min(...allRatios), Math.max(...allRatios)],
    [fLo - pad, fHi + pad],
  );
  const parts: string[] = [];
  series.sort((a, b) => a.channel.localeCompare(b.channel));
  series.forEach((s, k) => {
    const color = SERIES_COLORS[k % SERIES_COLORS.length]!;
    parts.push(polyline(frame, s.ratios, s.fidelities, color));
    for (let i = 0; i < s.ratios.length; i++) {
      parts.push(
        `<circle cx="${frame.x(s.ratios[i]!).toFixed(2)}" cy="${frame.y(s.fidelities[i]!).toFixed(2)}" r="2.5" fill="${color}"/>`,
      );
    }
    parts.push(
      `<text x="${frame.left + frame.width - 6}" y="${frame.top + 14 + 13 * k}" ` +
      `font-size="11" text-anchor="end" fill="${color}">${esc(s.channel)}</text>`,
    );
  });
  parts.push(axes(frame, "rate / χ_max", "fidelity"));
  return document(452, 344, parts.join("\n"));
}

export function renderFigure(spec: FigureSpec): string {
  if (spec.inputs.length === 0) throw new Error("no input files given");
  switch (spec.kind) {
    case "wigner":
      return renderWigner(spec);
    case "vstate":
      return renderVState(spec);
    case "schedule":
      return renderSchedule(spec);
    case "sweep":
      return renderSweep(spec);
  }
}

export { ticks };
