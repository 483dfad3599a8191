export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Round tick positions covering the domain, at most n+2 of them. */
export function ticks(domain: [number, number], n = 5): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= rawStep) {
      step = m * mag;
      break;
    }
  }
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return out;
}

export function fmt(x: number): string {
  if (x === 0) return "0";
  if (Math.abs(x) >= 1e4 || Math.abs(x) < 1e-3) {
    return x.toExponential(1).replace("e+", "e").replace(/e(-?)0*(\d)/, "e$1$2");
  }
  return String(Number(x.toPrecision(6)));
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Frame {
  left: number;
  top: number;
  width: number;
  height: number;
  x: Scale;
  y: Scale;
}

/** Plot frame with y increasing upward inside a fixed margin box. */
export function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  left = 58,
  top = 16,
  width = 360,
  height = 280,
): Frame {
  return {
    left, top, width, height,
    x: linearScale(xDomain, [left, left + width]),
    y: linearScale(yDomain, [top + height, top]),
  };
}

export function axes(frame: Frame, xLabel: string, yLabel: string): string {
  const { left, top, width, height, x, y } = frame;
  const bottom = top + height;
  const parts: string[] = [];
  parts.push(
    `<rect x="${left}" y="${top}" width="${width}" height="${height}" fill="none" stroke="#444" stroke-width="1"/>`,
  );
  for (const t of ticks(x.domain)) {
    const px = x(t).toFixed(2);
    parts.push(`<line x1="${px}" y1="${bottom}" x2="${px}" y2="${bottom + 4}" stroke="#444"/>`);
    parts.push(
      `<text x="${px}" y="${bottom + 16}" font-size="11" text-anchor="middle" fill="#222">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(y.domain)) {
    const py = y(t).toFixed(2);
    parts.push(`<line x1="${left - 4}" y1="${py}" x2="${left}" y2="${py}" stroke="#444"/>`);
    parts.push(
      `<text x="${left - 7}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle" fill="#222">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${left + width / 2}" y="${bottom + 32}" font-size="13" text-anchor="middle" fill="#111">${esc(xLabel)}</text>`,
  );
  parts.push(
    `<text x="${left - 44}" y="${top + height / 2}" font-size="13" text-anchor="middle" fill="#111" transform="rotate(-90 ${left - 44} ${top + height / 2})">${esc(yLabel)}</text>`,
  );
  return parts.join("\n");
}

export function polyline(frame: Frame, xs: number[], ys: number[], stroke: string): string {
  const pts = xs
    .map((v, i) => `${frame.x(v).toFixed(2)},${frame.y(ys[i]!).toFixed(2)}`)
    .join(" ");
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.5"/>`;
}

export function document(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}
