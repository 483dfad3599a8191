export type Rgb = [number, number, number];

const NEG: Rgb = [33, 102, 172];
const MID: Rgb = [247, 247, 247];
const POS: Rgb = [178, 24, 43];

function mix(a: Rgb, b: Rgb, t: number): Rgb {
  return [
    Math.round(a[0] + (b[0] - a[0]) * t),
    Math.round(a[1] + (b[1] - a[1]) * t),
    Math.round(a[2] + (b[2] - a[2]) * t),
  ];
}

/**
 * Diverging blue-white-red map on t in [-1, 1], centered at 0 so that
 * negative values are visually distinct from small positive ones.
 */
export function diverging(t: number): Rgb {
  const c = Math.max(-1, Math.min(1, t));
  return c < 0 ? mix(MID, NEG, -c) : mix(MID, POS, c);
}

/** Hue wheel for complex phase in (-pi, pi]; amplitude sets nothing here. */
export function phaseColor(phi: number): Rgb {
  const h = ((phi / (2 * Math.PI)) % 1 + 1) % 1;
  const s = 0.65;
  const l = 0.5;
  const q = l < 0.5 ? l * (1 + s) : l + s - l * s;
  const p = 2 * l - q;
  const channel = (tc: number): number => {
    let t = ((tc % 1) + 1) % 1;
    if (t < 1 / 6) return p + (q - p) * 6 * t;
    if (t < 1 / 2) return q;
    if (t < 2 / 3) return p + (q - p) * (2 / 3 - t) * 6;
    return p;
  };
  return [
    Math.round(255 * channel(h + 1 / 3)),
    Math.round(255 * channel(h)),
    Math.round(255 * channel(h - 1 / 3)),
  ];
}

export function cssColor([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}
