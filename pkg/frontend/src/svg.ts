/**
 * Small SVG chart toolkit: linear and log scales with tick generation,
 * line/scatter primitives, axes, and document assembly. Everything
 * renders to strings; no DOM.
 */

export interface Scale {
  (value: number): number;
  ticks(): number[];
  domain: [number, number];
}

const TICK_STEPS = [1, 2, 5];

/** Round tick spacing covering the span with about `count` intervals. */
export function tickStep(span: number, count: number): number {
  const raw = span / Math.max(1, count);
  const power = Math.floor(Math.log10(raw));
  const base = 10 ** power;
  for (const step of TICK_STEPS) {
    if (step * base >= raw) return step * base;
  }
  return 10 * base;
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  count = 6,
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.ticks = () => {
    const step = tickStep(Math.abs(span), count);
    const ticks: number[] = [];
    for (let t = Math.ceil(d0 / step) * step; t <= d1 + step * 1e-9; t += step) {
      // snap away the accumulation error so labels print clean
      ticks.push(Math.abs(t) < step * 1e-9 ? 0 : Number(t.toPrecision(12)));
    }
    return ticks;
  };
  return scale;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new RangeError(`log scale domain must be positive, got [${d0}, ${d1}]`);
  }
  const [r0, r1] = range;
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const scale = ((value: number) =>
    r0 + ((Math.log10(value) - l0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.ticks = () => {
    const l1 = Math.log10(d1);
    const ticks: number[] = [];
    for (let p = Math.ceil(l0 - 1e-9); p <= l1 + 1e-9; p += 1) {
      ticks.push(10 ** p);
    }
    if (ticks.length >= 3) return ticks;
    // narrow domain: fall back to a 1-2-5 grid inside the decade
    const fine: number[] = [];
    for (let p = Math.floor(l0); p <= Math.ceil(l1); p += 1) {
      for (const m of TICK_STEPS) {
        const t = m * 10 ** p;
        if (t >= d0 * (1 - 1e-9) && t <= d1 * (1 + 1e-9)) fine.push(t);
      }
    }
    if (fine.length >= 2) return fine;
    // sub-decade span with no round mantissas: place linear ticks
    return linearScale(domain, range).ticks();
  };
  return scale;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) throw new RangeError("extent of no values");
  return [lo, hi];
}

/** Pad a domain by a fraction on both ends (in scale space). */
export function padded(domain: [number, number], frac = 0.05): [number, number] {
  const [lo, hi] = domain;
  const pad = (hi - lo || Math.abs(lo) || 1) * frac;
  return [lo - pad, hi + pad];
}

export function tickLabel(value: number): string {
  if (value !== 0 && (Math.abs(value) >= 1e5 || Math.abs(value) < 1e-3)) {
    const power = Math.floor(Math.log10(Math.abs(value)));
    const mantissa = value / 10 ** power;
    const head = Math.abs(mantissa - 1) < 1e-9 ? "" : `${Number(mantissa.toPrecision(3))}x`;
    return `${head}1e${power}`;
  }
  return `${Number(value.toPrecision(6))}`;
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
  "#bcbd22", "#e377c2",
];

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length]!;
}

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 760,
  height: 480,
  margin: { top: 48, right: 24, bottom: 56, left: 72 },
};

export function innerSize(frame: Frame): { width: number; height: number } {
  return {
    width: frame.width - frame.margin.left - frame.margin.right,
    height: frame.height - frame.margin.top - frame.margin.bottom,
  };
}

const fix = (v: number) => Number(v.toFixed(2));

export function polylinePath(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"} ${fix(xs[i]!)} ${fix(ys[i]!)}`);
  }
  return parts.join(" ");
}

export interface LineStyle {
  color: string;
  dash?: string;
  width?: number;
  markers?: boolean;
}

export function linePlot(
  x: Scale,
  y: Scale,
  px: number[],
  py: number[],
  style: LineStyle,
): string {
  const sx = px.map(x);
  const sy = py.map(y);
  const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
  let svg = `<path d="${polylinePath(sx, sy)}" fill="none" stroke="${style.color}"` +
    ` stroke-width="${style.width ?? 1.8}"${dash}/>`;
  if (style.markers ?? true) {
    for (let i = 0; i < sx.length; i++) {
      svg += `<circle cx="${fix(sx[i]!)}" cy="${fix(sy[i]!)}" r="2.6" fill="${style.color}"/>`;
    }
  }
  return svg;
}

export function scatterPlot(
  x: Scale,
  y: Scale,
  px: number[],
  py: number[],
  color: string,
  r = 1.6,
): string {
  const dots: string[] = [];
  for (let i = 0; i < px.length; i++) {
    dots.push(
      `<circle cx="${fix(x(px[i]!))}" cy="${fix(y(py[i]!))}" r="${r}"` +
        ` fill="${color}" fill-opacity="0.55"/>`,
    );
  }
  return dots.join("");
}

export function xAxis(x: Scale, y0: number, label: string): string {
  const ticks = x.ticks();
  const [d0, d1] = x.domain;
  let svg = `<line x1="${fix(x(d0))}" y1="${fix(y0)}" x2="${fix(x(d1))}" y2="${fix(y0)}" class="axis"/>`;
  for (const t of ticks) {
    const px = fix(x(t));
    svg += `<line x1="${px}" y1="${fix(y0)}" x2="${px}" y2="${fix(y0 + 5)}" class="axis"/>`;
    svg += `<text x="${px}" y="${fix(y0 + 20)}" class="tick" text-anchor="middle">${tickLabel(t)}</text>`;
  }
  const mid = fix((x(d0) + x(d1)) / 2);
  svg += `<text x="${mid}" y="${fix(y0 + 42)}" class="label" text-anchor="middle">${label}</text>`;
  return svg;
}

export function yAxis(y: Scale, x0: number, label: string, gridTo?: number): string {
  const ticks = y.ticks();
  const [d0, d1] = y.domain;
  let svg = `<line x1="${fix(x0)}" y1="${fix(y(d0))}" x2="${fix(x0)}" y2="${fix(y(d1))}" class="axis"/>`;
  for (const t of ticks) {
    const py = fix(y(t));
    if (gridTo !== undefined) {
      svg += `<line x1="${fix(x0)}" y1="${py}" x2="${fix(gridTo)}" y2="${py}" class="grid"/>`;
    }
    svg += `<line x1="${fix(x0 - 5)}" y1="${py}" x2="${fix(x0)}" y2="${py}" class="axis"/>`;
    svg += `<text x="${fix(x0 - 8)}" y="${fix(py + 3.5)}" class="tick" text-anchor="end">${tickLabel(t)}</text>`;
  }
  const mid = fix((y(d0) + y(d1)) / 2);
  svg += `<text x="${fix(x0 - 54)}" y="${mid}" class="label" text-anchor="middle"` +
    ` transform="rotate(-90, ${fix(x0 - 54)}, ${mid})">${label}</text>`;
  return svg;
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function legend(entries: LegendEntry[], x: number, y: number): string {
  let svg = `<g transform="translate(${fix(x)}, ${fix(y)})">`;
  entries.forEach((entry, i) => {
    const dy = i * 17;
    const dash = entry.dash ? ` stroke-dasharray="${entry.dash}"` : "";
    svg += `<line x1="0" y1="${dy}" x2="22" y2="${dy}" stroke="${entry.color}" stroke-width="2"${dash}/>`;
    svg += `<text x="28" y="${dy + 3.5}" class="tick">${entry.label}</text>`;
  });
  return svg + "</g>";
}

export function svgDocument(width: number, height: number, title: string, body: string): string {
  return `<?xml version="1.0" encoding="UTF-8"?>
<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">
<style>
  svg { background: white; }
  .title { font: bold 15px sans-serif; fill: #222; }
  .label { font: 13px sans-serif; fill: #444; }
  .tick { font: 11px sans-serif; fill: #555; }
  .axis { stroke: #333; stroke-width: 1; }
  .grid { stroke: #ddd; stroke-width: 0.5; }
</style>
<rect width="${width}" height="${height}" fill="white"/>
<text x="${width / 2}" y="24" class="title" text-anchor="middle">${title}</text>
${body}
</svg>
`;
}
