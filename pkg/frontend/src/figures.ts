/**
 * Figure specs: one renderer per metrics-table family. A spec declares
 * the run kinds it accepts and the columns it needs; renderFigure
 * checks both before any drawing happens, so a bad table can never
 * leave a half-written figure behind.
 */

import { num, Row, Table } from "./csv.js";
import {
  DEFAULT_FRAME,
  extent,
  innerSize,
  legend,
  LegendEntry,
  linearScale,
  linePlot,
  logScale,
  padded,
  scatterPlot,
  seriesColor,
  svgDocument,
  xAxis,
  yAxis,
} from "./svg.js";

export interface RenderResult {
  svg: string | null;
  diagnostics: string[];
}

export interface FigureSpec {
  name: string;
  description: string;
  kinds: string[];
  requires: string[];
  /** Whether the swept column is an additional required column. */
  usesSweep: boolean;
  render(table: Table): RenderResult;
}

interface Series {
  label: string;
  x: number[];
  y: number[];
}

/** Group rows into per-label series, sorted by x within each series. */
function collectSeries(
  rows: Row[],
  xCol: string,
  yCol: string,
  labelOf: (row: Row) => string,
  diagnostics: string[],
  dir: string,
): Series[] {
  const byLabel = new Map<string, Series>();
  rows.forEach((row, i) => {
    const x = num(row, xCol);
    const y = num(row, yCol);
    if (x === null) {
      diagnostics.push(`${dir}: row ${i}: column "${xCol}" is not numeric`);
      return;
    }
    if (y === null && row[yCol] !== "") {
      diagnostics.push(`${dir}: row ${i}: column "${yCol}" is not numeric`);
      return;
    }
    if (y === null) return;
    const label = labelOf(row);
    let series = byLabel.get(label);
    if (!series) {
      series = { label, x: [], y: [] };
      byLabel.set(label, series);
    }
    series.x.push(x);
    series.y.push(y);
  });
  const out = [...byLabel.values()];
  for (const s of out) {
    const order = s.x.map((_, i) => i).sort((a, b) => s.x[a]! - s.x[b]!);
    s.x = order.map((i) => s.x[i]!);
    s.y = order.map((i) => s.y[i]!);
  }
  return out;
}

/** Drop non-positive points so a series can live on a log axis. */
function positivePart(series: Series): Series {
  const x: number[] = [];
  const y: number[] = [];
  for (let i = 0; i < series.y.length; i++) {
    if (series.y[i]! > 0) {
      x.push(series.x[i]!);
      y.push(series.y[i]!);
    }
  }
  return { label: series.label, x, y };
}

function lineChart(
  title: string,
  xLabel: string,
  yLabel: string,
  series: Series[],
  opts: { logY?: boolean; dashed?: Series[] } = {},
): string {
  const frame = DEFAULT_FRAME;
  const { width, height } = innerSize(frame);
  const all = series.concat(opts.dashed ?? []);
  const xs = all.flatMap((s) => s.x);
  const ys = all.flatMap((s) => s.y);
  const xScale = linearScale(padded(extent(xs), 0.04), [
    frame.margin.left,
    frame.margin.left + width,
  ]);
  const yDomain = opts.logY
    ? extent(ys)
    : padded(extent(ys), 0.06);
  const yScale = (opts.logY ? logScale : linearScale)(
    opts.logY ? [yDomain[0] / 1.6, yDomain[1] * 1.6] : yDomain,
    [frame.margin.top + height, frame.margin.top],
  );

  let body = "";
  body += yAxis(yScale, frame.margin.left, yLabel, frame.margin.left + width);
  body += xAxis(xScale, frame.margin.top + height, xLabel);
  const entries: LegendEntry[] = [];
  series.forEach((s, i) => {
    const color = seriesColor(i);
    body += linePlot(xScale, yScale, s.x, s.y, { color });
    entries.push({ label: s.label, color });
  });
  (opts.dashed ?? []).forEach((s) => {
    const i = series.findIndex((base) => base.label === s.label);
    const color = seriesColor(i < 0 ? series.length : i);
    body += linePlot(xScale, yScale, s.x, s.y, {
      color, dash: "5,4", width: 1.2, markers: false,
    });
  });
  if (opts.dashed && opts.dashed.length > 0) {
    entries.push({ label: "closed form / analytic", color: "#555", dash: "5,4" });
  }
  body += legend(entries, frame.margin.left + 12, frame.margin.top + 12);
  return svgDocument(frame.width, frame.height, title, body);
}

// ---------------------------------------------------------------------------
// specs

const sqnrVsBits: FigureSpec = {
  name: "sqnr-vs-b",
  description: "Quantizer SQNR against bit depth per source and ADC",
  kinds: ["sqnr"],
  requires: ["bits", "source", "adc", "zeta", "sqnr_db", "analytic_db"],
  usesSweep: false,
  render(table) {
    const diagnostics: string[] = [];
    const label = (row: Row) => {
      const base = `${row.source} ${row.adc}`;
      return row.adc === "modulo" ? `${base} zeta=${row.zeta}` : base;
    };
    const series = collectSeries(
      table.rows, "bits", "sqnr_db", label, diagnostics, table.dir);
    // only overlay analytic curves that cover every point of a series
    const analytic = collectSeries(
      table.rows, "bits", "analytic_db", label, diagnostics, table.dir,
    ).filter((s) => {
      const base = series.find((b) => b.label === s.label);
      return base !== undefined && s.x.length === base.x.length;
    });
    if (diagnostics.length > 0) return { svg: null, diagnostics };
    const svg = lineChart(
      `${table.manifest!.recipe}: SQNR vs bit depth`,
      "quantizer bits", "SQNR (dB)", series, { dashed: analytic });
    return { svg, diagnostics };
  },
};

const recoveryError: FigureSpec = {
  name: "recovery-error",
  description: "Reconstruction MSE and error rates over the swept axis",
  kinds: ["single-carrier", "ofdm"],
  requires: ["mse", "ber", "ser"],
  usesSweep: true,
  render(table) {
    const diagnostics: string[] = [];
    const xCol = table.sweepColumn;
    const series: Series[] = [];
    for (const metric of ["mse", "ber", "ser"]) {
      const got = collectSeries(
        table.rows, xCol, metric, () => metric, diagnostics, table.dir);
      const positive = got.map(positivePart).filter((s) => s.x.length > 0);
      series.push(...positive);
    }
    if (diagnostics.length > 0) return { svg: null, diagnostics };
    if (series.length === 0) {
      return { svg: null, diagnostics: [`${table.dir}: no positive values to plot`] };
    }
    const svg = lineChart(
      `${table.manifest!.recipe}: recovery error`,
      xCol, "error (log)", series, { logY: true });
    return { svg, diagnostics };
  },
};

const sumRate: FigureSpec = {
  name: "sum-rate",
  description: "Monte Carlo sum rate with closed-form overlay per case",
  kinds: ["rates"],
  requires: ["label", "sum_rate_mc", "sum_rate_approx"],
  usesSweep: true,
  render(table) {
    const diagnostics: string[] = [];
    const xCol = table.sweepColumn;
    const mc = collectSeries(
      table.rows, xCol, "sum_rate_mc", (r) => r.label!, diagnostics, table.dir);
    const approx = collectSeries(
      table.rows, xCol, "sum_rate_approx", (r) => r.label!, diagnostics, table.dir);
    if (diagnostics.length > 0) return { svg: null, diagnostics };
    const svg = lineChart(
      `${table.manifest!.recipe}: sum rate`,
      xCol, "sum rate (bits/s/Hz)", mc, { dashed: approx });
    return { svg, diagnostics };
  },
};

const energyEfficiency: FigureSpec = {
  name: "energy-efficiency",
  description: "Energy efficiency of the quantized cases over the swept axis",
  kinds: ["rates"],
  requires: ["label", "xi"],
  usesSweep: true,
  render(table) {
    const diagnostics: string[] = [];
    const quantized = table.rows.filter((row) => row.xi !== "");
    if (quantized.length === 0) {
      return {
        svg: null,
        diagnostics: [`${table.dir}: no quantized cases carry an xi value`],
      };
    }
    const series = collectSeries(
      quantized, table.sweepColumn, "xi", (r) => r.label!, diagnostics, table.dir);
    if (diagnostics.length > 0) return { svg: null, diagnostics };
    const svg = lineChart(
      `${table.manifest!.recipe}: energy efficiency`,
      table.sweepColumn, "bits/J", series, { logY: true });
    return { svg, diagnostics };
  },
};

const constellation: FigureSpec = {
  name: "constellation",
  description: "Received scatter after combining, one panel per detector",
  kinds: ["constellation"],
  requires: ["detector", "user", "re", "im"],
  usesSweep: false,
  render(table) {
    const diagnostics: string[] = [];
    const detectors: string[] = [];
    for (const row of table.rows) {
      if (!detectors.includes(row.detector!)) detectors.push(row.detector!);
    }
    const panel = 300;
    const gap = 48;
    const top = 56;
    const width = detectors.length * panel + (detectors.length + 1) * gap;
    let body = "";
    detectors.forEach((det, d) => {
      const rows = table.rows.filter((row) => row.detector === det);
      const re: number[] = [];
      const im: number[] = [];
      const user: number[] = [];
      rows.forEach((row, i) => {
        const x = num(row, "re");
        const y = num(row, "im");
        const u = num(row, "user");
        if (x === null || y === null || u === null) {
          diagnostics.push(`${table.dir}: ${det} row ${i}: non-numeric point`);
          return;
        }
        re.push(x);
        im.push(y);
        user.push(u);
      });
      const span = Math.max(
        ...re.map(Math.abs), ...im.map(Math.abs)) * 1.08 || 1;
      const x0 = gap + d * (panel + gap);
      const xScale = linearScale([-span, span], [x0, x0 + panel], 4);
      const yScale = linearScale([-span, span], [top + panel, top], 4);
      const users = [...new Set(user)].sort((a, b) => a - b);
      for (const u of users) {
        const px = re.filter((_, i) => user[i] === u);
        const py = im.filter((_, i) => user[i] === u);
        body += scatterPlot(xScale, yScale, px, py, seriesColor(u));
      }
      body += xAxis(xScale, top + panel, "I");
      body += yAxis(yScale, x0, "Q");
      body += `<text x="${x0 + panel / 2}" y="${top - 10}" class="label" text-anchor="middle">${det}</text>`;
    });
    if (diagnostics.length > 0) return { svg: null, diagnostics };
    const svg = svgDocument(
      width, top + panel + 64,
      `${table.manifest!.recipe}: received constellation`, body);
    return { svg, diagnostics };
  },
};

const eye: FigureSpec = {
  name: "eye",
  description: "Eye traces per processing stage",
  kinds: ["eye"],
  requires: ["stage", "trace", "t", "value"],
  usesSweep: false,
  render(table) {
    const diagnostics: string[] = [];
    const stages: string[] = [];
    for (const row of table.rows) {
      if (!stages.includes(row.stage!)) stages.push(row.stage!);
    }
    const panelW = 220;
    const panelH = 260;
    const gap = 56;
    const top = 56;
    const width = stages.length * panelW + (stages.length + 1) * gap;
    let body = "";
    stages.forEach((stage, si) => {
      const rows = table.rows.filter((row) => row.stage === stage);
      const traces = collectSeries(
        rows, "t", "value", (row) => row.trace!, diagnostics, table.dir);
      const values = traces.flatMap((s) => s.y);
      const x0 = gap + si * (panelW + gap);
      const xScale = linearScale([-1, 1], [x0, x0 + panelW], 4);
      const yScale = linearScale(
        padded(extent(values), 0.06), [top + panelH, top], 5);
      for (const trace of traces) {
        body += linePlot(xScale, yScale, trace.x, trace.y, {
          color: "#1f77b4", width: 0.7, markers: false,
        });
      }
      body += xAxis(xScale, top + panelH, "symbol periods");
      body += yAxis(yScale, x0, si === 0 ? "amplitude" : "");
      body += `<text x="${x0 + panelW / 2}" y="${top - 10}" class="label" text-anchor="middle">${stage}</text>`;
    });
    if (diagnostics.length > 0) return { svg: null, diagnostics };
    const svg = svgDocument(
      width, top + panelH + 64,
      `${table.manifest!.recipe}: eye diagram`, body);
    return { svg, diagnostics };
  },
};

export const FIGURES: FigureSpec[] = [
  sqnrVsBits, recoveryError, sumRate, energyEfficiency, constellation, eye,
];

export function figureByName(name: string): FigureSpec | undefined {
  return FIGURES.find((spec) => spec.name === name);
}

export function applicableFigures(table: Table): FigureSpec[] {
  const kind = table.manifest?.kind;
  return FIGURES.filter((spec) => kind !== undefined && spec.kinds.includes(kind));
}

/** Column and kind checks, then the spec's own renderer. */
export function renderFigure(spec: FigureSpec, table: Table): RenderResult {
  const diagnostics = [...table.diagnostics];
  if (table.manifest === null) {
    return { svg: null, diagnostics };
  }
  if (!spec.kinds.includes(table.manifest.kind)) {
    diagnostics.push(
      `${table.dir}: figure "${spec.name}" needs kind ` +
        `${spec.kinds.join("|")}, run is "${table.manifest.kind}"`,
    );
  }
  const needed = spec.usesSweep
    ? [table.sweepColumn, ...spec.requires]
    : spec.requires;
  for (const column of needed) {
    if (!table.columns.includes(column)) {
      diagnostics.push(
        `${table.dir}: missing column "${column}" for figure "${spec.name}"`,
      );
    }
  }
  if (diagnostics.length > 0) return { svg: null, diagnostics };
  return spec.render(table);
}
