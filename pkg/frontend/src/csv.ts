/**
 * Loader for experiment run directories: metrics.csv plus manifest.json.
 *
 * Every check reports a diagnostic string instead of throwing, so a
 * caller can show all problems with a run at once. A table with a
 * non-empty diagnostics list must not be rendered.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import Papa from "papaparse";
import { z } from "zod";

export const SCHEMA = "lmimo-metrics v1";

const manifestSchema = z.object({
  schema: z.string(),
  recipe: z.string(),
  kind: z.string(),
  seed: z.number().int(),
  trials: z.number().int(),
  config_hash: z.string(),
  sweep: z.object({
    axis: z.string(),
    values: z.array(z.union([z.number(), z.string()])),
  }),
  columns: z.array(z.string()),
  n_rows: z.number().int(),
  n_tasks: z.number().int(),
  kernel_backend: z.string(),
});

export type Manifest = z.infer<typeof manifestSchema>;
export type Row = Record<string, string>;

export interface Table {
  dir: string;
  manifest: Manifest | null;
  columns: string[];
  rows: Row[];
  /** Trailing segment of the sweep axis, e.g. "bits" for "adc.bits". */
  sweepColumn: string;
  diagnostics: string[];
}

/** Numeric cell value, or null for empty / non-numeric text. */
export function num(row: Row, column: string): number | null {
  const text = row[column];
  if (text === undefined || text === "") return null;
  const value = Number(text);
  return Number.isFinite(value) ? value : null;
}

function parseManifest(dir: string, diagnostics: string[]): Manifest | null {
  let raw: string;
  try {
    raw = readFileSync(join(dir, "manifest.json"), "utf8");
  } catch {
    diagnostics.push(`${dir}: manifest.json not readable`);
    return null;
  }
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    diagnostics.push(`${dir}: manifest.json is not valid JSON`);
    return null;
  }
  const result = manifestSchema.safeParse(data);
  if (!result.success) {
    for (const issue of result.error.issues) {
      diagnostics.push(
        `${dir}: manifest ${issue.path.join(".") || "(root)"}: ${issue.message}`,
      );
    }
    return null;
  }
  if (result.data.schema !== SCHEMA) {
    diagnostics.push(
      `${dir}: manifest schema is "${result.data.schema}", expected "${SCHEMA}"`,
    );
    return null;
  }
  return result.data;
}

/**
 * Load one run directory. IO failures on metrics.csv throw (the run
 * does not exist); everything else becomes a diagnostic.
 */
export function loadRunDir(dir: string): Table {
  const diagnostics: string[] = [];
  const manifest = parseManifest(dir, diagnostics);

  const text = readFileSync(join(dir, "metrics.csv"), "utf8");
  const newline = text.indexOf("\n");
  const firstLine = newline < 0 ? text : text.slice(0, newline);
  if (!firstLine.startsWith(`# ${SCHEMA}`)) {
    diagnostics.push(`${dir}: metrics.csv missing "${SCHEMA}" header line`);
    return { dir, manifest, columns: [], rows: [], sweepColumn: "", diagnostics };
  }

  const parsed = Papa.parse<Row>(text.slice(newline + 1), {
    header: true,
    skipEmptyLines: true,
  });
  for (const err of parsed.errors) {
    diagnostics.push(`${dir}: metrics.csv row ${err.row}: ${err.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  const rows = parsed.data;

  if (manifest !== null) {
    if (JSON.stringify(columns) !== JSON.stringify(manifest.columns)) {
      diagnostics.push(
        `${dir}: metrics.csv columns [${columns.join(", ")}] do not match ` +
          `manifest [${manifest.columns.join(", ")}]`,
      );
    }
    if (rows.length !== manifest.n_rows) {
      diagnostics.push(
        `${dir}: metrics.csv has ${rows.length} rows, manifest says ${manifest.n_rows}`,
      );
    }
  }

  const axis = manifest?.sweep.axis ?? "";
  const sweepColumn = axis.includes(".") ? axis.split(".").slice(1).join(".") : axis;
  return { dir, manifest, columns, rows, sweepColumn, diagnostics };
}
