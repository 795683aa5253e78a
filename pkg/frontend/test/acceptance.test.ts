/**
 * End-to-end checks over the committed run fixtures. Each test prints
 * one [acceptance] line so a full run reads as a short report.
 */

import { readdirSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { expect, it } from "vitest";

import { loadRunDir, num } from "../src/csv.js";
import { applicableFigures, FIGURES, renderFigure } from "../src/figures.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function report(name: string, ok: boolean, detail: string): void {
  process.stdout.write(
    `[acceptance] ${name}: ${ok ? "PASS" : "FAIL"} (${detail})\n`);
}

it("every shipped figure spec renders every fixture with zero diagnostics", () => {
  const runs = readdirSync(FIXTURES, { withFileTypes: true })
    .filter((e) => e.isDirectory() && !e.name.startsWith("_"))
    .map((e) => e.name)
    .sort();
  const exercised = new Set<string>();
  const problems: string[] = [];
  let figures = 0;
  for (const run of runs) {
    const table = loadRunDir(join(FIXTURES, run));
    problems.push(...table.diagnostics);
    for (const spec of applicableFigures(table)) {
      const result = renderFigure(spec, table);
      problems.push(...result.diagnostics);
      if (result.svg === null) problems.push(`${run}/${spec.name}: no svg`);
      exercised.add(spec.name);
      figures += 1;
    }
  }
  const missing = FIGURES.map((s) => s.name).filter((n) => !exercised.has(n));
  const ok = problems.length === 0 && missing.length === 0;
  report("figure specs", ok,
    `${figures} figures over ${runs.length} runs, ` +
    `${problems.length} diagnostics, specs not exercised: ${missing.length}`);
  expect(problems).toEqual([]);
  expect(missing).toEqual([]);
});

it("modulo SQNR sits strictly above conventional at every bit depth", () => {
  const table = loadRunDir(join(FIXTURES, "sqnr-vs-b"));
  expect(table.diagnostics).toEqual([]);
  const conventional = new Map<string, number>();
  for (const row of table.rows) {
    if (row.adc === "conventional") {
      conventional.set(`${row.source}:${row.bits}`, num(row, "sqnr_db")!);
    }
  }
  let worst = Infinity;
  let compared = 0;
  for (const row of table.rows) {
    if (row.adc !== "modulo") continue;
    const gain = num(row, "sqnr_db")! - conventional.get(`${row.source}:${row.bits}`)!;
    if (gain < worst) worst = gain;
    compared += 1;
  }
  const ok = compared > 0 && worst > 0;
  report("modulo vs conventional", ok,
    `${compared} comparisons, smallest gain ${worst.toFixed(2)} dB`);
  expect(compared).toBeGreaterThanOrEqual(24);
  expect(worst).toBeGreaterThan(0);
});
