#!/usr/bin/env node
/**
 * lmimo-plot: render SVG figures from experiment run directories.
 *
 *   lmimo-plot render <run-dir> [--figure name] [--out dir]
 *   lmimo-plot list
 *
 * Exit codes follow the producer CLI: 0 success, 2 invalid input or
 * schema diagnostics, 3 runtime failure (unreadable run directory).
 * All figures for a run are rendered before anything is written, so a
 * failing figure never leaves partial output.
 */

import { mkdirSync, realpathSync, renameSync, rmSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { loadRunDir, Table } from "./csv.js";
import {
  applicableFigures,
  figureByName,
  FIGURES,
  FigureSpec,
  renderFigure,
} from "./figures.js";

export const EXIT_OK = 0;
export const EXIT_INVALID = 2;
export const EXIT_RUNTIME = 3;

export function atomicWrite(path: string, content: string): void {
  const tmp = `${path}.tmp-${process.pid}`;
  try {
    writeFileSync(tmp, content);
    renameSync(tmp, path);
  } catch (err) {
    rmSync(tmp, { force: true });
    throw err;
  }
}

function selectSpecs(table: Table, name: string | undefined, err: string[]): FigureSpec[] {
  if (name !== undefined) {
    const spec = figureByName(name);
    if (!spec) {
      err.push(
        `unknown figure "${name}"; available: ${FIGURES.map((s) => s.name).join(", ")}`,
      );
      return [];
    }
    return [spec];
  }
  const specs = applicableFigures(table);
  if (specs.length === 0 && table.manifest !== null) {
    err.push(`no figure spec applies to kind "${table.manifest.kind}"`);
  }
  return specs;
}

export function runRender(
  runDir: string,
  opts: { figure?: string; out?: string } = {},
): number {
  let table: Table;
  try {
    table = loadRunDir(runDir);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return EXIT_RUNTIME;
  }

  const problems: string[] = [];
  const specs = selectSpecs(table, opts.figure, problems);
  if (table.manifest === null) problems.push(...table.diagnostics);

  const rendered: Array<{ spec: FigureSpec; svg: string }> = [];
  if (problems.length === 0) {
    for (const spec of specs) {
      const result = renderFigure(spec, table);
      if (result.svg === null) {
        problems.push(...result.diagnostics);
      } else {
        rendered.push({ spec, svg: result.svg });
      }
    }
  }
  if (problems.length > 0) {
    for (const line of problems) process.stderr.write(`${line}\n`);
    return EXIT_INVALID;
  }

  const outDir = opts.out ?? join(runDir, "figures");
  try {
    mkdirSync(outDir, { recursive: true });
    for (const { spec, svg } of rendered) {
      const path = join(outDir, `${spec.name}.svg`);
      atomicWrite(path, svg);
      process.stdout.write(`wrote ${path}\n`);
    }
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return EXIT_RUNTIME;
  }
  return EXIT_OK;
}

export function runList(): number {
  for (const spec of FIGURES) {
    process.stdout.write(
      `${spec.name.padEnd(20)} ${spec.kinds.join("|").padEnd(24)} ${spec.description}\n`,
    );
  }
  return EXIT_OK;
}

const USAGE = `usage: lmimo-plot <command>

  render <run-dir> [--figure name] [--out dir]   render figures for one run
  list                                           list the available figure specs
`;

export async function main(argv: string[]): Promise<number> {
  const command = argv[0];
  if (command === "list") {
    if (argv.length > 1) {
      process.stderr.write("error: list takes no arguments\n");
      return EXIT_INVALID;
    }
    return runList();
  }
  if (command === "render") {
    let parsed;
    try {
      parsed = parseArgs({
        args: argv.slice(1),
        options: {
          figure: { type: "string" },
          out: { type: "string" },
        },
        allowPositionals: true,
      });
    } catch (err) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return EXIT_INVALID;
    }
    if (parsed.positionals.length !== 1) {
      process.stderr.write("error: render takes exactly one run directory\n");
      return EXIT_INVALID;
    }
    return runRender(parsed.positionals[0]!, {
      figure: parsed.values.figure,
      out: parsed.values.out,
    });
  }
  if (command === "--help" || command === "-h") {
    process.stdout.write(USAGE);
    return EXIT_OK;
  }
  process.stderr.write(command === undefined
    ? USAGE
    : `error: unknown command "${command}"\n${USAGE}`);
  return EXIT_INVALID;
}

const entry = process.argv[1];
if (entry !== undefined && import.meta.url === pathToFileURL(realpathSync(entry)).href) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
