"""Experiment execution: scheduling, merging, CSV and manifest output.

Rows come back from the pipeline in task-index order regardless of
worker count, and every float is serialized with repr, so a given
(config, seed) pair produces byte-identical output files on every run.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .. import _kernels
from ..errors import ValidationError
from .config import ExperimentConfig, require_valid
from .pipeline import METRICS, aggregate, build_tasks, run_task

METRICS_SCHEMA = "lmimo-metrics v1"


@dataclass(frozen=True)
class RunReport:
    metrics_path: str
    manifest_path: str
    raw_path: str | None
    n_rows: int
    n_tasks: int


def _format(value):
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        # np.float64 passes the isinstance check but reprs as
        # "np.float64(...)"; collapse to the plain shortest round trip.
        return repr(float(value))
    return value


def write_metrics_csv(rows, path, header_meta):
    """Atomic CSV write with a schema comment line.

    All rows must share one key set; the column order is the first
    row's insertion order.
    """
    if not rows:
        raise ValidationError("no rows to write")
    columns = list(rows[0])
    for row in rows:
        if list(row) != columns:
            raise ValidationError(
                f"inconsistent row keys: {list(row)} vs {columns}")
    out_dir = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".csv.tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(f"# {METRICS_SCHEMA} {header_meta}\n")
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format(row[c]) for c in columns])
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def read_metrics_csv(path):
    """Rows (as string dicts) and the schema comment of a metrics file."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(f"# {METRICS_SCHEMA}"):
            raise ValidationError(
                f"{path}: missing '{METRICS_SCHEMA}' header line")
        reader = csv.DictReader(fh)
        return list(reader), first[2:].strip()


def _write_manifest(cfg, path, columns, n_rows, n_tasks):
    manifest = {
        "schema": METRICS_SCHEMA,
        "recipe": cfg.recipe,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "config_hash": cfg.config_hash(),
        "sweep": {"axis": cfg.sweep_axis, "values": cfg.sweep_values},
        "columns": columns,
        "n_rows": n_rows,
        "n_tasks": n_tasks,
        "kernel_backend": _kernels.BACKEND,
    }
    out_dir = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".json.tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def execute(cfg: ExperimentConfig, out_dir, jobs=1) -> RunReport:
    """Validate, run all tasks, and write metrics plus manifest."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = replace(cfg, output={**cfg.output, "dir": str(out_dir)})
    require_valid(cfg)

    tasks = build_tasks(cfg)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_task, cfg, value, unit)
                       for value, unit in tasks]
            results = [f.result() for f in futures]
    else:
        results = [run_task(cfg, value, unit) for value, unit in tasks]
    raw_rows = [row for rows in results for row in rows]
    agg_rows = aggregate(cfg.kind, raw_rows)

    meta = f"recipe={cfg.recipe} seed={cfg.seed} hash={cfg.config_hash()}"
    metrics_path = write_metrics_csv(
        agg_rows, os.path.join(out_dir, "metrics.csv"), meta)
    raw_path = None
    if cfg.output.get("raw", False) and cfg.kind in METRICS:
        raw_path = write_metrics_csv(
            raw_rows, os.path.join(out_dir, "raw.csv"), meta)
    manifest_path = _write_manifest(
        cfg, os.path.join(out_dir, "manifest.json"),
        list(agg_rows[0]), len(agg_rows), len(tasks))
    return RunReport(
        metrics_path=metrics_path,
        manifest_path=manifest_path,
        raw_path=raw_path,
        n_rows=len(agg_rows),
        n_tasks=len(tasks),
    )
