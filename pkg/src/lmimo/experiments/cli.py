"""Command-line entry point for running and replaying experiments.

Exit codes: 0 success, 2 configuration or validation failure, 3
runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources

from ..errors import LmimoError, ValidationError
from .config import ExperimentConfig, load_config, validate
from .runner import execute

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3


def shipped_recipes():
    root = resources.files("lmimo.experiments") / "recipes"
    return sorted(p.name[:-5] for p in root.iterdir()
                  if p.name.endswith(".toml"))


def resolve_recipe(name):
    """A shipped recipe name or a path to a TOML file."""
    if name.endswith(".toml"):
        return name
    root = resources.files("lmimo.experiments") / "recipes"
    candidate = root / f"{name}.toml"
    if candidate.is_file():
        return str(candidate)
    raise ValidationError(
        f"unknown recipe {name!r}; shipped recipes: "
        f"{', '.join(shipped_recipes())}")


def _load(name, args):
    cfg = load_config(resolve_recipe(name))
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if overrides:
        cfg = replace(cfg, **overrides)
    if getattr(args, "raw", False):
        cfg = cfg.with_override("output.raw", True)
    return cfg


def cmd_run(args):
    cfg = _load(args.recipe, args)
    report = execute(cfg, args.out, jobs=args.jobs)
    print(f"{cfg.recipe}: {report.n_tasks} tasks -> "
          f"{report.n_rows} rows in {report.metrics_path}")
    return EXIT_OK


def cmd_replay(args):
    cfg = ExperimentConfig(
        recipe="replay", kind="replay", seed=0, trials=1,
        recovery={"order": args.order},
        replay={"sidecar": args.sidecar or "",
                "reference": args.reference or ""},
        sweep={"axis": "replay.samples", "values": list(args.samples)},
    )
    report = execute(cfg, args.out, jobs=1)
    print(f"replay: {report.n_rows} captures -> {report.metrics_path}")
    return EXIT_OK


def cmd_validate(args):
    cfg = load_config(resolve_recipe(args.recipe))
    diags = validate(cfg)
    if diags:
        for d in diags:
            print(f"invalid: {d}")
        return EXIT_INVALID
    print(f"{cfg.recipe}: valid ({cfg.kind}, sweep {cfg.sweep_axis} over "
          f"{len(cfg.sweep_values)} values)")
    return EXIT_OK


def cmd_list_recipes(args):
    for name in shipped_recipes():
        cfg = load_config(resolve_recipe(name))
        print(f"{name:24s} {cfg.kind:14s} sweep {cfg.sweep_axis} "
              f"x{len(cfg.sweep_values)}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lmimo",
        description="Modulo-ADC massive MIMO uplink experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a recipe and write metrics CSV")
    run.add_argument("recipe", help="shipped recipe name or TOML path")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default="out")
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--raw", action="store_true",
                     help="also write per-trial rows")
    run.set_defaults(func=cmd_run)

    replay = sub.add_parser(
        "replay", help="recover previously captured folded CSVs")
    replay.add_argument("samples", nargs="+",
                        help="folded-sample CSV files (with .json sidecars)")
    replay.add_argument("--sidecar", default=None,
                        help="sidecar path (default: <samples>.json)")
    replay.add_argument("--reference", default=None,
                        help="ground-truth CSV for a residual check")
    replay.add_argument("--out", default="out")
    replay.add_argument("--order", type=int, default=0,
                        help="difference order override (0 = automatic)")
    replay.set_defaults(func=cmd_replay)

    val = sub.add_parser("validate", help="check a recipe without running")
    val.add_argument("recipe")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list-recipes", help="show shipped recipes")
    lst.set_defaults(func=cmd_list_recipes)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except LmimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
