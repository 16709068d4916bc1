"""``infermpc`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from ..errors import ConfigError, InferMPCError
from . import config as cfgmod
from .commands import COMMANDS

log = logging.getLogger("infermpc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

VERBS = {
    "posterior": "posterior",
    "solve": "solve",
    "simulate": "simulate",
    "compare": "compare",
    "sweep-lambda": "sweep_lambda",
    "sweep-samples": "sweep_samples",
    "sweep-prior": "sweep_prior",
    "symmetry": "symmetry",
}


def recipe_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("infermpc.cli").joinpath("recipes").iterdir() if p.name.endswith(".toml"))


def recipe_path(name: str):
    path = resources.files("infermpc.cli").joinpath("recipes", f"{name}.toml")
    if not path.is_file():
        raise ConfigError(f"unknown recipe {name!r}; available: {', '.join(recipe_names())}")
    return path


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="flat dotted-key config file")
    src.add_argument("--recipe", help="name of a shipped recipe (see `infermpc recipes`)")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--threads", type=int, help="worker threads; never changes results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infermpc", description="Sampling-based MPC as probabilistic inference.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        _add_common(sub.add_parser(verb, help=f"run the {verb} experiment"))
    _add_common(sub.add_parser("run", help="run whatever experiment.kind the config names"))
    sub.add_parser("recipes", help="list shipped recipes")
    show = sub.add_parser("show-config", help="print the fully resolved config")
    _add_common(show)
    return parser


def resolve_config(args: argparse.Namespace) -> cfgmod.ExperimentConfig:
    if args.recipe:
        with resources.as_file(recipe_path(args.recipe)) as path:
            cfg = cfgmod.load(path)
    else:
        cfg = cfgmod.load(args.config)
    exp = cfg.experiment
    if args.verb in VERBS:
        exp = replace(exp, kind=VERBS[args.verb])
    if args.seed is not None:
        exp = replace(exp, seed=args.seed)
    if args.out is not None:
        exp = replace(exp, out=str(args.out))
    if args.threads is not None:
        exp = replace(exp, threads=args.threads)
    return replace(cfg, experiment=exp)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.verb == "recipes":
        for name in recipe_names():
            print(name)
        return EXIT_OK
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.verb == "show-config":
        sys.stdout.write(cfgmod.serialize(cfg))
        return EXIT_OK
    try:
        written = COMMANDS[cfg.experiment.kind](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InferMPCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for path in written:
        log.info("wrote %s", path)
    print(f"wrote {len(written)} file(s) to {cfg.experiment.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
