"""Command-line entry point: ``maccfd {run,plot,validate,oracle}``."""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from maccfd import config as config_mod
from maccfd.experiment import emit_csv, run_experiment
from maccfd.plotting import KINDS, emit_plot

log = logging.getLogger("maccfd")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maccfd", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("config", help="scenario config file (INI)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--realizations", type=int, help="override num_realizations")
        p.add_argument("--workers", type=int, default=1, help="worker processes (output-invariant)")
        p.add_argument("--output-dir", help="override output_dir")

    scenario_args(sub.add_parser("run", help="execute a scenario and write CSVs"))
    scenario_args(sub.add_parser("oracle", help="brute-force grid reference for a scenario"))
    p = sub.add_parser("validate", help="check a config file without running it")
    p.add_argument("config")
    p = sub.add_parser("plot", help="render an aggregate CSV as SVG")
    p.add_argument("csv", help="aggregate (or trace) CSV")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("-o", "--output", required=True)
    return parser


def _load(args):
    cfg = config_mod.load(args.config)
    cfg = config_mod.with_overrides(cfg, args.seed, args.realizations)
    if args.output_dir:
        cfg = replace(cfg, output_dir=args.output_dir)
    return cfg


def _run(cfg, workers: int, name: str) -> None:
    result = run_experiment(cfg, workers=max(1, workers))
    paths = emit_csv(result, Path(cfg.output_dir) / f"{name}.csv")
    for kind, path in paths.items():
        print(f"{kind}: {path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            cfg = config_mod.load(args.config)
            print(f"{args.config}: ok ({len(cfg.schemes)} scheme/mode pairs, "
                  f"{len(cfg.sweep_points())} sweep point(s), {cfg.num_realizations} realizations)")
        elif args.command == "run":
            cfg = _load(args)
            _run(cfg, args.workers, cfg.name)
        elif args.command == "oracle":
            cfg = _load(args)
            modes = sorted({mode for _, mode in cfg.schemes})
            cfg = replace(cfg, schemes=tuple(("BRUTE", m) for m in modes))
            _run(cfg, args.workers, f"{cfg.name}_oracle")
        elif args.command == "plot":
            print(emit_plot(args.csv, args.kind, args.output))
    except (OSError, ValueError) as exc:
        print(f"maccfd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
