"""Command-line entry point: run one paradigm or a tau sweep and write results."""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as config_mod
from . import experiment
from .errors import EdgeDistillError
from .protocol import Paradigm
from .report import ParadigmSummary, comparison_table, emit

log = logging.getLogger("edgedistill")


def _parse_sweep(text: str) -> list[float]:
    key, _, values = text.partition("=")
    if key.strip() != "tau" or not values:
        raise argparse.ArgumentTypeError("sweep must look like tau=0.1,0.2,0.3")
    try:
        return [float(v) for v in values.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="edgedistill",
        description="Simulate confidence-gated cloud-edge inference with distillation updates.",
    )
    p.add_argument("--config", help="JSON run configuration (defaults apply when omitted)")
    p.add_argument("--tau", type=float, help="confidence threshold override")
    p.add_argument("--rounds", type=int, help="number of rounds override")
    p.add_argument("--seed", type=int, help="seed override (data, models and stream)")
    p.add_argument("--paradigm", choices=[m.value for m in Paradigm], help="paradigm override")
    p.add_argument("--out", default="results", help="output directory (default: %(default)s)")
    p.add_argument("--sweep", type=_parse_sweep, metavar="tau=V1,V2,...",
                   help="run every paradigm, gated ones at each listed tau")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_mod.load(args.config) if args.config else config_mod.RunConfig()
        cfg = config_mod.with_overrides(cfg, tau=args.tau, rounds=args.rounds, seed=args.seed,
                                        paradigm=args.paradigm)
        prepared = experiment.prepare(cfg)
        ckpt_dir = f"{args.out}/checkpoints"
        if args.sweep:
            results = experiment.sweep(cfg, args.sweep, prepared, ckpt_dir)
        else:
            results = [experiment.run(cfg, prepared, checkpoint_dir=ckpt_dir)]
        emit(results, args.out, cfg.to_dict(), cfg.seed)
    except EdgeDistillError as exc:
        print(f"edgedistill: error: {exc}", file=sys.stderr)
        return 2
    print(comparison_table([ParadigmSummary.from_result(r) for r in results]))
    print(f"results written to {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
