"""Command-line interface: `run` executes experiment cells, `report`
aggregates the stored runs into tables and figures.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core import ConfigurationError
from .harness import VARIANTS, ExperimentConfig, run_experiment
from .problems import UnsupportedProblemError, available_problems
from .reporting import generate_report, write_run_csv, write_summary_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_DIRECTIONS = {"eq16": "extrapolate", "classic": "interpolate"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmopt",
        description="Dynamic multiobjective optimization with an online "
                    "SVM-filtered population predictor.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one experiment cell (one or more variants)")
    run.add_argument("--problem", default="DF0", metavar="NAME",
                     help=f"benchmark name ({', '.join(available_problems())})")
    run.add_argument("--optimizer", default="nsga2", choices=["nsga2", "mopso"])
    run.add_argument("--variant", default="isvm",
                     help=f"comma-separated subset of {{{','.join(VARIANTS)}}}")
    run.add_argument("--nt", type=int, default=10, help="severity of change")
    run.add_argument("--taut", type=int, default=10, help="generations per environment")
    run.add_argument("--changes", type=int, default=30, help="number of environment changes")
    run.add_argument("--runs", type=int, default=20, help="independent runs per variant")
    run.add_argument("--pop-size", type=int, default=None,
                     help="population size (default: 100 for 2 objectives, 150 for 3)")
    run.add_argument("--seed", type=int, default=1)
    run.add_argument("--svm-c", type=float, default=10.0, help="soft-margin penalty")
    run.add_argument("--svm-scale", type=float, default=None,
                     help="fixed RBF scale (default: cross-validated grid search)")
    run.add_argument("--smote-direction", choices=sorted(_DIRECTIONS), default="eq16",
                     help="eq16: extrapolate away from the neighbor; "
                          "classic: interpolate toward it")
    run.add_argument("--oversampling-rate", type=int, default=5, metavar="R")
    run.add_argument("--neighbors", type=int, default=5, metavar="K")
    run.add_argument("--trace-every-generation", action="store_true",
                     help="also write per-generation IGD curves")
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")

    report = sub.add_parser("report", help="aggregate run CSVs into tables and figures")
    report.add_argument("--out", type=Path, default=Path("results"),
                        help="directory containing run CSVs")
    report.add_argument("--reference", default="da",
                        help="variant other variants are rank-sum tested against")
    return parser


def _run_command(args) -> int:
    variants = [v.strip() for v in args.variant.split(",") if v.strip()]
    for v in variants:
        if v not in VARIANTS:
            raise ConfigurationError(f"unknown variant {v!r}; choose from {VARIANTS}")
    records = []
    snapshot = None
    for variant in variants:
        cfg = ExperimentConfig(
            problem=args.problem,
            optimizer=args.optimizer,
            variant=variant,
            n_t=args.nt,
            tau_t=args.taut,
            num_changes=args.changes,
            runs=args.runs,
            pop_size=args.pop_size,
            seed=args.seed,
            posmote_r=args.oversampling_rate,
            posmote_k=args.neighbors,
            smote_direction=_DIRECTIONS[args.smote_direction],
            svm_c=args.svm_c,
            svm_scale=args.svm_scale,
            trace_every_generation=args.trace_every_generation,
        )
        snapshot = snapshot or cfg.snapshot()
        for record in run_experiment(cfg):
            path = write_run_csv(record, args.out)
            logger.info("wrote %s", path)
            records.append(record)
    reference = "da" if "da" in variants else variants[0]
    summary = write_summary_json(records, snapshot, args.out, reference_variant=reference)
    print(f"wrote {len(records)} run CSVs and {summary}")
    return EXIT_OK


def _report_command(args) -> int:
    paths = generate_report(args.out, reference_variant=args.reference)
    print(f"wrote {paths.comparison}")
    print(f"wrote {paths.long_csv}")
    for fig in paths.figures:
        print(f"wrote {fig}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _run_command(args)
        return _report_command(args)
    except (ConfigurationError, UnsupportedProblemError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:
        logger.exception("run failed")
        print(f"runtime failure: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
