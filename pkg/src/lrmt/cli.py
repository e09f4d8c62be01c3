"""Command-line entry point.

Subcommands map onto pipeline stages (train-bpe, preprocess, pretrain,
finetune, decode, score, report), plus `compare` for multi-regime tables and
a standalone `score --hyp/--ref` mode. Exit codes: 0 success, 2 config
error, 3 data error, 4 training divergence.
"""

import argparse
import sys
from pathlib import Path

from . import __version__
from .experiment import (ConfigError, DataError, IncompatibleTokenizers,
                         compare_regimes, run_experiment)
from .trainer import DivergedLoss

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGED = 4

_STAGE_BY_COMMAND = {
    "train-bpe": "tokenizer",
    "preprocess": "preprocess",
    "pretrain": "pretrain",
    "finetune": "finetune",
    "decode": "decode",
    "score": "score",
    "report": "report",
}


def _add_common(sub):
    sub.add_argument("--config", "-c", required=True, help="experiment config file")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="SECTION.KEY=VALUE", help="override a config value")
    sub.add_argument("--force", action="store_true",
                     help="re-run stages even when the manifest is current")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrmt",
        description="Desk-scale low-resource MT fine-tuning laboratory")
    parser.add_argument("--version", action="version", version=f"lrmt {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    for command, stage in _STAGE_BY_COMMAND.items():
        helps = {
            "train-bpe": "train the shared subword model",
            "preprocess": "build the tagged training mixture",
            "pretrain": "code-switching pre-training phase",
            "finetune": "run the configured fine-tuning regime",
            "decode": "beam-decode the test sets",
            "score": "score decodes with the metric panel",
            "report": "render score tables and figures",
        }
        sub = subs.add_parser(command, help=helps[command])
        if command == "score":
            sub.add_argument("--hyp", help="hypothesis file (standalone scoring)")
            sub.add_argument("--ref", help="reference file (standalone scoring)")
            sub.add_argument("--config", "-c", help="experiment config file")
            sub.add_argument("--set", dest="overrides", action="append", default=[],
                             metavar="SECTION.KEY=VALUE")
            sub.add_argument("--force", action="store_true")
        else:
            _add_common(sub)

    compare = subs.add_parser("compare", help="combined regime-comparison report")
    compare.add_argument("--configs", nargs="+", required=True,
                         help="experiment config files, one per regime")
    compare.add_argument("--out", help="output directory for the combined report")
    compare.add_argument("--baseline", help="regime name used for delta columns")
    compare.add_argument("--force", action="store_true")
    compare.add_argument("--no-figures", action="store_true")
    return parser


def _score_files(hyp_path, ref_path) -> int:
    from .metrics import score_panel
    from .metrics.report import pairs_from_lines

    hyp_lines = Path(hyp_path).read_text(encoding="utf-8").splitlines()
    ref_lines = Path(ref_path).read_text(encoding="utf-8").splitlines()
    if len(hyp_lines) != len(ref_lines):
        raise DataError(f"{hyp_path} and {ref_path} differ in line count")
    panel = score_panel(pairs_from_lines(hyp_lines, ref_lines))
    for metric, value in panel.items():
        print(f"{metric}\t{value:.4f}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            result = compare_regimes(args.configs, out_dir=args.out,
                                     baseline=args.baseline, force=args.force,
                                     figures=not args.no_figures)
            print(f"report: {result['paths']['txt']}")
            return 0
        if args.command == "score" and args.hyp:
            if not args.ref:
                raise ConfigError("standalone scoring needs both --hyp and --ref")
            return _score_files(args.hyp, args.ref)
        if args.config is None:
            raise ConfigError(f"{args.command} needs --config")
        artifacts = run_experiment(args.config, overrides=args.overrides,
                                   force=args.force,
                                   through=_STAGE_BY_COMMAND[args.command])
        for key in ("report", "scores", "checkpoint", "bpe"):
            if key in artifacts:
                print(f"{key}: {artifacts[key]}")
                break
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergedLoss as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except IncompatibleTokenizers as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
