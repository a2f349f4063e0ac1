"""Command-line front door.

    updatebench <stage> [--config PATH] [--out DIR] [flags...]

Stages: mine, split, tokenize, train, recommend, evaluate, classify,
report. Exit codes: 0 success, 1 stage failure (stage name on stderr),
2 missing input artifact (missing path on stderr).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import UpdateBenchError
from .pipeline import MODES, load_config, run_stage

STAGES = ["mine", "split", "tokenize", "train", "recommend", "evaluate", "classify", "report"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="updatebench",
        description="Mine, tokenize, train, recommend and score method-level code updates.",
    )
    parser.add_argument("stage", choices=STAGES)
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--out", dest="out_dir", help="output directory for stage artifacts")
    parser.add_argument("--repos", dest="repo_list", help="newline-delimited repo list file")
    parser.add_argument("--jobs", type=int, help="worker cap for mining")
    parser.add_argument("--seed", type=int, help="seed for splits, init and shuffling")
    parser.add_argument("--beam", dest="beam_widths", help="beam widths, e.g. 1,5,10,15")
    parser.add_argument("--mode", choices=MODES, help="tokenization mode")
    parser.add_argument("--split", choices=["timewise", "random"], dest="split",
                        help="split policy")
    parser.add_argument("--boundary", help="ISO date boundary for time-wise splits")
    parser.add_argument("--timeignore-dir", help="report: directory of a time-ignore run "
                        "to compare against")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {
        key: getattr(args, key)
        for key in ("out_dir", "repo_list", "jobs", "seed", "beam_widths", "mode",
                    "split", "boundary")
        if getattr(args, key) is not None
    }
    try:
        cfg = load_config(args.config, overrides)
        kwargs = {}
        if args.stage == "report":
            kwargs["timeignore_dir"] = args.timeignore_dir
        result = run_stage(args.stage, cfg, **kwargs)
    except FileNotFoundError as e:
        print(f"missing input artifact: {e}", file=sys.stderr)
        return 2
    except (UpdateBenchError, ValueError) as e:
        print(f"stage {args.stage} failed: {e}", file=sys.stderr)
        return 1
    if isinstance(result, (list, tuple)):
        for path in result:
            print(path)
    else:
        print(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
