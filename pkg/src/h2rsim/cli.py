"""Command-line entry points: generate / rollout / fixture.

Module errors exit nonzero after printing one JSON error record to stderr;
usage errors exit 2 via argparse. H2R_LOG=debug|info controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import load_config
from .dataset import POLICY_NAMES, generate_dataset, rollout_dataset
from .errors import H2RSimError
from .fixtures import FIXTURE_NAMES, write_fixture

log = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="h2rsim",
        description="Synthesize handover demonstrations and evaluate "
                    "closed-loop reaching policies on point-cloud scenes.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a demonstration dataset")
    gen.add_argument("--config", required=True, help="run config file")
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--workers", type=int, default=1)

    roll = sub.add_parser("rollout", help="run a policy over dataset starts")
    roll.add_argument("--config", required=True, help="run config file")
    roll.add_argument("--dataset", required=True, help="generated dataset directory")
    roll.add_argument("--policy", required=True, choices=POLICY_NAMES)
    roll.add_argument("--out", required=True, help="output report directory")
    roll.add_argument("--workers", type=int, default=1)
    roll.add_argument("--limit", type=int, default=None,
                      help="use only the first N starts")

    fix = sub.add_parser("fixture", help="write a deterministic synthetic scene")
    fix.add_argument("--name", required=True, choices=FIXTURE_NAMES)
    fix.add_argument("--seed", required=True, type=int)
    fix.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(
        os.environ.get("H2R_LOG", "info").lower(), logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    args = _build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            cfg = load_config(args.config)
            index = generate_dataset(cfg, args.out, workers=args.workers)
            log.info("wrote %d trajectories to %s", len(index["trajectories"]),
                     args.out)
        elif args.command == "rollout":
            cfg = load_config(args.config)
            reports = rollout_dataset(cfg, args.dataset, args.policy, args.out,
                                      workers=args.workers, limit=args.limit)
            log.info("completed %d episodes; reports in %s", len(reports),
                     args.out)
        elif args.command == "fixture":
            scene_path, grasps_path = write_fixture(args.name, args.seed, args.out)
            log.info("wrote %s and %s", scene_path, grasps_path)
        return 0
    except H2RSimError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
