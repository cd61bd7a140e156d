"""Train and serve commands."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from scorer_service.data import DataFormatError, build_training_data
from scorer_service.service import ServiceConfig, create_app
from scorer_service.train import train

log = logging.getLogger("scorer_service")


def cmd_train(args: argparse.Namespace) -> int:
    argument_paths = None
    if args.arguments and args.argument_labels:
        argument_paths = (args.arguments, args.argument_labels)
    try:
        splits = build_training_data(
            args.scenarios, argument_paths, task=args.task, seed=args.seed
        )
    except DataFormatError as exc:
        log.error("bad training data: %s", exc)
        return 3
    log.info("splits: train=%d dev=%d test=%d", *splits.sizes())
    _, result = train(
        splits,
        task=args.task,
        seed=args.seed,
        smoke=args.smoke,
        out_path=args.out,
    )
    print(json.dumps(result.as_dict(), indent=2))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = ServiceConfig(
        relevance_model=args.relevance_model,
        stance_model=args.stance_model,
        max_batch=args.max_batch,
    )
    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorer-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a relevance or stance classifier")
    p.add_argument("--task", choices=("relevance", "stance"), required=True)
    p.add_argument("--scenarios", help="scenario dataset CSV (value,label,scenario)")
    p.add_argument("--arguments", help="argument dataset TSV (Argument ID, Premise)")
    p.add_argument("--argument-labels", help="argument per-category labels TSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--smoke", action="store_true",
                   help="1 epoch on <=100 examples: fast CPU sanity run")
    p.add_argument("--out", help="model artifact output path (.pt)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("serve", help="run the HTTP scoring service")
    p.add_argument("--relevance-model")
    p.add_argument("--stance-model")
    p.add_argument("--max-batch", type=int, default=256)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
