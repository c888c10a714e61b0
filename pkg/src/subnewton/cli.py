"""Command line entry point: run / validate / constants / replay."""

import argparse
import json
import sys

from . import dataset as ds_mod, experiment, optimize
from .objective import LogisticObjective

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ALL_FAILED = 2


def _load_config(path):
    with open(path) as fh:
        return experiment.validate_config(fh.read())


def cmd_run(args):
    try:
        cfg = _load_config(args.config)
    except experiment.ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out, failures, total = experiment.run_experiment(
        cfg, output_dir=args.output)
    print(f"wrote {out} ({total - failures}/{total} runs succeeded)")
    if failures == total:
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_validate(args):
    try:
        with open(args.config) as fh:
            experiment.validate_config(fh.read())
    except experiment.ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def cmd_constants(args):
    try:
        cfg = _load_config(args.config)
    except experiment.ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    source = experiment.load_dataset(cfg.dataset)
    split = ds_mod.split(source, ratio=cfg.split.get("ratio", 0.7),
                         seed=cfg.split.get("seed", 0))
    lam = cfg.lam if cfg.lam is not None else 1.0 / split.train.n
    obj = LogisticObjective(split.train, lam)
    w_star = optimize.reference_minimizer(obj)
    report = experiment._constants_report(cfg, obj, w_star)
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def cmd_replay(args):
    out, failures, total = experiment.replay(args.manifest, args.output)
    print(f"wrote {out} ({total - failures}/{total} runs succeeded)")
    if failures == total:
        return EXIT_ALL_FAILED
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="subnewton",
        description="Subsampled Newton experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", default=None,
                       help="override the config output directory")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)

    p_const = sub.add_parser(
        "constants", help="emit the theory-constants report only")
    p_const.add_argument("config")
    p_const.set_defaults(func=cmd_constants)

    p_replay = sub.add_parser("replay", help="re-run a recorded manifest")
    p_replay.add_argument("manifest")
    p_replay.add_argument("-o", "--output", required=True)
    p_replay.set_defaults(func=cmd_replay)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
