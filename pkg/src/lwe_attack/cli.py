"""Command-line surface: gen / train / attack / sweep / verify.

Every flag mirrors a config key; `--set section.key=value` overrides any
of them, and `--config` loads a flat key=value file first.  Exit codes:
0 on success (full recovery / accepted), 2 on a clean failure outcome,
1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .data import gen_secret, load_samples, save_samples
from .harness import (
    ExperimentConfig,
    TASK_KINDS,
    config_from_items,
    load_config,
    run_attack,
    run_sweep,
    run_task,
    save_config,
    _generate,
)
from .predictors import ExactOracle
from .recovery import verify_secret


def _build_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    overrides = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        overrides[key.strip()] = val.strip()
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    if overrides:
        cfg = config_from_items(overrides, cfg)
    return cfg


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", "-c", help="flat key=value config file")
    p.add_argument("--set", "-s", action="append", metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--quiet", action="store_true")


def cmd_gen(args) -> int:
    cfg = _build_config(args)
    rng = np.random.default_rng(cfg.seed)
    secret = gen_secret(cfg.lwe, rng)
    samples = _generate(cfg.lwe, secret, args.count, rng)
    save_samples(samples, args.out)
    if args.secret_out:
        with open(args.secret_out, "w") as f:
            f.write(" ".join(map(str, secret.coords)) + "\n")
    if not args.quiet:
        print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _build_config(args)
    log = None if args.quiet else lambda msg: print(msg, flush=True)
    report = run_task(args.kind, cfg, curve_csv=args.curve_csv, log=log)
    print(json.dumps(report.to_dict()))
    return 0 if report.success else 2


def cmd_attack(args) -> int:
    cfg = _build_config(args)
    predictor = ExactOracle if args.test_oracle else None
    log = None if args.quiet else lambda msg: print(msg, flush=True)
    report = run_attack(cfg, predictor=predictor, curve_csv=args.curve_csv,
                        log=log)
    text = report.to_json(indent=2)
    if args.report:
        with open(args.report, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0 if report.outcome == "full-recovery" else 2


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    log = None if args.quiet else lambda msg: print(msg, flush=True)
    rows = run_sweep(cfg, out_csv=args.out, log=log)
    if not args.quiet:
        print(f"wrote {len(rows)} cells to {args.out}")
    return 0


def cmd_verify(args) -> int:
    samples = load_samples(args.samples)
    with open(args.candidate) as f:
        bits = [int(tok) for tok in f.read().split()]
    report = verify_secret(np.asarray(bits, dtype=np.int64), samples,
                           args.sigma if args.sigma is not None
                           else samples.effective_sigma)
    print(json.dumps({
        "residual_stddev": report.residual_stddev,
        "accepted": report.accepted,
        "threshold": report.threshold,
    }))
    return 0 if report.accepted else 2


def cmd_show_config(args) -> int:
    cfg = _build_config(args)
    if args.out:
        save_config(cfg, args.out)
    else:
        from .harness import config_to_items
        for key, val in config_to_items(cfg).items():
            print(f"{key} = {val}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lwe-attack",
        description="LWE secret recovery via sequence models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an LWE dataset file")
    _add_common(p)
    p.add_argument("--out", "-o", required=True, help="output path (.gz ok)")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--secret-out", help="also write the secret (for tests)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train on an arithmetic task")
    _add_common(p)
    p.add_argument("--kind", choices=TASK_KINDS, default="1d-modmul")
    p.add_argument("--curve-csv", help="append per-epoch loss/accuracy")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="run the full attack loop")
    _add_common(p)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--curve-csv", help="append per-epoch loss/accuracy")
    p.add_argument("--test-oracle", action="store_true",
                   help="inject an exact oracle instead of training (pipeline test)")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("sweep", help="run an attack per grid cell")
    _add_common(p)
    p.add_argument("--out", "-o", required=True, help="CSV output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="verify a candidate secret against samples")
    p.add_argument("--samples", required=True, help="sample file from `gen`")
    p.add_argument("--candidate", required=True,
                   help="text file of whitespace-separated bits")
    p.add_argument("--sigma", type=float,
                   help="error width (default: the file's effective sigma)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("show-config", help="print or save the resolved config")
    _add_common(p)
    p.add_argument("--out", "-o", help="write instead of printing")
    p.set_defaults(func=cmd_show_config)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
