"""Command-line entry point: gen / train / eval / report subcommands.

Each subcommand takes --config (plain-text key=value file), --seed
(master seed override), and --out (run directory).  Exit status is 0 on
success, 1 on any failure with a diagnostic naming the offending path.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .config import RunConfig, parse_config_file, write_metadata
from .metrics import read_metrics_csv
from .nn.checkpoint import load_model
from .simulate import dataset_paths, generate_dataset, run_eval, train_model, write_report

MODEL_FILENAME = "model.cvxm"
METRICS_FILENAME = "metrics.csv"
METADATA_FILENAME = "run_metadata.txt"


def _load_config(args) -> RunConfig:
    if args.config is not None:
        if not os.path.exists(args.config):
            raise FileNotFoundError(f"config file missing: {args.config}")
        cfg = parse_config_file(args.config)
    else:
        cfg = RunConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    return cfg


def _cmd_gen(args) -> None:
    cfg = _load_config(args)
    os.makedirs(args.out, exist_ok=True)
    paths = generate_dataset(cfg, args.out)
    write_metadata(
        os.path.join(args.out, METADATA_FILENAME),
        cfg,
        extra={"dataset_files": len(paths)},
    )
    print(f"wrote {len(paths)} dataset files to {args.out}")


def _cmd_train(args) -> None:
    cfg = _load_config(args)
    missing = [p for p in dataset_paths(cfg, args.out) if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(f"dataset file missing: {missing[0]} (run 'gen' first)")
    model_path = os.path.join(args.out, MODEL_FILENAME)
    _, history = train_model(cfg, args.out, model_path)
    with open(os.path.join(args.out, "loss_history.txt"), "w") as fh:
        for epoch, loss in enumerate(history, 1):
            fh.write(f"{epoch} {loss:.8e}\n")
    print(f"trained {cfg.epochs} epochs; final loss {history[-1]:.4e}; saved {model_path}")


def _cmd_eval(args) -> None:
    cfg = _load_config(args)
    estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    model = None
    if "ann" in estimators:
        model_path = args.model or os.path.join(args.out, MODEL_FILENAME)
        if not os.path.exists(model_path):
            raise FileNotFoundError(f"model checkpoint missing: {model_path} (run 'train' first)")
        model, _ = load_model(model_path)
    csv_path = os.path.join(args.out, METRICS_FILENAME)
    rows = run_eval(cfg, args.out, model=model, estimators=estimators, csv_path=csv_path)
    print(f"wrote {len(rows)} metric rows to {csv_path}")


def _cmd_report(args) -> None:
    csv_path = os.path.join(args.out, METRICS_FILENAME)
    if not os.path.exists(csv_path):
        raise FileNotFoundError(f"metrics file missing: {csv_path} (run 'eval' first)")
    rows = read_metrics_csv(csv_path)
    paths = write_report(rows, args.out)
    print(f"wrote {len(paths)} curve files to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cv2xsim",
        description="Sidelink channel-estimation link simulator: dataset "
        "generation, denoiser training, and BLER/EVM evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "gen": ("simulate subframes and persist the dataset", _cmd_gen),
        "train": ("train the denoiser on the stored dataset", _cmd_train),
        "eval": ("score estimators and write the metrics CSV", _cmd_eval),
        "report": ("emit plot-ready per-curve data files", _cmd_report),
    }
    for name, (help_text, handler) in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="plain-text key=value config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default="run", help="run directory")
        p.set_defaults(handler=handler)
        if name == "eval":
            p.add_argument(
                "--estimators",
                default="perfect,ls,ann",
                help="comma list from {perfect,ls,ann}",
            )
            p.add_argument("--model", default=None, help="model checkpoint path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
