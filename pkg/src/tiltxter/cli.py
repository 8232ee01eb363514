"""Command-line entry point binding every pipeline operation.

Subcommands: gen-dataset, train, eval, render, serve-remote, serve-local,
bench, episode.  Exit codes: 0 success, 1 domain error (bad inputs,
missing files), 2 usage error.  All randomness in a command flows from
its single ``--seed``.  The TILTXTER_LOG environment variable
(error|info|debug) sets logging verbosity.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

log = logging.getLogger("tiltxter")

_MODES = {"none": 0, "downsize": 1, "pattern": 2}


class CliError(Exception):
    """Domain-level failure: report and exit 1."""


def _mode(name: str):
    from .core import FeedbackMode

    return FeedbackMode(_MODES[name])


def _require_file(path, role: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"{role} file not found: {p}")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiltxter",
        description="Tactile tilt sensing, CNN classification, electro-tactile "
                    "rendering, and the two-node 60 Hz teleoperation loop.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="generate the labeled synthetic dataset")
    p.add_argument("--out", required=True, help="output dataset path (.txds)")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--reps", type=int, default=32, help="records per (class, closure) cell")
    p.add_argument("--noise", type=float, default=None, metavar="SIGMA",
                   help="per-taxel force noise in newtons")

    p = sub.add_parser("train", help="train the tilt classifier")
    p.add_argument("--data", required=True, help="dataset file from gen-dataset")
    p.add_argument("--out", required=True, help="output checkpoint path")
    p.add_argument("--epochs", type=int, default=50,
                   help="training epochs (0 writes the seeded initialization)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--curves", default=None, metavar="CSV",
                   help="write per-epoch learning curves to this CSV")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    p.add_argument("--data", required=True)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--seed", type=int, default=0, help="split seed (match training)")
    p.add_argument("--split", choices=("test", "val", "train", "all"), default="test")
    p.add_argument("--csv", default=None, help="also write the confusion matrix as CSV")

    p = sub.add_parser("render", help="render electrode frames for every record")
    p.add_argument("--in", dest="infile", required=True, help="dataset file")
    p.add_argument("--mode", choices=sorted(_MODES), required=True)
    p.add_argument("--ckpt", default=None, help="checkpoint (required for pattern mode)")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("serve-remote", help="run the remote sensing node")
    p.add_argument("--listen", default="127.0.0.1:7340")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holder-tilt", type=int, default=0, metavar="DEG",
                   help="fixed pipette holder angle")
    p.add_argument("--noise", type=float, default=None)

    p = sub.add_parser("serve-local", help="run the local rendering node")
    p.add_argument("--connect", default="127.0.0.1:7340")
    p.add_argument("--mode", choices=sorted(_MODES), default="downsize")
    p.add_argument("--ckpt", default=None)
    p.add_argument("--mirror", default=None, metavar="ADDR",
                   help="expose the JSON WebSocket mirror on this address")

    p = sub.add_parser("bench", help="measure local tick latency")
    p.add_argument("--ticks", type=int, default=1000)
    p.add_argument("--mode", choices=sorted(_MODES), default="pattern")
    p.add_argument("--ckpt", default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("episode", help="run scripted-agent grasp episodes")
    p.add_argument("--agent", choices=("oracle", "blind", "noisy"), required=True)
    p.add_argument("--trials", type=int, default=64)
    p.add_argument("--mode", choices=(*sorted(_MODES), "all"), required=True)
    p.add_argument("--ckpt", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write per-episode results CSV")
    return parser


def cmd_gen_dataset(args) -> int:
    from .manifest import write_manifest
    from .simulate import default_params, gen_dataset, write_dataset

    params = default_params(seed=args.seed, noise_sigma=args.noise)
    records = gen_dataset(params, reps_per_cell=args.reps)
    write_dataset(records, args.out)
    write_manifest(args.out, "gen-dataset",
                   {"seed": args.seed, "reps": args.reps, "noise": args.noise,
                    "records": len(records)})
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _load_records(path):
    from .simulate import read_dataset

    return read_dataset(_require_file(path, "dataset"))


def cmd_train(args) -> int:
    from .manifest import write_manifest
    from .simulate import split_dataset
    from .tiltnet import TiltNet, TrainConfig, train
    from .tiltnet.checkpoint import save_model

    records = _load_records(args.data)
    model = TiltNet(seed=args.seed)
    config = {"seed": args.seed, "epochs": args.epochs, "batch_size": args.batch_size,
              "lr": args.lr, "records": len(records)}
    if args.epochs == 0:
        save_model(model, args.out)
        write_manifest(args.out, "train", config, {"data": args.data})
        print(f"wrote initialized (untrained) checkpoint to {args.out}")
        return 0
    train_set, val_set, _ = split_dataset(records, seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
                      seed=args.seed)
    model, report = train(model, train_set, val_set, cfg)
    save_model(model, args.out)
    write_manifest(args.out, "train", config, {"data": args.data})
    if args.curves:
        with open(args.curves, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc", "lr"])
            writer.writerows(report.curves_rows())
        write_manifest(args.curves, "train:curves", config, {"data": args.data})
    best = max(report.val_accuracy)
    print(f"trained {args.epochs} epochs on {len(train_set)} records; "
          f"best val accuracy {best:.4f} (epoch {report.best_epoch}); "
          f"checkpoint {args.out}")
    return 0


def _confusion_text(confusion: np.ndarray) -> str:
    from .core import TILT_DEGREES

    head = "true\\pred" + "".join(f"{d:>6}" for d in TILT_DEGREES)
    lines = [head]
    for i, deg in enumerate(TILT_DEGREES):
        lines.append(f"{deg:>9}" + "".join(f"{int(n):>6}" for n in confusion[i]))
    return "\n".join(lines)


def cmd_eval(args) -> int:
    from .manifest import write_manifest
    from .simulate import split_dataset
    from .tiltnet import evaluate
    from .tiltnet.checkpoint import load_model

    records = _load_records(args.data)
    model = load_model(_require_file(args.ckpt, "checkpoint"))
    if args.split != "all":
        train_set, val_set, test_set = split_dataset(records, seed=args.seed)
        records = {"train": train_set, "val": val_set, "test": test_set}[args.split]
    accuracy, confusion = evaluate(model, records)
    print(f"{args.split} accuracy: {accuracy:.4f}  ({len(records)} records)")
    print(_confusion_text(confusion))
    if args.csv:
        np.savetxt(args.csv, confusion, fmt="%d", delimiter=",")
        write_manifest(args.csv, "eval", {"seed": args.seed, "split": args.split},
                       {"data": args.data, "ckpt": args.ckpt})
    return 0


def cmd_render(args) -> int:
    from .core import FeedbackMode
    from .manifest import write_manifest
    from .render import render_feedback
    from .tiltnet.checkpoint import load_model

    mode = _mode(args.mode)
    model = None
    if mode is FeedbackMode.CNN_PATTERN:
        if not args.ckpt:
            raise CliError("pattern mode needs --ckpt")
        model = load_model(_require_file(args.ckpt, "checkpoint"))
    records = _load_records(args.infile)
    inputs = {"data": args.infile}
    if args.ckpt:
        inputs["ckpt"] = args.ckpt
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "finger", *[f"i{k}" for k in range(20)], "predicted"])
        for rec in records:
            left, right, predicted = render_feedback(mode, rec.biframe, model)
            pred = "" if predicted is None else predicted.degrees
            writer.writerow([rec.sample_id, "left", *left.intensities.reshape(-1), pred])
            writer.writerow([rec.sample_id, "right", *right.intensities.reshape(-1), pred])
    write_manifest(args.out, "render", {"mode": args.mode, "records": len(records)}, inputs)
    print(f"rendered {len(records)} records ({args.mode}) to {args.out}")
    return 0


def cmd_serve_remote(args) -> int:
    from .net import RemoteServerConfig, serve_remote

    cfg = RemoteServerConfig(listen=args.listen, seed=args.seed,
                             holder_tilt_deg=args.holder_tilt, noise_sigma=args.noise)
    try:
        serve_remote(cfg)
    except KeyboardInterrupt:
        print("remote node stopped")
    return 0


def cmd_serve_local(args) -> int:
    from .net import LocalServerConfig, serve_local

    if args.ckpt:
        _require_file(args.ckpt, "checkpoint")
    cfg = LocalServerConfig(connect=args.connect, mode=_mode(args.mode),
                            checkpoint=args.ckpt, mirror=args.mirror)
    try:
        node = serve_local(cfg)
    except KeyboardInterrupt:
        return 0
    except ConnectionRefusedError:
        raise CliError(f"cannot connect to remote node at {args.connect}") from None
    summary = node.stats.summary().get("total")
    if summary:
        print(f"local node done: p99 tick {summary['p99']:.3f} ms over "
              f"{len(node.stats.samples['total'])} ticks")
    return 0


def cmd_bench(args) -> int:
    from .nodes import TICK_BUDGET_MS, bench_local_tick
    from .tiltnet.checkpoint import load_model

    model = None
    if args.ckpt:
        model = load_model(_require_file(args.ckpt, "checkpoint"))
    stats = bench_local_tick(ticks=args.ticks, mode=_mode(args.mode), model=model,
                             seed=args.seed)
    print(f"{'stage':<12}{'p50 ms':>10}{'p90 ms':>10}{'p99 ms':>10}{'max ms':>10}")
    for stage, row in stats.summary().items():
        print(f"{stage:<12}{row['p50']:>10.4f}{row['p90']:>10.4f}"
              f"{row['p99']:>10.4f}{row['max']:>10.4f}")
    p99 = stats.percentile("total", 99)
    verdict = "within" if p99 < TICK_BUDGET_MS else "OVER"
    print(f"p99 end-to-end {p99:.4f} ms -- {verdict} the {TICK_BUDGET_MS:.2f} ms budget")
    return 0


def cmd_episode(args) -> int:
    from .core import FeedbackMode
    from .episode import run_trials, success_rate
    from .manifest import write_manifest
    from .tiltnet.checkpoint import load_model

    modes = [m for m in sorted(_MODES)] if args.mode == "all" else [args.mode]
    model = None
    if args.ckpt:
        model = load_model(_require_file(args.ckpt, "checkpoint"))
    if any(_mode(m) is FeedbackMode.CNN_PATTERN for m in modes) and model is None:
        raise CliError("pattern mode needs --ckpt")
    rows = []
    print(f"{'mode':<10}{'agent':<8}{'trials':>7}{'successes':>10}{'rate':>8}")
    for name in modes:
        results = run_trials(args.agent, _mode(name), args.trials, model=model,
                             seed=args.seed)
        rate = success_rate(results)
        wins = sum(r.success for r in results)
        print(f"{name:<10}{args.agent:<8}{args.trials:>7}{wins:>10}{rate:>8.3f}")
        for i, res in enumerate(results):
            rows.append([name, args.agent, i, int(res.success), res.ticks_used,
                         f"{res.final_relative_deg:.2f}"])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mode", "agent", "trial", "success", "ticks", "final_rel_deg"])
            writer.writerows(rows)
        inputs = {"ckpt": args.ckpt} if args.ckpt else {}
        write_manifest(args.out, "episode",
                       {"agent": args.agent, "trials": args.trials, "mode": args.mode,
                        "seed": args.seed}, inputs)
    return 0


_HANDLERS = {
    "gen-dataset": cmd_gen_dataset,
    "train": cmd_train,
    "eval": cmd_eval,
    "render": cmd_render,
    "serve-remote": cmd_serve_remote,
    "serve-local": cmd_serve_local,
    "bench": cmd_bench,
    "episode": cmd_episode,
}


def main(argv=None) -> int:
    level = os.environ.get("TILTXTER_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # domain failures from the modules
        from .simulate import DatasetFormatError
        from .tiltnet.checkpoint import CheckpointError
        from .wire import ProtocolError

        if isinstance(exc, (DatasetFormatError, CheckpointError, ProtocolError,
                            FileNotFoundError, ValueError, OSError)):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
