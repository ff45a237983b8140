"""Classifier CLI.

    seldcrnn train --labels labels.csv --model out.pt [--epochs N] [--seed S]
    seldcrnn classify EVENTS_DIR --model out.pt

``labels.csv`` has header ``wav,class``; paths are resolved relative to the
CSV.  ``classify`` scores every ``event_<id>.wav`` in a directory and writes
``predictions.csv`` (header ``event_id,class,prob``) next to them, matching
the contract of the front-end's ``--classifier-cmd`` hook.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from .features import extract_patches_from_wav
from .model import load_checkpoint, parameter_count, save_checkpoint
from .predict import predict_event
from .training import TrainConfig, train


def read_labels_csv(path):
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "wav,class":
            raise ValueError(f"{path}: expected header 'wav,class', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            wav, cls = line.rsplit(",", 1)
            rows.append(((path.parent / wav).resolve(), int(cls)))
    if not rows:
        raise ValueError(f"{path}: no labeled clips")
    return rows


def cmd_train(args):
    rows = read_labels_csv(args.labels)
    patches, labels = [], []
    for wav, cls in rows:
        for patch in extract_patches_from_wav(wav):
            patches.append(patch)
            labels.append(cls)
    config = TrainConfig(epochs=args.epochs, seed=args.seed,
                         batch_size=args.batch_size,
                         lr_patience=args.patience,
                         early_stop_patience=3 * args.patience,
                         use_mixup=not args.no_mixup)
    model, log = train(np.stack(patches), labels, config,
                       val_fraction=args.val_fraction)
    save_checkpoint(model, args.model)
    summary = {"clips": len(rows), "patches": len(patches),
               "parameters": parameter_count(model),
               "epochs_run": len(log.epochs),
               "best_val_acc": log.best_val_acc}
    log_path = Path(args.model).with_suffix(".train_log.json")
    with open(log_path, "w", encoding="utf-8") as fh:
        json.dump({"summary": summary, "epochs": log.epochs}, fh, indent=2)
    print(f"trained on {len(patches)} patches from {len(rows)} clips; "
          f"best val acc {log.best_val_acc:.3f}; saved {args.model}")
    return 0


def cmd_classify(args):
    model, _ = load_checkpoint(args.model)
    events_dir = Path(args.events_dir)
    wavs = sorted(events_dir.glob("event_*.wav"),
                  key=lambda p: int(re.search(r"(\d+)", p.stem).group(1)))
    lines = ["event_id,class,prob"]
    for wav in wavs:
        event_id = int(re.search(r"(\d+)", wav.stem).group(1))
        patches = extract_patches_from_wav(wav)
        class_id, probs = predict_event(model, np.stack(patches))
        lines.append(f"{event_id},{class_id},{probs[class_id]:.6f}")
    out = events_dir / "predictions.csv"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"classified {len(wavs)} event(s) -> {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="seldcrnn", description="CRNN event classifier back-end")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tr = sub.add_parser("train", help="train on labeled event WAVs")
    p_tr.add_argument("--labels", required=True, help="CSV with header wav,class")
    p_tr.add_argument("--model", required=True, help="output checkpoint path")
    p_tr.add_argument("--epochs", type=int, default=120)
    p_tr.add_argument("--seed", type=int, default=0)
    p_tr.add_argument("--batch-size", type=int, default=100)
    p_tr.add_argument("--patience", type=int, default=5,
                      help="epochs of validation plateau before halving the "
                           "learning rate; early stop waits 3x this")
    p_tr.add_argument("--val-fraction", type=float, default=0.2,
                      help="validation split; 0 validates on the training set")
    p_tr.add_argument("--no-mixup", action="store_true")
    p_tr.set_defaults(func=cmd_train)

    p_cl = sub.add_parser("classify", help="classify event WAVs in a directory")
    p_cl.add_argument("events_dir", help="directory holding event_<id>.wav files")
    p_cl.add_argument("--model", required=True, help="checkpoint path")
    p_cl.set_defaults(func=cmd_classify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"seldcrnn {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
