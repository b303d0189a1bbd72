"""Small CLI: train on a labels file, fine-tune for regression, dump features.

A JSON config file can mirror any field of the train/fine-tune
configurations; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import torch

from .data import DatasetError, load_dataset
from .features import extract_features, feature_layers
from .finetune import FinetuneConfig, finetune_regression
from .model import ConfigurationError, build_izenet
from .train import TrainConfig, TrainingError, load_checkpoint, train


def _config_value(args, key, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if key in doc:
            return doc[key]
    return default


def _network_config(args):
    """Optional ``network`` section of the config file -> NetworkConfig."""
    from .model import NetworkConfig

    if args.config:
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if "network" in doc:
            fields = {k: tuple(v) if isinstance(v, list) else v
                      for k, v in doc["network"].items()}
            return NetworkConfig(**fields)
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="izenet",
                                     description="Toy-scale gaze-region classifier.")
    sub = parser.add_subparsers(dest="verb", required=True)

    tr = sub.add_parser("train", help="train the classifier on a labels file")
    tr.add_argument("labels", help="labels.csv from the labeling CLI")
    tr.add_argument("frames_root", help="corpus root with <subject>/<frame>.png")
    tr.add_argument("--out", required=True)
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batch-size", dest="batch_size", type=int)
    tr.add_argument("--lr", type=float)
    tr.add_argument("--decay", type=float)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--config")

    ft = sub.add_parser("finetune", help="fine-tune a checkpoint for regression")
    ft.add_argument("checkpoint")
    ft.add_argument("targets", help="CSV: subject_id,frame_id,tx,ty per line")
    ft.add_argument("labels")
    ft.add_argument("frames_root")
    ft.add_argument("--out", required=True)
    ft.add_argument("--freeze", choices=("full", "last-12", "last-8"))
    ft.add_argument("--epochs", type=int)
    ft.add_argument("--lr", type=float)
    ft.add_argument("--seed", type=int)
    ft.add_argument("--config")

    fe = sub.add_parser("features", help="export one layer's features as .npy")
    fe.add_argument("checkpoint")
    fe.add_argument("labels")
    fe.add_argument("frames_root")
    fe.add_argument("--layer", type=int, required=True)
    fe.add_argument("--out", required=True)
    fe.add_argument("--config")
    return parser


def _cmd_train(args) -> int:
    images, labels, _ = load_dataset(args.labels, args.frames_root)
    config = TrainConfig(
        lr=float(_config_value(args, "lr", 0.001)),
        decay=float(_config_value(args, "decay", 1e-6)),
        epochs=int(_config_value(args, "epochs", 200)),
        batch_size=int(_config_value(args, "batch_size", 10)),
        seed=int(_config_value(args, "seed", 0)),
    )
    network = _network_config(args)
    size = network.input_size if network else 128
    if size != 128:
        images, labels, _ = load_dataset(args.labels, args.frames_root, image_size=size)
    model = build_izenet(network, seed=config.seed)
    history = train(model, images, labels, config, out_dir=args.out)
    last = history[-1]
    print(f"epochs {len(history)}, final loss {last['loss']:.4f}, "
          f"train accuracy {100 * last['accuracy']:.1f}% -> {args.out}")
    return 0


def _read_targets(path: str, frames) -> torch.Tensor:
    by_key = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        parts = line.split(",")
        if len(parts) < 4:
            raise DatasetError(f"target line needs subject,frame,tx,ty: {line!r}")
        by_key[(parts[0], parts[1])] = [float(v) for v in parts[2:]]
    rows = []
    for f in frames:
        key = (f.subject_id, f.frame_id)
        if key not in by_key:
            raise DatasetError(f"no regression target for {key}")
        rows.append(by_key[key])
    return torch.tensor(rows, dtype=torch.float32)


def _cmd_finetune(args) -> int:
    images, _, frames = load_dataset(args.labels, args.frames_root)
    targets = _read_targets(args.targets, frames)
    config = FinetuneConfig(
        freeze=str(_config_value(args, "freeze", "full")),
        lr=float(_config_value(args, "lr", 0.0001)),
        epochs=int(_config_value(args, "epochs", 10)),
        target_dim=targets.shape[1],
        seed=int(_config_value(args, "seed", 0)),
    )
    model, history = finetune_regression(args.checkpoint, images, targets, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    torch.save({"state_dict": model.state_dict()}, out / "regressor.pt")
    lines = ["epoch,train_mse,mse"]
    lines += [f"{h['epoch']},{h['train_mse']!r},{h['mse']!r}" for h in history]
    (out / "finetune_metrics.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"fine-tuned ({config.freeze}); final mse {history[-1]['mse']:.5f} -> {out}")
    return 0


def _cmd_features(args) -> int:
    images, _, _ = load_dataset(args.labels, args.frames_root)
    model = load_checkpoint(args.checkpoint)
    matrix = extract_features(model, images, args.layer)
    np.save(args.out, matrix)
    names = dict(feature_layers(model))
    print(f"layer {args.layer} ({names[args.layer]}): {matrix.shape} -> {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    commands = {"train": _cmd_train, "finetune": _cmd_finetune, "features": _cmd_features}
    try:
        return commands[args.verb](args)
    except (DatasetError, TrainingError, ConfigurationError, LookupError,
            OSError, ValueError) as exc:
        print(f"izenet {args.verb}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
