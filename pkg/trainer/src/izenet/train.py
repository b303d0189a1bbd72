"""Classifier training: plain SGD with per-epoch learning-rate decay.

The recipe is fixed: glorot-normal initialization, stochastic gradient
descent at learning rate 0.001 decayed as ``lr / (1 + decay * epoch)`` with
decay 1e-6 per epoch, categorical cross-entropy on the softmax outputs.
Metrics stream to a line-oriented CSV (epoch, lr, loss, accuracy) and the
final weights are checkpointed with their configuration.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch

from .model import CLASS_ORDER, IzeNet, categorical_cross_entropy


class TrainingError(ValueError):
    """Raised for unusable training datasets."""


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    decay: float = 1e-6  # per-epoch learning-rate decay
    epochs: int = 200
    batch_size: int = 10
    seed: int = 0
    stop_at_full_accuracy: bool = True

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.decay < 0:
            raise ValueError(f"decay must be >= 0, got {self.decay}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


def _check_dataset(images: torch.Tensor, labels: torch.Tensor, classes: int) -> None:
    if len(images) == 0:
        raise TrainingError("empty training dataset")
    if len(images) != len(labels):
        raise TrainingError(f"{len(images)} images vs {len(labels)} labels")
    present = set(labels.tolist())
    missing = [CLASS_ORDER[c] for c in range(classes) if c not in present]
    if missing:
        raise TrainingError(f"classes missing entirely from the dataset: {missing}")


def epoch_lr(base_lr: float, decay: float, epoch: int) -> float:
    return base_lr / (1.0 + decay * epoch)


def train(model: IzeNet, images: torch.Tensor, labels: torch.Tensor,
          config: TrainConfig = TrainConfig(),
          out_dir: str | Path | None = None) -> list[dict]:
    """Train in place; returns per-epoch history dicts.

    With ``stop_at_full_accuracy`` the loop ends early once the model
    classifies every training image correctly (the budget still caps at
    ``config.epochs``).
    """
    _check_dataset(images, labels, model.config.classes)
    images = images.to(dtype=next(model.parameters()).dtype)
    optimizer = torch.optim.SGD(model.parameters(), lr=config.lr)
    generator = torch.Generator().manual_seed(config.seed)
    n = len(images)
    batch = config.batch_size if config.batch_size > 0 else n

    history: list[dict] = []
    for epoch in range(config.epochs):
        lr = epoch_lr(config.lr, config.decay, epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr
        model.train()
        order = torch.randperm(n, generator=generator)
        epoch_loss = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            optimizer.zero_grad()
            probs = model(images[idx])
            loss = categorical_cross_entropy(probs, labels[idx])
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
        model.eval()
        with torch.no_grad():
            predictions = model(images).argmax(dim=1)
            accuracy = float((predictions == labels).float().mean())
        history.append({"epoch": epoch, "lr": lr,
                        "loss": epoch_loss / n, "accuracy": accuracy})
        if config.stop_at_full_accuracy and accuracy == 1.0:
            break
    if out_dir is not None:
        save_run(model, history, out_dir)
    return history


def save_run(model: IzeNet, history: list[dict], out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save({"state_dict": model.state_dict(),
                "config": asdict(model.config)}, out / "checkpoint.pt")
    lines = ["epoch,lr,loss,accuracy"]
    for row in history:
        lines.append(f"{row['epoch']},{row['lr']!r},{row['loss']!r},{row['accuracy']!r}")
    (out / "metrics.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_checkpoint(path: str | Path) -> IzeNet:
    from .model import NetworkConfig, build_izenet

    doc = torch.load(Path(path), map_location="cpu", weights_only=False)
    config = NetworkConfig(**{k: tuple(v) if isinstance(v, list) else v
                              for k, v in doc["config"].items()})
    model = build_izenet(config)
    model.load_state_dict(doc["state_dict"])
    return model
