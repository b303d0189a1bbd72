"""Regression fine-tuning: two added FC-256 heads, MSE loss, freeze levels.

The classifier's softmax head is replaced by two fully connected layers of
width 256 and a linear output matching the regression target's dimension.
A freeze level chooses which trailing parameter-bearing layers receive
gradients: the whole network, the last 12, or the last 8; everything
earlier stays bit-identical through training.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .model import ConfigurationError, IzeNet, NetworkConfig, build_izenet, init_glorot_normal

FREEZE_LEVELS = {"full": None, "last-12": 12, "last-8": 8}


@dataclass(frozen=True)
class FinetuneConfig:
    freeze: str = "full"  # one of FREEZE_LEVELS
    lr: float = 0.0001
    epochs: int = 10
    target_dim: int = 2
    batch_size: int = 10
    seed: int = 0


class GazeRegressor(nn.Module):
    """Base network through FC-512, then FC-256 -> FC-256 -> linear output."""

    def __init__(self, base: IzeNet, target_dim: int):
        super().__init__()
        if target_dim < 1:
            raise ConfigurationError(f"target_dim must be >= 1, got {target_dim}")
        self.base = base
        width = base.config.fc_dims[1]
        self.head_fc1 = nn.Linear(width, 256)
        self.head_fc2 = nn.Linear(256, 256)
        self.out = nn.Linear(256, target_dim)
        self.relu = nn.ReLU()
        init_glorot_normal(self.head_fc1)
        init_glorot_normal(self.head_fc2)
        init_glorot_normal(self.out)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _, f2 = self.base.fc_features(x)
        h = self.relu(self.head_fc1(f2))
        h = self.relu(self.head_fc2(h))
        return self.out(h)


def parameter_modules(model: GazeRegressor) -> list[tuple[str, nn.Module]]:
    """Parameter-bearing layers in forward order (the freeze unit)."""
    ordered: list[tuple[str, nn.Module]] = []
    for i, block in enumerate(model.base.blocks, start=1):
        ordered.append((f"conv{i}", block["conv"]))
        ordered.append((f"bn{i}", block["bn"]))
    ordered.append(("caps_conv", model.base.caps_conv))
    ordered.append(("fc1", model.base.fc1))
    ordered.append(("fc2", model.base.fc2))
    ordered.append(("head_fc1", model.head_fc1))
    ordered.append(("head_fc2", model.head_fc2))
    ordered.append(("out", model.out))
    return ordered


def apply_freeze(model: GazeRegressor, freeze: str) -> list[str]:
    """Mark only the chosen trailing layers trainable; returns their names."""
    if freeze not in FREEZE_LEVELS:
        raise ConfigurationError(
            f"unknown freeze level {freeze!r}; choose from {sorted(FREEZE_LEVELS)}")
    modules = parameter_modules(model)
    trailing = FREEZE_LEVELS[freeze]
    if trailing is not None and trailing > len(modules):
        raise ConfigurationError(
            f"freeze level {freeze!r} asks for {trailing} layers but the "
            f"network has {len(modules)}")
    cut = 0 if trailing is None else len(modules) - trailing
    trainable: list[str] = []
    for i, (name, module) in enumerate(modules):
        requires = i >= cut
        for p in module.parameters():
            p.requires_grad_(requires)
        if requires:
            trainable.append(name)
    return trainable


def finetune_regression(base_weights: str | Path | dict, images: torch.Tensor,
                        targets: torch.Tensor,
                        config: FinetuneConfig = FinetuneConfig(),
                        network: NetworkConfig | None = None,
                        ) -> tuple[GazeRegressor, list[dict]]:
    """Attach regression heads to trained base weights and fine-tune with MSE.

    ``base_weights`` is a checkpoint path or a raw state dict; weights load
    before the heads attach.  Returns the model and per-epoch history.
    """
    if isinstance(base_weights, (str, Path)):
        doc = torch.load(Path(base_weights), map_location="cpu", weights_only=False)
        state = doc["state_dict"] if "state_dict" in doc else doc
        if network is None and "config" in doc:
            network = NetworkConfig(**{k: tuple(v) if isinstance(v, list) else v
                                       for k, v in doc["config"].items()})
    else:
        state = base_weights
    base = build_izenet(network, seed=config.seed)
    base.load_state_dict(state)
    model = GazeRegressor(base, config.target_dim)
    apply_freeze(model, config.freeze)

    if targets.ndim != 2 or targets.shape[1] != config.target_dim:
        raise ConfigurationError(
            f"targets must be (N, {config.target_dim}), got {tuple(targets.shape)}")
    images = images.to(dtype=next(model.parameters()).dtype)
    targets = targets.to(dtype=images.dtype)
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.SGD(params, lr=config.lr)
    generator = torch.Generator().manual_seed(config.seed)
    n = len(images)
    batch = config.batch_size if config.batch_size > 0 else n
    loss_fn = nn.MSELoss()

    history: list[dict] = []
    for epoch in range(config.epochs):
        model.train()
        order = torch.randperm(n, generator=generator)
        epoch_loss = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            optimizer.zero_grad()
            loss = loss_fn(model(images[idx]), targets[idx])
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
        model.eval()
        with torch.no_grad():
            mse = float(loss_fn(model(images), targets))
        history.append({"epoch": epoch, "train_mse": epoch_loss / n, "mse": mse})
    return model, history
