"""Conv+capsule gaze-region classifier.

Five convolution blocks (3x3 conv, batch norm, ReLU, 2x2 max pool) take a
128x128x3 face image down to a 4x4 map; a convolutional primary-capsule
stage regroups the channels into capsule vectors passed through the squash
nonlinearity; the flattened capsules feed fully connected layers of width
1024 and 512 and a 3-way softmax over Center / Left / Right.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

CLASS_ORDER = ("Center", "Left", "Right")
CLASS_TO_INDEX = {name: i for i, name in enumerate(CLASS_ORDER)}


class ConfigurationError(ValueError):
    """Raised when a network or fine-tune configuration is inconsistent."""


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture knobs; defaults follow the recorded design."""

    input_size: int = 128
    in_channels: int = 3
    conv_channels: tuple[int, ...] = (32, 64, 64, 128, 128)
    conv_kernel: int = 3
    capsule_count: int = 8
    capsule_dim: int = 16
    fc_dims: tuple[int, int] = (1024, 512)
    classes: int = 3

    def __post_init__(self):
        if len(self.conv_channels) != 5:
            raise ConfigurationError("exactly five convolution blocks are required")
        if self.input_size % 32 != 0 or self.input_size < 32:
            raise ConfigurationError("input size must survive five 2x2 poolings")
        if self.capsule_count < 1 or self.capsule_dim < 1:
            raise ConfigurationError("capsule stage needs positive count and dim")

    @property
    def final_map_size(self) -> int:
        return self.input_size // 32

    @property
    def capsule_positions(self) -> int:
        return self.final_map_size * self.final_map_size

    @property
    def flattened_capsules(self) -> int:
        return self.capsule_positions * self.capsule_count * self.capsule_dim


def squash(v: torch.Tensor, dim: int = -1) -> torch.Tensor:
    """Norm-limiting capsule nonlinearity.

    Keeps the direction of ``v`` and maps its norm to ``n^2 / (1 + n^2)``,
    strictly below 1; the zero vector maps to itself.
    """
    sq = (v * v).sum(dim=dim, keepdim=True)
    return v * (sq / (1.0 + sq) / torch.sqrt(sq + 1e-12))


class IzeNet(nn.Module):
    """The classifier; ``forward`` returns softmax probabilities."""

    def __init__(self, config: NetworkConfig | None = None):
        super().__init__()
        self.config = config or NetworkConfig()
        cfg = self.config
        blocks = []
        in_ch = cfg.in_channels
        pad = cfg.conv_kernel // 2
        for out_ch in cfg.conv_channels:
            blocks.append(nn.ModuleDict({
                "conv": nn.Conv2d(in_ch, out_ch, cfg.conv_kernel, stride=1, padding=pad),
                "bn": nn.BatchNorm2d(out_ch),
            }))
            in_ch = out_ch
        self.blocks = nn.ModuleList(blocks)
        self.pool = nn.MaxPool2d(2)
        self.relu = nn.ReLU()
        self.caps_conv = nn.Conv2d(in_ch, cfg.capsule_count * cfg.capsule_dim,
                                   cfg.conv_kernel, stride=1, padding=pad)
        self.fc1 = nn.Linear(cfg.flattened_capsules, cfg.fc_dims[0])
        self.fc2 = nn.Linear(cfg.fc_dims[0], cfg.fc_dims[1])
        self.head = nn.Linear(cfg.fc_dims[1], cfg.classes)
        init_glorot_normal(self)

    def _check_input(self, x: torch.Tensor) -> None:
        cfg = self.config
        if x.ndim != 4 or x.shape[1:] != (cfg.in_channels, cfg.input_size, cfg.input_size):
            raise ConfigurationError(
                f"expected input of shape (B, {cfg.in_channels}, {cfg.input_size}, "
                f"{cfg.input_size}), got {tuple(x.shape)}")

    def conv_stack(self, x: torch.Tensor) -> torch.Tensor:
        self._check_input(x)
        for block in self.blocks:
            x = self.pool(self.relu(block["bn"](block["conv"](x))))
        return x

    def capsules(self, x: torch.Tensor) -> torch.Tensor:
        """Squashed capsule vectors, shape (B, positions*count, dim)."""
        cfg = self.config
        maps = self.caps_conv(self.conv_stack(x))
        b = maps.shape[0]
        caps = maps.permute(0, 2, 3, 1).reshape(
            b, cfg.capsule_positions * cfg.capsule_count, cfg.capsule_dim)
        return squash(caps, dim=-1)

    def fc_features(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        flat = self.capsules(x).flatten(1)
        f1 = self.relu(self.fc1(flat))
        f2 = self.relu(self.fc2(f1))
        return f1, f2

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _, f2 = self.fc_features(x)
        return torch.softmax(self.head(f2), dim=1)


def init_glorot_normal(model: nn.Module) -> None:
    """Glorot-normal weights, zero biases; batch norms at identity."""
    for module in model.modules():
        if isinstance(module, (nn.Conv2d, nn.Linear)):
            nn.init.xavier_normal_(module.weight)
            if module.bias is not None:
                nn.init.zeros_(module.bias)
        elif isinstance(module, nn.BatchNorm2d):
            nn.init.ones_(module.weight)
            nn.init.zeros_(module.bias)


def build_izenet(config: NetworkConfig | None = None, *,
                 dtype: torch.dtype = torch.float32,
                 seed: int | None = None) -> IzeNet:
    """Construct and glorot-initialize the network.

    A seed makes the initialization reproducible; dtype float64 is used by
    the finite-difference gradient checks.
    """
    if seed is not None:
        torch.manual_seed(seed)
    model = IzeNet(config)
    return model.to(dtype)


def categorical_cross_entropy(probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean negative log-likelihood of softmax probabilities."""
    picked = probs.gather(1, targets.view(-1, 1)).clamp_min(1e-12)
    return -torch.log(picked).mean()
