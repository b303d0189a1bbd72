"""Feature extraction from named layers, addressed by ordinal.

Ordinals number the network's feature points in forward order; the listing
for the plain classifier is conv blocks 1-5, the squashed capsules, then
the two FC layers, with the regression heads appended when present.  (In
the upstream full-scale graph the features fed to external regressors were
the deep FC layers counted as ordinals 31 and 34; here those correspond to
the added 256-wide head layers ``head_fc1``/``head_fc2``.)
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .finetune import GazeRegressor
from .model import IzeNet


def feature_layers(model: nn.Module) -> list[tuple[int, str]]:
    """(ordinal, name) pairs of extractable feature points."""
    names = [f"block{i}" for i in range(1, 6)] + ["capsules", "fc1", "fc2"]
    if isinstance(model, GazeRegressor):
        names += ["head_fc1", "head_fc2"]
    return [(i + 1, name) for i, name in enumerate(names)]


def _compute(model: nn.Module, name: str, x: torch.Tensor) -> torch.Tensor:
    base: IzeNet = model.base if isinstance(model, GazeRegressor) else model
    if name.startswith("block"):
        want = int(name[5:])
        for i, block in enumerate(base.blocks, start=1):
            x = base.pool(base.relu(block["bn"](block["conv"](x))))
            if i == want:
                return x
    if name == "capsules":
        return base.capsules(x)
    if name in ("fc1", "fc2"):
        f1, f2 = base.fc_features(x)
        return f1 if name == "fc1" else f2
    f1, f2 = base.fc_features(x)
    h1 = model.relu(model.head_fc1(f2))
    if name == "head_fc1":
        return h1
    return model.relu(model.head_fc2(h1))


def extract_features(model: nn.Module, images: torch.Tensor, layer: int) -> np.ndarray:
    """Per-image feature vectors from the layer with the given ordinal.

    Deterministic for fixed weights (eval mode, no dropout in the graph).
    Unknown ordinals raise ``LookupError`` listing the valid ones.
    """
    layers = dict(feature_layers(model))
    if layer not in layers:
        valid = ", ".join(f"{o} ({n})" for o, n in feature_layers(model))
        raise LookupError(f"no feature layer with ordinal {layer}; valid: {valid}")
    model.eval()
    with torch.no_grad():
        images = images.to(dtype=next(model.parameters()).dtype)
        out = _compute(model, layers[layer], images)
    return out.reshape(out.shape[0], -1).cpu().numpy()
