"""Backbone construction and checkpoint loading.

Expression models are EfficientNet trunks (b0 -> 1280-d, b2 -> 1408-d)
with an 8-class expression head; a forward pass returns both the pooled
embedding and the softmax over expression classes. The face-recognition
model used for mated comparisons is any trunk whose forward pass returns
an embedding vector; a ResNet-18 with its classifier removed fits.
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn
from torchvision import models

N_EXPRESSION_CLASSES = 8

EMBEDDING_DIMS = {"b0": 1280, "b2": 1408}

# resize/crop follow the published ImageNet recipe for each trunk
PREPROCESSING = {
    "b0": {"resize": 256, "crop": 224},
    "b2": {"resize": 288, "crop": 288},
    "fr": {"resize": 256, "crop": 224},
}
NORMALIZE_MEAN = (0.485, 0.456, 0.406)
NORMALIZE_STD = (0.229, 0.224, 0.225)


class CheckpointError(Exception):
    pass


class ExpressionModel(nn.Module):
    """EfficientNet trunk plus linear expression head."""

    def __init__(self, variant: str):
        super().__init__()
        if variant not in EMBEDDING_DIMS:
            raise CheckpointError(f"unknown expression model variant {variant!r}")
        builder = models.efficientnet_b0 if variant == "b0" else models.efficientnet_b2
        trunk = builder(weights=None)
        self.variant = variant
        self.embedding_dim = EMBEDDING_DIMS[variant]
        self.features = trunk.features
        self.avgpool = trunk.avgpool
        self.head = nn.Linear(self.embedding_dim, N_EXPRESSION_CLASSES)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        emb = torch.flatten(self.avgpool(self.features(x)), 1)
        probs = torch.softmax(self.head(emb), dim=1)
        return emb, probs


class FrModel(nn.Module):
    """ResNet-18 trunk emitting 512-d identity embeddings."""

    def __init__(self):
        super().__init__()
        trunk = models.resnet18(weights=None)
        trunk.fc = nn.Identity()
        self.trunk = trunk

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.trunk(x)


def _load_state(module: nn.Module, checkpoint: str | Path, device: torch.device) -> None:
    try:
        state = torch.load(checkpoint, map_location=device, weights_only=True)
    except (OSError, RuntimeError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint {checkpoint}: {exc}") from exc
    try:
        module.load_state_dict(state)
    except RuntimeError as exc:
        raise CheckpointError(f"checkpoint {checkpoint} does not match the model: {exc}") from exc


def load_expression_model(checkpoint: str | Path, variant: str, device: torch.device) -> ExpressionModel:
    model = ExpressionModel(variant)
    _load_state(model, checkpoint, device)
    return model.to(device).eval()


def load_fr_model(checkpoint: str | Path, device: torch.device) -> FrModel:
    model = FrModel()
    _load_state(model, checkpoint, device)
    return model.to(device).eval()


def resolve_device(name: str) -> torch.device:
    if name == "cpu":
        return torch.device("cpu")
    if name == "accelerator":
        if torch.cuda.is_available():
            return torch.device("cuda")
        raise CheckpointError("accelerator requested but none is available")
    raise CheckpointError(f"unknown device {name!r}")
