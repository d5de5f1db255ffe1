"""Compact convolutional classifier over the 5-channel relation input."""

from __future__ import annotations

import torch
from torch import nn

from . import INPUT_SIZE, LABELS


class RelationNet(nn.Module):
    """Conv-pool blocks (stride-2 stem keeps CPU training fast), then a
    flatten and a 5-way dense head."""

    def __init__(self):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(5, 24, 3, stride=2, padding=1),
            nn.BatchNorm2d(24),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2),
            nn.Conv2d(24, 48, 3, padding=1),
            nn.BatchNorm2d(48),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2),
            nn.Conv2d(48, 64, 3, padding=1),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2),
            nn.Conv2d(64, 64, 3, padding=1),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2),
        )
        side = INPUT_SIZE // 32
        self.classifier = nn.Sequential(
            nn.Flatten(),
            nn.Linear(64 * side * side, len(LABELS)),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.features(x))


def save_model(model: RelationNet, path, metadata: dict | None = None):
    torch.save(
        {"state_dict": model.state_dict(), "labels": list(LABELS), "meta": metadata or {}},
        path,
    )


def load_model(path) -> RelationNet:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("labels") != list(LABELS):
        raise ValueError(f"model at {path} was trained with different labels")
    model = RelationNet()
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
