"""Training loop: Adadelta, cross-entropy, batch size 32.

The split is 80/20 stratified by label. Mask-swap augmentation (exchange
the two mask channels, relabel A<->B) is applied with probability 0.5 so
the model stays close to swap-equivariant. Runs are deterministic for a
fixed seed: single-threaded torch, seeded shuffles, no wall-clock input.
"""

from __future__ import annotations

import json
import sys

import numpy as np
import torch
from torch import nn

from . import LABELS
from .data import load_crop, read_manifest, swap_pair
from .model import RelationNet, save_model

BATCH_SIZE = 32


def _stratified_split(labels: np.ndarray, val_frac: float, rng: np.random.Generator):
    train_idx, val_idx = [], []
    for cls in range(len(LABELS)):
        members = np.flatnonzero(labels == cls)
        rng.shuffle(members)
        n_val = max(1, int(round(len(members) * val_frac))) if len(members) else 0
        val_idx.extend(members[:n_val])
        train_idx.extend(members[n_val:])
    return np.sort(np.array(train_idx, dtype=int)), np.sort(np.array(val_idx, dtype=int))


def train(
    crops_dir,
    out_path,
    epochs: int,
    seed: int,
    val_frac: float = 0.2,
    batch_size: int = BATCH_SIZE,
    log=sys.stderr,
) -> dict:
    """Train and save a model; returns (and writes) the validation metrics."""
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)
    rng = np.random.default_rng(seed)

    records = read_manifest(crops_dir)
    present = {LABELS[r.label] for r in records}
    missing = [name for name in LABELS if name not in present]
    if missing:
        print(f"warning: no training examples for {missing}", file=log)

    tensors, labels = [], []
    skipped = 0
    for record in records:
        tensor = load_crop(record)
        if tensor is None:
            skipped += 1
            continue
        tensors.append(tensor)
        labels.append(record.label)
    if skipped:
        print(f"warning: skipped {skipped} unreadable crops", file=log)
    if not tensors:
        raise ValueError(f"no readable crops under {crops_dir}")

    x = np.stack(tensors)
    y = np.array(labels, dtype=np.int64)
    train_idx, val_idx = _stratified_split(y, val_frac, rng)

    counts = np.bincount(y[train_idx], minlength=len(LABELS)).astype(np.float64)
    weights = counts.sum() / np.maximum(counts, 1.0)
    weights /= weights.mean()

    model = RelationNet()
    optimizer = torch.optim.Adadelta(model.parameters())
    loss_fn = nn.CrossEntropyLoss(weight=torch.tensor(weights, dtype=torch.float32))

    x_val = torch.from_numpy(x[val_idx])
    y_val = torch.from_numpy(y[val_idx])

    # Each crop is trained in both pair orientations (masks swapped and the
    # label relabeled), so the model stays near swap-equivariant and every
    # class pair contributes to both direction classes.
    aug = np.concatenate([train_idx, train_idx + len(x)])
    for epoch in range(epochs):
        model.train()
        order = aug.copy()
        rng.shuffle(order)
        total_loss = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            xb = np.empty((len(batch),) + x.shape[1:], dtype=x.dtype)
            yb = np.empty(len(batch), dtype=y.dtype)
            for i, idx in enumerate(batch):
                if idx < len(x):
                    xb[i], yb[i] = x[idx], y[idx]
                else:
                    xb[i], yb[i] = swap_pair(x[idx - len(x)], int(y[idx - len(x)]))
            optimizer.zero_grad()
            logits = model(torch.from_numpy(xb))
            loss = loss_fn(logits, torch.from_numpy(yb))
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach()) * len(batch)
        val_acc = _accuracy(model, x_val, y_val)
        print(
            f"epoch {epoch + 1}/{epochs} loss {total_loss / len(order):.4f} "
            f"val_acc {val_acc:.4f}",
            file=log,
        )

    metrics = evaluate(model, x_val, y_val)
    metrics["n_train"] = int(len(train_idx))
    metrics["n_val"] = int(len(val_idx))
    metrics["epochs"] = epochs
    metrics["seed"] = seed
    metrics["skipped_crops"] = skipped
    save_model(model, out_path, metadata={"epochs": epochs, "seed": seed})
    return metrics


@torch.no_grad()
def _accuracy(model: RelationNet, x: torch.Tensor, y: torch.Tensor) -> float:
    model.eval()
    predicted = _predict(model, x)
    return float((predicted == y).double().mean()) if len(y) else 0.0


@torch.no_grad()
def _predict(model: RelationNet, x: torch.Tensor) -> torch.Tensor:
    outputs = []
    for start in range(0, len(x), 256):
        outputs.append(model(x[start : start + 256]).argmax(dim=1))
    return torch.cat(outputs) if outputs else torch.empty(0, dtype=torch.long)


@torch.no_grad()
def evaluate(model: RelationNet, x: torch.Tensor, y: torch.Tensor) -> dict:
    """Validation accuracy, per-class recall, and the 5x5 confusion matrix."""
    model.eval()
    predicted = _predict(model, x)
    confusion = np.zeros((len(LABELS), len(LABELS)), dtype=int)
    for t, p in zip(y.tolist(), predicted.tolist()):
        confusion[t, p] += 1
    recalls = {}
    for cls, name in enumerate(LABELS):
        total = int(confusion[cls].sum())
        recalls[name] = (int(confusion[cls, cls]) / total) if total else None
    defined = [r for r in recalls.values() if r is not None]
    return {
        "val_accuracy": float((predicted == y).double().mean()) if len(y) else 0.0,
        "balanced_accuracy": (sum(defined) / len(defined)) if defined else 0.0,
        "per_class_recall": recalls,
        "confusion": confusion.tolist(),
        "labels": list(LABELS),
    }


def write_metrics(metrics: dict, out_path) -> None:
    text = json.dumps(metrics, indent=2, sort_keys=True) + "\n"
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
