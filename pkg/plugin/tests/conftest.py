"""Shared fixtures: a generated crop dataset and one fully trained model.

Everything from the engine side is produced through its CLI; this package
never imports the engine.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

N_SAMPLES = 550  # about 2,000 crops
TRAIN_EPOCHS = 20
TRAIN_SEED = 1


def run_engine(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "scenediff.cli", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("dataset") / "data"
    proc = run_engine(
        "simulate", "--n", str(N_SAMPLES), "--seed", str(TRAIN_SEED),
        "--out", str(out), "--emit-crops",
    )
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def trained(dataset_dir, tmp_path_factory):
    """(model_path, metrics) for the acceptance training run; metrics carry
    the wall-clock seconds the run took."""
    import time

    out = tmp_path_factory.mktemp("model") / "model.pt"
    from relation_plugin.train import train, write_metrics

    start = time.perf_counter()
    metrics = train(dataset_dir, out, epochs=TRAIN_EPOCHS, seed=TRAIN_SEED)
    metrics["train_seconds"] = time.perf_counter() - start
    write_metrics(metrics, str(out) + ".metrics.json")
    return out, metrics


@pytest.fixture(scope="session")
def eval_split(dataset_dir):
    """Validation records matching the trained model's split."""
    import numpy as np

    from relation_plugin.data import read_manifest
    from relation_plugin.train import _stratified_split

    records = read_manifest(dataset_dir)
    labels = np.array([r.label for r in records])
    rng = np.random.default_rng(TRAIN_SEED)
    _, val_idx = _stratified_split(labels, 0.2, rng)
    return [records[i] for i in val_idx]
