"""End-to-end acceptance through the engine CLI.

On 100 fresh simulator samples the plugin-backed transition method must
reach per-pair accuracy of at least 0.95 and strictly beat the built-in
geometric heuristic on the same samples.
"""

import json
import sys
from pathlib import Path

import pytest

from conftest import run_engine

N_E2E = 100
E2E_SEED = 2024


@pytest.fixture(scope="module")
def fresh_samples(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("e2e") / "samples"
    proc = run_engine(
        "simulate", "--n", str(N_E2E), "--seed", str(E2E_SEED),
        "--out", str(out), "--render",
    )
    assert proc.returncode == 0, proc.stderr
    return out


def _infer_all(samples: Path, pred: Path, classifier_args: list[str]):
    for k in range(N_E2E):
        sample = samples / f"sample_{k}"
        proc = run_engine(
            "infer", "--method", "transition",
            "--initial", str(sample / "initial.json"),
            "--final", str(sample / "final.json"),
            "--images", str(sample / "initial.png"), str(sample / "final.png"),
            "--out", str(pred / f"sample_{k}.json"),
            *classifier_args,
        )
        assert proc.returncode == 0, proc.stderr


def _evaluate(samples: Path, pred: Path, report: Path) -> dict:
    proc = run_engine(
        "evaluate", "--pred", str(pred), "--truth", str(samples),
        "--report", str(report),
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(report.read_text())


def test_plugin_beats_heuristic_end_to_end(trained, fresh_samples, tmp_path):
    model_path, _ = trained
    plugin_cmd = f"{sys.executable} -m relation_plugin.cli serve --model {model_path}"

    plugin_pred = tmp_path / "pred_plugin"
    _infer_all(fresh_samples, plugin_pred, ["--classifier", "plugin", "--plugin-cmd", plugin_cmd])
    plugin_report = _evaluate(fresh_samples, plugin_pred, tmp_path / "report_plugin.json")

    heur_pred = tmp_path / "pred_heuristic"
    _infer_all(fresh_samples, heur_pred, ["--classifier", "heuristic"])
    heur_report = _evaluate(fresh_samples, heur_pred, tmp_path / "report_heuristic.json")

    print(f"\nplugin accuracy:    {plugin_report['accuracy']:.4f}")
    print(f"heuristic accuracy: {heur_report['accuracy']:.4f}")
    assert plugin_report["accuracy"] >= 0.95
    assert plugin_report["accuracy"] > heur_report["accuracy"]
