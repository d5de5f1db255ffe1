"""Command-line interface.

Subcommands: ``simulate`` (synthetic dataset), ``infer`` (geometric or
transition method on one scene pair), ``evaluate`` (score predictions
against ground truth), ``overlay`` (draw boxes and task arrows).

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 plugin error.
All outputs are written atomically and contain no timestamps, so equal
inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import GenerationError, PluginError, SceneDiffError, SceneParseError
from .evaluation import evaluate_dirs
from .geometric import GeoConfig, GeometricDiagnostics, infer_tasks_geometric
from .relation import HeuristicClassifier, HeuristicConfig
from .scene import Method, ScenePair
from .sceneio import DETECTOR_TXT, SCENE_JSON, load_scene, load_tasks, serialize_tasks, write_atomic
from .simulator import OracleClassifier, SimConfig, generate_dataset, parse_truth
from .transition import TransitionDiagnostics, infer_tasks_transition

USAGE_ERROR = 1
DATA_ERROR = 2
PLUGIN_ERROR = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenediff", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset with ground truth")
    p.add_argument("--n", type=int, required=True, help="number of scene pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--render", action="store_true", help="also write scene PNGs")
    p.add_argument("--emit-crops", action="store_true", help="write classifier training crops")
    p.add_argument("--config", help="JSON file with SimConfig/GeoConfig field overrides")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("infer", help="infer pick-and-place tasks for one scene pair")
    p.add_argument("--method", choices=["geometric", "transition"], required=True)
    p.add_argument("--initial", required=True)
    p.add_argument("--final", required=True)
    p.add_argument("--images", nargs=2, metavar=("IMG1", "IMG2"), help="initial/final scene images")
    p.add_argument("--classifier", choices=["heuristic", "oracle", "plugin"], default="heuristic")
    p.add_argument("--plugin-cmd", help="command line of a classifier plugin")
    p.add_argument("--truth", help="truth.json with relation sidecars (oracle classifier)")
    p.add_argument("--format", choices=[SCENE_JSON, DETECTOR_TXT], default=SCENE_JSON)
    p.add_argument("--image-size", nargs=2, type=int, metavar=("W", "H"),
                   help="image dimensions for detector_txt input")
    p.add_argument("--class-names", help="class-name file (one per line) for detector_txt input")
    p.add_argument("--config", help="JSON config overrides")
    p.add_argument("--debug", action="store_true", help="print diagnostics JSON to stderr")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="score predicted tasks against a truth dataset")
    p.add_argument("--pred", required=True, help="directory of predicted task files")
    p.add_argument("--truth", required=True, help="simulate output directory")
    p.add_argument("--report", required=True, help="report JSON output path")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("overlay", help="draw detections and task arrows over an image")
    p.add_argument("--scene", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--tasks", nargs="+", required=True, help="one or more task files")
    p.add_argument("--out", required=True)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SceneParseError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneParseError("config must be a JSON object")
    return doc


_SIM_FIELDS = {
    "image_width", "image_height", "n_objects", "n_tasks", "kind_probs",
    "jitter_px", "detectability", "seed", "mode", "classes", "class_weights",
}
_GEO_FIELDS = {"movement_threshold_frac", "iou_threshold", "same_class_matching"}
_HEUR_FIELDS = {"relate_threshold", "inside_threshold"}


def _split_config(doc: dict) -> tuple[dict, dict, dict]:
    unknown = set(doc) - _SIM_FIELDS - _GEO_FIELDS - _HEUR_FIELDS
    if unknown:
        raise SceneParseError(f"unknown config fields: {sorted(unknown)}")
    tup = lambda v: tuple(v) if isinstance(v, list) else v
    sim = {k: tup(v) for k, v in doc.items() if k in _SIM_FIELDS}
    geo = {k: v for k, v in doc.items() if k in _GEO_FIELDS}
    heur = {k: v for k, v in doc.items() if k in _HEUR_FIELDS}
    return sim, geo, heur


def _cmd_simulate(args) -> int:
    sim_kwargs, _, _ = _split_config(_load_config(args.config))
    sim_kwargs["seed"] = args.seed
    try:
        config = SimConfig(**sim_kwargs)
    except (TypeError, ValueError) as exc:
        raise SceneParseError(f"bad simulator config: {exc}") from exc
    generate_dataset(
        config,
        args.n,
        args.out,
        render=args.render,
        emit_crops=args.emit_crops,
        jobs=max(1, args.jobs),
    )
    print(f"wrote {args.n} samples to {args.out}")
    return 0


def _scene_loader_opts(args) -> dict:
    opts = {}
    if args.format == DETECTOR_TXT:
        if not args.image_size:
            raise _UsageError("detector_txt input requires --image-size W H")
        opts["image_size"] = tuple(args.image_size)
        if args.class_names:
            names = Path(args.class_names).read_text(encoding="utf-8").splitlines()
            opts["class_names"] = [n.strip() for n in names if n.strip()]
    return opts


def _cmd_infer(args) -> int:
    _, geo_kwargs, heur_kwargs = _split_config(_load_config(args.config))
    geo_config = GeoConfig(**geo_kwargs)
    opts = _scene_loader_opts(args)
    pair = ScenePair(
        load_scene(args.initial, args.format, **opts),
        load_scene(args.final, args.format, **opts),
    )

    images = None
    if args.images:
        from .raster import load_png

        images = (load_png(args.images[0]), load_png(args.images[1]))

    extra_doc: dict = {}
    if args.method == "geometric":
        diag = GeometricDiagnostics()
        tasks = infer_tasks_geometric(pair, geo_config, diagnostics=diag)
        diag_doc = {"method": "geometric", **diag.to_dict()}
    else:
        diag = TransitionDiagnostics()
        session = None
        try:
            if args.classifier == "plugin":
                from .plugin_client import PluginClassifier, PluginSession

                if not args.plugin_cmd:
                    raise _UsageError("--classifier plugin requires --plugin-cmd")
                if images is None:
                    raise _UsageError("--classifier plugin requires --images IMG1 IMG2")
                session = PluginSession(args.plugin_cmd)
                classifier = PluginClassifier(session)
            else:
                classifier = _make_classifier(args, pair, heur_kwargs)
            tasks = infer_tasks_transition(
                pair, images, classifier, geo_config, diagnostics=diag
            )
        finally:
            if session is not None:
                session.close()
        diag_doc = {"method": "transition", **diag.to_dict()}
        extra_doc["relations"] = _relations_doc(diag)

    out_doc = json.loads(serialize_tasks(tasks))
    out_doc.update(extra_doc)
    write_atomic(args.out, json.dumps(out_doc, indent=2, sort_keys=True) + "\n")
    if args.debug:
        print(json.dumps(diag_doc, indent=2, sort_keys=True), file=sys.stderr)
    return 0


def _make_classifier(args, pair: ScenePair, heur_kwargs: dict):
    if args.classifier == "heuristic":
        return HeuristicClassifier(HeuristicConfig(**heur_kwargs))
    if not args.truth:
        raise _UsageError("--classifier oracle requires --truth truth.json")
    try:
        truth_text = Path(args.truth).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneParseError(f"cannot read truth file {args.truth}: {exc}") from exc
    _, relations = parse_truth(truth_text)
    return OracleClassifier(pair.initial, pair.final, relations.initial, relations.final)


def _relations_doc(diag: TransitionDiagnostics) -> dict:
    initial = []
    final = []
    for t in diag.transitions:
        rec = {"a": t.pair.a_id, "b": t.pair.b_id}
        initial.append({**rec, "label": t.initial_rel.value})
        final.append({**rec, "label": t.final_rel.value})
    return {"initial": initial, "final": final}


def _cmd_evaluate(args) -> int:
    report = evaluate_dirs(args.truth, args.pred, jobs=max(1, args.jobs))
    write_atomic(args.report, json.dumps(report, indent=2, sort_keys=True) + "\n")
    acc = report["accuracy"]
    print(f"evaluated {report['n_scene_pairs']} scene pairs, "
          f"{report['n_pairs']} pair outcomes, accuracy {acc:.4f}")
    return 0


# Arrow colors per task provenance (ground truth is black). Arrows of
# different provenance are nudged sideways so they stay visible when a
# prediction coincides with the truth.
_METHOD_COLORS = {
    Method.GEOMETRIC: (0, 204, 0),
    Method.TRANSITION: (204, 0, 204),
    Method.TRUTH: (0, 0, 0),
}
_METHOD_OFFSETS = {
    Method.GEOMETRIC: -5.0,
    Method.TRANSITION: 5.0,
    Method.TRUTH: 0.0,
}


def _cmd_overlay(args) -> int:
    import numpy as np
    from PIL import Image, ImageDraw

    from .raster import load_png

    scene = load_scene(args.scene)
    try:
        image = load_png(args.image)
    except OSError as exc:
        raise SceneParseError(f"cannot read image {args.image}: {exc}") from exc
    tasks = [t for path in args.tasks for t in load_tasks(path)]

    im = Image.fromarray(image, mode="RGB")
    draw = ImageDraw.Draw(im)
    for det in scene.detections:
        b = det.bbox
        draw.rectangle([b.x_min, b.y_min, b.x_max, b.y_max], outline=(40, 40, 40), width=2)
        draw.text((b.x_min + 2, max(0, b.y_min - 11)), det.id, fill=(20, 20, 20))
    for task in tasks:
        color = _METHOD_COLORS[task.method]
        _draw_arrow(draw, scene, task, color)
    buf = np.asarray(im)
    from .raster import png_bytes

    write_atomic(args.out, png_bytes(buf))
    return 0


def _draw_arrow(draw, scene, task, color):
    import math

    from .boxes import center

    try:
        src = center(scene.get(task.picked_id).bbox)
        dst = center(scene.get(task.target_id).bbox)
    except KeyError as exc:
        raise SceneParseError(f"task references unknown detection: {exc}") from exc
    angle = math.atan2(dst[1] - src[1], dst[0] - src[0])
    shift = _METHOD_OFFSETS[task.method]
    dx, dy = -math.sin(angle) * shift, math.cos(angle) * shift
    src = (src[0] + dx, src[1] + dy)
    dst = (dst[0] + dx, dst[1] + dy)
    draw.line([src, dst], fill=color, width=3)
    # Arrowhead: two short strokes back from the tip.
    for offset in (math.radians(150), math.radians(-150)):
        end = (
            dst[0] + 12 * math.cos(angle + offset),
            dst[1] + 12 * math.sin(angle + offset),
        )
        draw.line([dst, end], fill=color, width=3)


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "infer":
            return _cmd_infer(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        return _cmd_overlay(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except PluginError as exc:
        print(f"plugin error: {exc}", file=sys.stderr)
        return PLUGIN_ERROR
    except (SceneParseError, GenerationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except SceneDiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
