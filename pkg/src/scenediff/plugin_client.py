"""Client for external relation-classifier plugins.

A plugin is a subprocess speaking newline-delimited JSON on stdin/stdout:

* handshake, first line from the plugin: ``{"ready": true, "protocol": 1}``
* request: ``{"id": n, "width": w, "height": h, "image_png_b64": "...",
  "bbox_a": [x0, y0, x1, y1], "bbox_b": [...]}`` where the image is the
  pair's union-box crop PNG and the bboxes are in crop coordinates
* response: ``{"id": n, "label": "<one of the five labels>",
  "probs": {label: p, ...}}`` (probs optional), or ``{"id": n, "error": "..."}``

Responses may arrive in any order; they are matched by id. One batch is in
flight per session; open several sessions for parallelism.
"""

from __future__ import annotations

import base64
import json
import os
import select
import shlex
import subprocess
import time
from dataclasses import dataclass

import numpy as np

from .errors import PluginError, PluginProtocolError
from .raster import png_bytes
from .relation import RelationLabel, build_classifier_input
from .scene import Detection

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class PluginRequest:
    request_id: int
    width: int
    height: int
    png: bytes
    bbox_a: tuple[float, float, float, float]
    bbox_b: tuple[float, float, float, float]

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.request_id,
                "width": self.width,
                "height": self.height,
                "image_png_b64": base64.b64encode(self.png).decode("ascii"),
                "bbox_a": list(self.bbox_a),
                "bbox_b": list(self.bbox_b),
            }
        )


def request_for_pair(request_id: int, image: np.ndarray, det_a: Detection, det_b: Detection) -> PluginRequest:
    inp = build_classifier_input(image, det_a, det_b)
    return PluginRequest(
        request_id=request_id,
        width=inp.width,
        height=inp.height,
        png=png_bytes(inp.rgb),
        bbox_a=inp.bbox_a.as_tuple(),
        bbox_b=inp.bbox_b.as_tuple(),
    )


class PluginSession:
    """One plugin subprocess plus its buffered NDJSON channel."""

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT):
        self.command = command
        self.timeout = timeout
        self._buffer = b""
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise PluginError(f"cannot start plugin {command!r}: {exc}") from exc
        self._handshake()

    def _handshake(self):
        line = self._read_line(deadline=time.monotonic() + self.timeout)
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PluginProtocolError(f"handshake is not JSON: {line!r}") from exc
        if doc.get("ready") is not True:
            raise PluginProtocolError(f"plugin did not signal ready: {doc}")
        if doc.get("protocol") != PROTOCOL_VERSION:
            raise PluginProtocolError(
                f"unsupported plugin protocol {doc.get('protocol')!r}, need {PROTOCOL_VERSION}"
            )

    def _read_line(self, deadline: float) -> bytes:
        stdout = self._proc.stdout
        fd = stdout.fileno()
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                raise PluginError(f"plugin {self.command!r} timed out after {self.timeout}s")
            ready, _, _ = select.select([fd], [], [], min(remaining, 0.5))
            if not ready:
                if self._proc.poll() is not None:
                    raise PluginError(
                        f"plugin {self.command!r} exited with code {self._proc.returncode}"
                    )
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                self._proc.poll()
                raise PluginError(
                    f"plugin {self.command!r} closed its output"
                    + (f" (exit code {self._proc.returncode})" if self._proc.returncode is not None else "")
                )
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line

    def classify_batch(self, requests: list[PluginRequest]) -> list[RelationLabel]:
        """Send a batch and collect one label per request, matched by id."""
        if not requests:
            return []
        ids = {r.request_id for r in requests}
        if len(ids) != len(requests):
            raise ValueError("request ids must be unique within a batch")
        payload = "".join(r.to_json() + "\n" for r in requests)
        try:
            self._proc.stdin.write(payload.encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise PluginError(f"plugin {self.command!r} is gone: {exc}") from exc

        deadline = time.monotonic() + self.timeout
        labels: dict[int, RelationLabel] = {}
        while len(labels) < len(requests):
            line = self._read_line(deadline)
            doc = self._parse_response(line)
            rid = doc.get("id")
            if rid not in ids:
                raise PluginProtocolError(f"response for unknown request id {rid!r}")
            if rid in labels:
                raise PluginProtocolError(f"duplicate response for request id {rid}")
            if "error" in doc:
                raise PluginProtocolError(f"plugin error for request {rid}: {doc['error']}")
            labels[rid] = self._parse_label(doc)
        return [labels[r.request_id] for r in requests]

    def _parse_response(self, line: bytes) -> dict:
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise PluginProtocolError(f"malformed response line: {line!r:.120}") from exc
        if not isinstance(doc, dict):
            raise PluginProtocolError(f"response must be a JSON object: {line!r:.120}")
        return doc

    def _parse_label(self, doc: dict) -> RelationLabel:
        raw = doc.get("label")
        try:
            label = RelationLabel(raw)
        except ValueError:
            raise PluginProtocolError(f"unknown relation label {raw!r}") from None
        probs = doc.get("probs")
        if probs is not None:
            if not isinstance(probs, dict):
                raise PluginProtocolError("probs must be an object")
            try:
                values = {RelationLabel(k): float(v) for k, v in probs.items()}
            except (ValueError, TypeError):
                raise PluginProtocolError(f"bad probs keys/values: {probs}") from None
            total = sum(values.values())
            if abs(total - 1.0) > 1e-6:
                raise PluginProtocolError(f"probs sum to {total}, expected 1")
            argmax = max(values, key=values.get)
            if argmax is not label:
                raise PluginProtocolError(
                    f"label {label.value} disagrees with probs argmax {argmax.value}"
                )
        return label

    def next_id(self) -> int:
        self._next_id += 1
        return self._next_id

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=3.0)
            except subprocess.TimeoutExpired:
                self._kill()
        if self._proc.stdout:
            self._proc.stdout.close()

    def _kill(self):
        try:
            self._proc.kill()
            self._proc.wait(timeout=3.0)
        except Exception:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def external_classify(
    session: PluginSession,
    image: np.ndarray,
    pairs: list[tuple[Detection, Detection]],
) -> list[RelationLabel]:
    """Classify a batch of detection pairs against one scene image."""
    requests = [
        request_for_pair(session.next_id(), image, det_a, det_b) for det_a, det_b in pairs
    ]
    return session.classify_batch(requests)


class PluginClassifier:
    """RelationClassifier backed by a plugin session (one request per call)."""

    def __init__(self, session: PluginSession):
        self.session = session

    def classify(self, scene, image, det_a, det_b) -> RelationLabel:
        if image is None:
            raise PluginError("plugin classification requires scene images")
        return external_classify(self.session, image, [(det_a, det_b)])[0]
