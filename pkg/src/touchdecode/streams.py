"""Versioned JSON-lines files for observation streams and ground truth.

Observation file: header line {"schema": "touchdecode-observations/1"},
then one record per observation:
    {"phrase": int, "frame": int, "finger_probs": [11 floats],
     "mean": [x, y], "var": [vx, vy], "source_ref": str|null}

Truth file: header {"schema": "touchdecode-truth/1"}, then
    {"phrase": int, "frame": int, "char": str, "contact": [x, y],
     "finger": int}

Records are grouped by the phrase index; readers return one list per
phrase in index order.
"""

from __future__ import annotations

import json

import numpy as np

from .decoder import TouchObservation
from .gaussians import Gaussian2
from .losses import FrameDistribution
from .simulator import GroundTruthEvent

OBS_SCHEMA = "touchdecode-observations/1"
TRUTH_SCHEMA = "touchdecode-truth/1"


class StreamFormatError(ValueError):
    pass


def _write_jsonl(path, schema: str, records) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps({"schema": schema}) + "\n")
        for rec in records:
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")


def _read_jsonl(path, schema: str):
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        try:
            head = json.loads(header)
        except json.JSONDecodeError:
            raise StreamFormatError(f"{path}: missing schema header")
        if head.get("schema") != schema:
            raise StreamFormatError(
                f"{path}: expected schema {schema!r}, found {head.get('schema')!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                raise StreamFormatError(f"{path}:{lineno}: malformed JSON record")


def _group_by_phrase(records, build):
    phrases: dict[int, list] = {}
    for rec in records:
        phrases.setdefault(int(rec.get("phrase", 0)), []).append(build(rec))
    return [phrases[i] for i in sorted(phrases)]


def write_observations(path, streams: list[list[TouchObservation]]) -> None:
    def records():
        for i, stream in enumerate(streams):
            for o in stream:
                yield {
                    "phrase": i,
                    "frame": o.frame,
                    "finger_probs": [round(float(p), 12) for p in o.finger_dist.probs],
                    "mean": [float(o.location.mean[0]), float(o.location.mean[1])],
                    "var": [float(o.location.cov[0, 0]), float(o.location.cov[1, 1])],
                    "source_ref": o.source_ref,
                }
    _write_jsonl(path, OBS_SCHEMA, records())


def read_observations(path) -> list[list[TouchObservation]]:
    def build(rec):
        try:
            probs = np.asarray(rec["finger_probs"], dtype=float)
            probs = probs / probs.sum()
            return TouchObservation(
                frame=int(rec["frame"]),
                finger_dist=FrameDistribution(probs=probs),
                location=Gaussian2(mean=rec["mean"], cov=np.diag(rec["var"])),
                source_ref=rec.get("source_ref"))
        except (KeyError, ValueError, TypeError) as exc:
            raise StreamFormatError(f"{path}: bad observation record: {exc}")
    return _group_by_phrase(_read_jsonl(path, OBS_SCHEMA), build)


def write_truth(path, truths: list[list[GroundTruthEvent]]) -> None:
    def records():
        for i, events in enumerate(truths):
            for e in events:
                yield {
                    "phrase": i,
                    "frame": e.frame,
                    "char": e.char,
                    "contact": [float(e.contact[0]), float(e.contact[1])],
                    "finger": e.finger,
                }
    _write_jsonl(path, TRUTH_SCHEMA, records())


def read_truth(path) -> list[list[GroundTruthEvent]]:
    def build(rec):
        try:
            return GroundTruthEvent(
                frame=int(rec["frame"]), char=rec["char"],
                contact=rec["contact"], finger=int(rec["finger"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise StreamFormatError(f"{path}: bad truth record: {exc}")
    return _group_by_phrase(_read_jsonl(path, TRUTH_SCHEMA), build)
