"""JSON artifact round trips for beat grids, peak sets, alignment plans,
and retiming maps. write-then-read is the identity field for field."""

import json

from ..align import AlignmentPlan, RetimingMap
from ..audio import BeatGrid
from ..errors import SchemaMismatch
from ..motion import PeakSet
from . import jsonfmt


def _require(doc: dict, key: str, kind, what: str):
    if key not in doc:
        raise SchemaMismatch(f"{what} JSON missing {key!r} field")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise SchemaMismatch(f"{what} JSON field {key!r} has wrong type")
    return value


def beats_to_dict(grid: BeatGrid) -> dict:
    return {"beats": [float(b) for b in grid.beats],
            "bpm": float(grid.bpm), "duration": float(grid.duration)}


def beats_from_dict(doc: dict) -> BeatGrid:
    beats = _require(doc, "beats", list, "BeatGrid")
    return BeatGrid(beats=beats, bpm=_require(doc, "bpm", float, "BeatGrid"),
                    duration=_require(doc, "duration", float, "BeatGrid"))


def peaks_to_dict(peaks: PeakSet, energy=None) -> dict:
    doc = {"fps": float(peaks.fps),
           "peaks": [{"frame": int(f), "time": float(t), "value": float(v)}
                     for f, t, v in zip(peaks.peak_frames, peaks.peak_times,
                                        peaks.peak_values)]}
    if energy is not None:
        doc["energy"] = [float(x) for x in energy]
    return doc


def peaks_from_dict(doc: dict) -> PeakSet:
    fps = _require(doc, "fps", float, "PeakSet")
    entries = _require(doc, "peaks", list, "PeakSet")
    frames, times, values = [], [], []
    for e in entries:
        frames.append(_require(e, "frame", int, "PeakSet entry"))
        times.append(_require(e, "time", float, "PeakSet entry"))
        values.append(_require(e, "value", float, "PeakSet entry"))
    return PeakSet(peak_times=times, peak_frames=frames, peak_values=values,
                   fps=fps)


def plan_to_dict(plan: AlignmentPlan) -> dict:
    return {
        "pairs": [{"beat": b, "peak": v, "peak_frame": f}
                  for b, v, f in plan.pairs],
        "cost": plan.total_cost,
        "source_fps": plan.source_fps,
        "music_duration": plan.music_duration,
    }


def plan_from_dict(doc: dict) -> AlignmentPlan:
    entries = _require(doc, "pairs", list, "AlignmentPlan")
    pairs = [(_require(e, "beat", float, "pair"),
              _require(e, "peak", float, "pair"),
              _require(e, "peak_frame", int, "pair")) for e in entries]
    return AlignmentPlan(
        pairs=pairs, total_cost=_require(doc, "cost", float, "AlignmentPlan"),
        source_fps=_require(doc, "source_fps", float, "AlignmentPlan"),
        music_duration=_require(doc, "music_duration", float, "AlignmentPlan"))


def retiming_to_dict(retiming: RetimingMap) -> dict:
    return {"fps": retiming.output_fps, "length": retiming.output_length,
            "anchors": [{"frame": g, "source_time": s}
                        for g, s in retiming.anchors]}


def retiming_from_dict(doc: dict) -> RetimingMap:
    entries = _require(doc, "anchors", list, "RetimingMap")
    anchors = [(_require(e, "frame", int, "anchor"),
                _require(e, "source_time", float, "anchor")) for e in entries]
    return RetimingMap(anchors=anchors,
                       output_length=_require(doc, "length", int, "RetimingMap"),
                       output_fps=_require(doc, "fps", float, "RetimingMap"))


def write_plan(plan, path) -> None:
    """Serialize an AlignmentPlan or RetimingMap to JSON."""
    if isinstance(plan, AlignmentPlan):
        jsonfmt.dump(plan_to_dict(plan), path)
    elif isinstance(plan, RetimingMap):
        jsonfmt.dump(retiming_to_dict(plan), path)
    else:
        raise TypeError(f"cannot serialize {type(plan).__name__}")


def read_plan(path):
    """Load an AlignmentPlan or RetimingMap, detected by its schema."""
    try:
        doc = jsonfmt.load(path)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaMismatch(f"{path} must hold a JSON object")
    try:
        if "anchors" in doc:
            return retiming_from_dict(doc)
        if "pairs" in doc:
            return plan_from_dict(doc)
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: {exc}") from exc
    raise SchemaMismatch(f"{path} is neither an alignment plan nor a retiming map")
