"""The job-directory wire protocol this backend fulfills.

A caller provides job.json plus conditioning PNGs; we must answer with
out/%06d.png holding exactly `length` frames at the caller's resolution,
reproducing every conditioning frame within a mean absolute error of 2
(8-bit units). Violations raise ContractViolation on our side too, so a
broken job never produces a half-valid directory.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image


class ContractViolation(RuntimeError):
    pass


CONDITIONING_MAE_LIMIT = 2.0


@dataclass
class CompletionRequest:
    job_id: str
    fps: float
    length: int
    width: int
    height: int
    prompt: str
    conditioning: list[tuple[int, np.ndarray]] = field(repr=False, default=None)
    job_dir: Path = None

    def __post_init__(self):
        indices = [c[0] for c in self.conditioning]
        if not indices:
            raise ContractViolation("job has no conditioning frames")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ContractViolation("conditioning indices must increase")
        if indices[0] < 0 or indices[-1] >= self.length:
            raise ContractViolation("conditioning index out of range")
        for idx, img in self.conditioning:
            if img.shape != (self.height, self.width, 3):
                raise ContractViolation(
                    f"conditioning frame {idx} has shape {img.shape}")


def _field(doc, key, kind):
    if key not in doc:
        raise ContractViolation(f"job.json missing {key!r}")
    value = doc[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ContractViolation(f"job.json field {key!r} has wrong type")
    return value


def read_job(job_dir) -> CompletionRequest:
    job_dir = Path(job_dir)
    try:
        doc = json.loads((job_dir / "job.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractViolation(f"unreadable job.json in {job_dir}: {exc}") from exc
    conditioning = []
    for entry in _field(doc, "conditioning", list):
        frame = _field(entry, "frame", int)
        rel = _field(entry, "path", str)
        with Image.open(job_dir / rel) as img:
            conditioning.append(
                (frame, np.asarray(img.convert("RGB"), dtype=np.uint8)))
    return CompletionRequest(
        job_id=_field(doc, "job_id", str),
        fps=_field(doc, "fps", float),
        length=_field(doc, "length", int),
        width=_field(doc, "width", int),
        height=_field(doc, "height", int),
        prompt=str(doc.get("prompt", "")),
        conditioning=conditioning,
        job_dir=job_dir)


def write_output(job: CompletionRequest, frames: list[np.ndarray]) -> Path:
    """Validate against the contract, then write out/%06d.png."""
    if len(frames) != job.length:
        raise ContractViolation(
            f"produced {len(frames)} frames for a length-{job.length} job")
    for i, frame in enumerate(frames):
        if frame.shape != (job.height, job.width, 3):
            raise ContractViolation(f"frame {i} has shape {frame.shape}")
    for idx, img in job.conditioning:
        mae = float(np.abs(frames[idx].astype(np.float64)
                           - img.astype(np.float64)).mean())
        if mae > CONDITIONING_MAE_LIMIT:
            raise ContractViolation(
                f"conditioning frame {idx} off by MAE {mae:.3f}")
    out_dir = job.job_dir / "out"
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        Image.fromarray(frame, "RGB").save(out_dir / f"{i + 1:06d}.png")
    return out_dir
