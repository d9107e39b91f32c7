"""Completion backends: turn a retiming map / conditioning job into the
full output video.

Deterministic backends live here (hold, crossfade, timewarp-resample);
backend_external shells out to any program that speaks the job-directory
protocol: we write job.json plus conditioning PNGs, the backend writes
out/%06d.png, and the result is validated against the job contract.
"""

import hashlib
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .align import RetimingMap, map_source_times, round_half_up
from .errors import BackendFailed, ContractViolation
from .io.frames import FrameSequence, read_png_dir, write_png
from .io.jsonfmt import dump as json_dump

CONDITIONING_MAE_LIMIT = 2.0


@dataclass
class CompletionJob:
    """Conditioning frames pinned to output indices, plus output geometry."""

    conditioning: list[tuple[int, np.ndarray]] = field(repr=False)
    output_length: int
    output_fps: float
    width: int
    height: int
    job_id: str
    prompt: str = ""

    def __post_init__(self):
        if not self.conditioning:
            raise ContractViolation("a job needs at least one conditioning frame")
        indices = [c[0] for c in self.conditioning]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ContractViolation("conditioning indices must be strictly increasing")
        if indices[0] < 0 or indices[-1] > self.output_length - 1:
            raise ContractViolation("conditioning index out of range")
        for idx, img in self.conditioning:
            img = np.asarray(img)
            if img.shape != (self.height, self.width, 3) or img.dtype != np.uint8:
                raise ContractViolation(
                    f"conditioning frame {idx} does not match job geometry")


def source_frame_index(source: FrameSequence, t: float) -> int:
    return int(np.clip(round_half_up(t * source.fps), 0, len(source) - 1))


def job_from_retiming(retiming: RetimingMap, source: FrameSequence,
                      first_image: np.ndarray | None = None) -> CompletionJob:
    """Conditioning set for the map's anchors; the anchor at frame 0 can be
    overridden with an explicit image (used when chaining segments)."""
    conditioning = []
    for target, src_time in retiming.anchors:
        img = source.frames[source_frame_index(source, src_time)]
        if target == 0 and first_image is not None:
            img = np.asarray(first_image, dtype=np.uint8)
        conditioning.append((target, img))

    digest = hashlib.sha256()
    digest.update(f"{retiming.output_length},{retiming.output_fps},"
                  f"{source.width},{source.height}".encode())
    for target, img in conditioning:
        digest.update(str(target).encode())
        digest.update(img.tobytes())
    return CompletionJob(conditioning=conditioning,
                         output_length=retiming.output_length,
                         output_fps=retiming.output_fps,
                         width=source.width, height=source.height,
                         job_id=digest.hexdigest()[:16])


def backend_hold(job: CompletionJob, source: FrameSequence) -> FrameSequence:
    """Every output frame copies the nearest conditioning frame (ties go to
    the earlier one)."""
    indices = np.array([c[0] for c in job.conditioning])
    images = [c[1] for c in job.conditioning]
    frames = np.empty((job.output_length, job.height, job.width, 3), np.uint8)
    for f in range(job.output_length):
        k = int(np.argmin(np.abs(indices - f)))  # argmin takes the earlier tie
        frames[f] = images[k]
    return FrameSequence(frames=frames, fps=job.output_fps)


def backend_crossfade(job: CompletionJob, source: FrameSequence) -> FrameSequence:
    """Linear blend between consecutive conditioning frames; frames outside
    the conditioned span hold the nearest conditioning frame."""
    cond = [(idx, img.astype(np.int64)) for idx, img in job.conditioning]
    frames = np.empty((job.output_length, job.height, job.width, 3), np.uint8)
    frames[:cond[0][0]] = cond[0][1].astype(np.uint8)   # hold before the span
    frames[cond[-1][0]:] = cond[-1][1].astype(np.uint8)  # and after it
    for idx, img in cond:
        frames[idx] = img.astype(np.uint8)
    for (a, img_a), (b, img_b) in zip(cond, cond[1:]):
        span = b - a
        for f in range(a + 1, b):
            num = img_a * (b - f) + img_b * (f - a)
            frames[f] = ((2 * num + span) // (2 * span)).astype(np.uint8)
    return FrameSequence(frames=frames, fps=job.output_fps)


def backend_timewarp(retiming: RetimingMap, source: FrameSequence,
                     blend: bool = False) -> FrameSequence:
    """Piecewise-linear time remapping with nearest-frame sampling, so every
    output frame is an unmodified source frame. blend=True instead mixes the
    two surrounding source frames linearly (ghosting trade-off)."""
    times = map_source_times(retiming)
    if not blend:
        idx = np.clip(np.floor(times * source.fps + 0.5).astype(np.int64),
                      0, len(source) - 1)
        frames = source.frames[idx]
    else:
        pos = np.clip(times * source.fps, 0, len(source) - 1)
        lo = np.floor(pos).astype(np.int64)
        hi = np.minimum(lo + 1, len(source) - 1)
        w = (pos - lo)[:, None, None, None]
        mix = (1.0 - w) * source.frames[lo] + w * source.frames[hi]
        frames = np.clip(np.floor(mix + 0.5), 0, 255).astype(np.uint8)
    return FrameSequence(frames=frames, fps=retiming.output_fps)


def write_job_dir(job: CompletionJob, job_dir) -> Path:
    job_dir = Path(job_dir)
    cond_dir = job_dir / "cond"
    cond_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, (idx, img) in enumerate(job.conditioning):
        rel = f"cond/{i + 1:06d}.png"
        write_png(img, job_dir / rel)
        entries.append({"frame": idx, "path": rel})
    doc = {
        "job_id": job.job_id,
        "fps": float(job.output_fps),
        "length": job.output_length,
        "width": job.width,
        "height": job.height,
        "prompt": job.prompt,
        "conditioning": entries,
    }
    json_dump(doc, job_dir / "job.json")
    return job_dir


def validate_completion(job: CompletionJob, frames: list[np.ndarray]) -> None:
    """Check an external backend's output against the job contract."""
    if len(frames) != job.output_length:
        raise ContractViolation(
            f"backend wrote {len(frames)} frames, job wants {job.output_length}")
    for i, frame in enumerate(frames):
        if frame.shape != (job.height, job.width, 3):
            raise ContractViolation(
                f"frame {i} is {frame.shape}, want {(job.height, job.width, 3)}")
    for idx, img in job.conditioning:
        mae = float(np.abs(frames[idx].astype(np.float64)
                           - img.astype(np.float64)).mean())
        if mae > CONDITIONING_MAE_LIMIT:
            raise ContractViolation(
                f"conditioning frame {idx} differs by MAE {mae:.3f} "
                f"(limit {CONDITIONING_MAE_LIMIT})")


def backend_external(job: CompletionJob, source: FrameSequence, job_dir,
                     command) -> FrameSequence:
    """Run an external completion backend over the job-directory protocol."""
    job_dir = write_job_dir(job, job_dir)
    argv = ([str(command)] if isinstance(command, (str, Path)) else
            [str(c) for c in command]) + [str(job_dir)]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise BackendFailed(f"cannot run {argv[0]}: {exc}") from exc
    if proc.returncode != 0:
        raise BackendFailed(
            f"{argv[0]} exited {proc.returncode}: {proc.stderr.strip()[-500:]}")
    out_dir = job_dir / "out"
    if not out_dir.is_dir():
        raise ContractViolation(f"backend produced no {out_dir}")
    frames = read_png_dir(out_dir)
    validate_completion(job, frames)
    return FrameSequence(frames=np.stack(frames), fps=job.output_fps)
