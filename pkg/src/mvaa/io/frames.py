"""Frame-sequence ingestion and emission.

Two interchange formats:
  * a directory of zero-padded PNGs (000001.png, ...) plus an ``fps.txt``
    sidecar -- lossless, the canonical format;
  * YUV4MPEG2 (.y4m) with C420 chroma -- convenient but chroma-lossy,
    BT.601 studio-range conversion, nearest-neighbor chroma replication.
"""

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import (
    CorruptHeader,
    EmptySequence,
    IoFailure,
    MissingFpsSidecar,
    MixedDimensions,
    UnsupportedFormat,
)

FPS_SIDECAR = "fps.txt"
_PNG_NAME = re.compile(r"^(\d+)\.png$")


@dataclass
class FrameSequence:
    """Ordered RGB frames (L, H, W, 3) uint8 at a fixed frame rate."""

    frames: np.ndarray = field(repr=False)
    fps: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.uint8)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise ValueError("frames must have shape (L, H, W, 3)")
        if len(self.frames) < 1:
            raise ValueError("a FrameSequence needs at least one frame")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        self.fps = float(self.fps)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def last_frame_time(self) -> float:
        """Timestamp of the final frame, (L-1)/fps."""
        return (len(self.frames) - 1) / self.fps


# -- PNG sequence ----------------------------------------------------------

def read_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def write_png(frame: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(frame, dtype=np.uint8), "RGB").save(path)


def read_png_dir(path) -> list[np.ndarray]:
    """Load every numbered PNG in a directory, ordered by numeric name."""
    entries = []
    for name in os.listdir(path):
        m = _PNG_NAME.match(name)
        if m:
            entries.append((int(m.group(1)), name))
    entries.sort()
    return [read_png(Path(path) / name) for _, name in entries]


def _load_png_sequence(path: Path) -> FrameSequence:
    sidecar = path / FPS_SIDECAR
    if not sidecar.is_file():
        raise MissingFpsSidecar(f"no {FPS_SIDECAR} in {path}")
    try:
        fps = float(sidecar.read_text().strip())
    except ValueError as exc:
        raise MissingFpsSidecar(f"unreadable fps in {sidecar}: {exc}") from exc
    frames = read_png_dir(path)
    if not frames:
        raise EmptySequence(f"no numbered PNG files in {path}")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise MixedDimensions(
                f"frame {i} is {f.shape[1]}x{f.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}")
    return FrameSequence(frames=np.stack(frames), fps=fps)


def _save_png_sequence(seq: FrameSequence, path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(seq.frames):
            write_png(frame, path / f"{i + 1:06d}.png")
        fps = seq.fps
        text = str(int(fps)) if fps == int(fps) else repr(fps)
        (path / FPS_SIDECAR).write_text(text + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write PNG sequence to {path}: {exc}") from exc


# -- YUV4MPEG2 -------------------------------------------------------------

def _parse_y4m_header(line: bytes):
    parts = line.decode("ascii", "replace").split()
    if not parts or parts[0] != "YUV4MPEG2":
        raise CorruptHeader("missing YUV4MPEG2 signature")
    width = height = None
    fps = None
    chroma = "420"
    for tok in parts[1:]:
        tag, val = tok[0], tok[1:]
        if tag == "W":
            width = int(val)
        elif tag == "H":
            height = int(val)
        elif tag == "F":
            num, den = val.split(":")
            fps = int(num) / int(den)
        elif tag == "C":
            chroma = val
    if not width or not height or not fps:
        raise CorruptHeader(f"incomplete y4m header: {line!r}")
    if not chroma.startswith("420"):
        raise UnsupportedFormat(f"chroma C{chroma} not supported (need C420)")
    return width, height, fps


def _ycbcr_to_rgb(y, cb, cr):
    y = y.astype(np.float64) - 16.0
    cb = cb.astype(np.float64) - 128.0
    cr = cr.astype(np.float64) - 128.0
    r = 1.164383 * y + 1.596027 * cr
    g = 1.164383 * y - 0.391762 * cb - 0.812968 * cr
    b = 1.164383 * y + 2.017232 * cb
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)


def _rgb_to_ycbcr(frame):
    rgb = frame.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0
    cb = 128.0 + (-37.797 * r - 74.203 * g + 112.0 * b) / 255.0
    cr = 128.0 + (112.0 * r - 93.786 * g - 18.214 * b) / 255.0
    quant = lambda p: np.clip(np.floor(p + 0.5), 0, 255).astype(np.uint8)
    return quant(y), quant(cb), quant(cr)


def _load_y4m(path: Path) -> FrameSequence:
    with open(path, "rb") as fh:
        header = fh.readline()
        width, height, fps = _parse_y4m_header(header.rstrip(b"\n"))
        cw, ch = (width + 1) // 2, (height + 1) // 2
        ysize, csize = width * height, cw * ch
        frames = []
        while True:
            marker = fh.readline()
            if not marker:
                break
            if not marker.startswith(b"FRAME"):
                raise CorruptHeader(f"bad frame marker {marker!r}")
            raw = fh.read(ysize + 2 * csize)
            if len(raw) != ysize + 2 * csize:
                raise CorruptHeader("truncated y4m frame payload")
            y = np.frombuffer(raw, np.uint8, ysize).reshape(height, width)
            cb = np.frombuffer(raw, np.uint8, csize, ysize).reshape(ch, cw)
            cr = np.frombuffer(raw, np.uint8, csize, ysize + csize).reshape(ch, cw)
            # nearest-neighbor chroma replication back to full resolution
            cb_full = cb.repeat(2, 0).repeat(2, 1)[:height, :width]
            cr_full = cr.repeat(2, 0).repeat(2, 1)[:height, :width]
            frames.append(_ycbcr_to_rgb(y, cb_full, cr_full))
    if not frames:
        raise EmptySequence(f"no frames in {path}")
    return FrameSequence(frames=np.stack(frames), fps=fps)


def _save_y4m(seq: FrameSequence, path: Path) -> None:
    h, w = seq.height, seq.width
    if h % 2 or w % 2:
        raise UnsupportedFormat("C420 y4m output needs even frame dimensions")
    fps = seq.fps
    num, den = (int(fps), 1) if fps == int(fps) else (int(round(fps * 1000)), 1000)
    try:
        with open(path, "wb") as fh:
            fh.write(f"YUV4MPEG2 W{w} H{h} F{num}:{den} Ip A1:1 C420\n".encode())
            for frame in seq.frames:
                y, cb, cr = _rgb_to_ycbcr(frame)
                # 2x2 box average for 4:2:0 chroma
                sub = lambda p: np.clip(np.floor(
                    p.astype(np.float64).reshape(h // 2, 2, w // 2, 2)
                    .mean(axis=(1, 3)) + 0.5), 0, 255).astype(np.uint8)
                fh.write(b"FRAME\n")
                fh.write(y.tobytes() + sub(cb).tobytes() + sub(cr).tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write y4m to {path}: {exc}") from exc


# -- public entry points ---------------------------------------------------

def load_frames(path) -> FrameSequence:
    p = Path(path)
    if p.is_dir():
        return _load_png_sequence(p)
    if p.suffix.lower() == ".y4m":
        return _load_y4m(p)
    raise UnsupportedFormat(f"{path} is neither a PNG directory nor a .y4m file")


def save_frames(seq: FrameSequence, path) -> None:
    p = Path(path)
    if p.suffix.lower() == ".y4m":
        _save_y4m(seq, p)
    else:
        _save_png_sequence(seq, p)
