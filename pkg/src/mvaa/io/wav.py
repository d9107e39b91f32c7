"""RIFF/WAVE decoding: PCM 16-bit and IEEE float 32-bit, mono or stereo.

Stereo is collapsed to mono by channel mean; 16-bit samples are scaled by
1/32768 so -32768 maps exactly to -1.0.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import CorruptHeader, UnsupportedFormat

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE


@dataclass
class AudioTrack:
    """Mono audio signal with amplitudes in [-1, 1]."""

    samples: np.ndarray = field(repr=False)
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")
        if self.samples.size and (
            self.samples.min() < -1.0 or self.samples.max() > 1.0
        ):
            raise ValueError("samples must lie in [-1, 1]")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _read_chunks(data: bytes):
    """Yield (chunk_id, payload) for every top-level RIFF sub-chunk."""
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        payload = data[pos + 8:pos + 8 + size]
        if len(payload) < size:
            raise CorruptHeader(f"chunk {cid!r} truncated ({len(payload)} < {size})")
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def load_wav(path) -> AudioTrack:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeader("not a RIFF/WAVE file")

    fmt = None
    payload = None
    for cid, chunk in _read_chunks(data):
        if cid == b"fmt " and fmt is None:
            if len(chunk) < 16:
                raise CorruptHeader("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", chunk, 0)
        elif cid == b"data" and payload is None:
            payload = chunk
    if fmt is None or payload is None:
        raise CorruptHeader("missing fmt or data chunk")

    format_tag, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if format_tag == _FMT_EXTENSIBLE:
        raise UnsupportedFormat("WAVE_FORMAT_EXTENSIBLE is not supported")
    if format_tag not in (_FMT_PCM, _FMT_IEEE_FLOAT):
        raise UnsupportedFormat(f"unsupported codec (format tag {format_tag})")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"unsupported channel count {channels}")
    if sample_rate <= 0:
        raise CorruptHeader(f"bad sample rate {sample_rate}")

    if format_tag == _FMT_PCM:
        if bits != 16:
            raise UnsupportedFormat(f"PCM must be 16-bit, got {bits}")
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (2 * channels)],
                            dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    else:
        if bits != 32:
            raise UnsupportedFormat(f"float must be 32-bit, got {bits}")
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (4 * channels)],
                            dtype="<f4")
        samples = raw.astype(np.float64)
        if samples.size and (not np.all(np.isfinite(samples))
                             or np.abs(samples).max() > 1.0):
            raise UnsupportedFormat("float samples outside [-1, 1]")

    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioTrack(samples=samples, sample_rate=sample_rate)


def save_wav_pcm16(track: AudioTrack, path) -> None:
    """Write a mono 16-bit PCM WAV (fixture/demo helper, not a loader)."""
    pcm = np.clip(np.round(track.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    sr = track.sample_rate
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, _FMT_PCM, 1, sr, sr * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(payload))
    with open(path, "wb") as fh:
        fh.write(header + payload)
