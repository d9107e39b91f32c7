"""Pipeline tunables with validation; loadable from a JSON config file
whose keys must match the dataclass fields exactly."""

import json
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError

BACKENDS = ("timewarp", "hold", "crossfade", "external")


@dataclass
class PipelineConfig:
    n_fft: int = 2048
    hop: int = 512
    n_mels: int = 64
    bpm_min: float = 60.0
    bpm_max: float = 180.0
    prior_bpm: float = 120.0
    tightness: float = 100.0
    sigma_frames: float = 2.0
    min_distance_frames: int = 3
    threshold_rel: float = 0.1
    output_fps: float = 16.0
    backend: str = "timewarp"
    beat_align_sigma: float = 0.1
    beat_align_over: str = "beats"
    eq1_strict: bool = False
    blend: bool = False

    def validate(self) -> "PipelineConfig":
        if self.hop < 1 or self.n_fft < self.hop:
            raise ConfigError("need n_fft >= hop >= 1")
        if self.n_mels < 1:
            raise ConfigError("n_mels must be positive")
        if not 0 < self.bpm_min < self.bpm_max:
            raise ConfigError("need 0 < bpm_min < bpm_max")
        if not self.bpm_min <= self.prior_bpm <= self.bpm_max:
            raise ConfigError("prior_bpm must lie within [bpm_min, bpm_max]")
        if self.tightness <= 0:
            raise ConfigError("tightness must be positive")
        if self.sigma_frames <= 0:
            raise ConfigError("sigma_frames must be positive")
        if self.min_distance_frames < 1:
            raise ConfigError("min_distance_frames must be at least 1")
        if not 0.0 <= self.threshold_rel <= 1.0:
            raise ConfigError("threshold_rel must lie in [0, 1]")
        if self.output_fps <= 0:
            raise ConfigError("output_fps must be positive")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {', '.join(BACKENDS)}")
        if self.beat_align_sigma <= 0:
            raise ConfigError("beat_align_sigma must be positive")
        if self.beat_align_over not in ("beats", "peaks"):
            raise ConfigError("beat_align_over must be 'beats' or 'peaks'")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**doc).validate()
