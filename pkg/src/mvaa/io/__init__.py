from .frames import FrameSequence, load_frames, read_png_dir, save_frames
from .wav import AudioTrack, load_wav, save_wav_pcm16

# .plans re-exports live at mvaa.io.plans; importing them here would create
# an import cycle through the analysis modules whose types they serialize.

__all__ = [
    "AudioTrack",
    "FrameSequence",
    "load_frames",
    "load_wav",
    "read_png_dir",
    "save_frames",
    "save_wav_pcm16",
]
