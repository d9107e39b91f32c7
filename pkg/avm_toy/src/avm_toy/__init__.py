"""Desk-scale frame-conditioned diffusion model that completes a video from
keyframes pinned at arbitrary positions, speaking the job-directory wire
protocol of the retiming pipeline."""

__version__ = "0.1.0"
