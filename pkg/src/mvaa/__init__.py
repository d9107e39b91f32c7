"""Retimes a video so its salient motion lands on the beats of a music
track, while every output frame stays faithful to the source footage."""

__version__ = "0.1.0"
