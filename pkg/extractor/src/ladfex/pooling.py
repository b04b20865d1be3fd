"""Time pooling of frame-level hidden states.

Frames are assigned to phone intervals by their center timestamp; the
frame grid is inferred from the audio duration and the number of frames
the encoder produced, so center k sits at (k + 0.5) * duration / frames.
"""

from __future__ import annotations

import numpy as np


def frame_centers(num_frames: int, duration: float) -> np.ndarray:
    return (np.arange(num_frames) + 0.5) * (duration / num_frames)


def pool_utterance(states: np.ndarray) -> np.ndarray:
    """Mean over time of (L, frames, D) states -> (L, D)."""
    return states.mean(axis=1)


def pool_interval(states: np.ndarray, duration: float, start: float,
                  end: float) -> np.ndarray | None:
    """Mean over the frames whose centers fall inside [start, end).

    Returns None when no frame center lands in the interval (shorter than
    one frame hop); callers skip such segments.
    """
    centers = frame_centers(states.shape[1], duration)
    mask = (centers >= start) & (centers < end)
    if not mask.any():
        return None
    return states[:, mask, :].mean(axis=1)
