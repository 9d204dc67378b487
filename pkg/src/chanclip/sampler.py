"""Temporal frame-index selection.

Sparse segment sampling splits a video into k equal segments and takes one
frame per segment: a uniform draw in training, the segment midpoint in
testing. Dense sampling takes fixed-stride windows placed evenly through the
video, the I3D-style multi-clip test protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import TEN_CROP_IDS, THREE_CROP_IDS

TRAIN = "train"
TEST = "test"

ONE_CENTER = "one_center"
THREE_CROPS = "three_crops"
TEN_CROPS = "ten_crops"

_SPATIAL_SETS = {
    ONE_CENTER: ("center",),
    THREE_CROPS: THREE_CROP_IDS,
    TEN_CROPS: TEN_CROP_IDS,
}


@dataclass(frozen=True)
class SampleSpec:
    """How many model frames to produce and how to pick source frames."""

    t: int
    mode: str = TEST
    seed: int = 0

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.mode not in (TRAIN, TEST):
            raise ValueError(f"mode must be {TRAIN!r} or {TEST!r}, got {self.mode!r}")


def sparse_indices(n: int, k: int, mode: str, rng: np.random.Generator | None = None) -> list[int]:
    """One 0-based frame index per segment, non-decreasing, always length k.

    Segment s spans [floor(s*n/k), floor((s+1)*n/k) - 1]. When n < k some
    segments are empty; an empty segment clamps to its (in-bounds) start so
    short clips still yield k indices.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode not in (TRAIN, TEST):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == TRAIN and rng is None:
        raise ValueError("train mode needs a generator")
    out = []
    for s in range(k):
        start = (s * n) // k
        end = ((s + 1) * n) // k - 1
        if end < start:
            out.append(start)
        elif mode == TEST:
            out.append(start + (end - start) // 2)
        else:
            out.append(int(rng.integers(start, end + 1)))
    return out


def dense_indices(n: int, k: int, stride: int, clip_index: int, num_clips: int) -> list[int]:
    """Fixed-stride window of k indices, window starts spaced evenly.

    Window length is (k-1)*stride + 1; start = round(clip_index * max(n-L, 0)
    / max(num_clips-1, 1)); indices clamp to n-1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 1 or stride < 1:
        raise ValueError("k and stride must be >= 1")
    if num_clips < 1 or not 0 <= clip_index < num_clips:
        raise ValueError(f"clip_index {clip_index} outside [0, {num_clips})")
    length = (k - 1) * stride + 1
    span = max(n - length, 0)
    start = int((clip_index * span) / max(num_clips - 1, 1) + 0.5)
    return [min(start + j * stride, n - 1) for j in range(k)]


def test_clip_plan(num_temporal: int, spatial: str) -> list[tuple[int, str]]:
    """Cartesian (clip_index, spatial_crop_id) pairs in temporal-major order."""
    if num_temporal < 1:
        raise ValueError("num_temporal must be >= 1")
    try:
        ids = _SPATIAL_SETS[spatial]
    except KeyError:
        raise ValueError(f"unknown spatial plan {spatial!r}") from None
    return [(t, s) for t in range(num_temporal) for s in ids]
