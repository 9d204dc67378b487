"""Channel sampling strategies as explicit (source frame, source channel) maps.

Each strategy is fully described by a ChannelIndexMap: for every output
frame, three (frame, channel) pairs saying which source plane lands in each
of its channel slots. Applying a map is a pure byte gather; all the
strategy's arithmetic lives in `build_index_map`.

Frame indices below follow the 1-based convention of the defining equations
and are converted to 0-based storage once, here. The channel cycle c(i) is
R, G, B for i mod 3 = 1, 2, 0. The time-color strategies clamp out-of-range
neighbors to the last frame (and, for the short-long lookback, to the first).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .ingest import SpatialSpec, VideoSource, read_frame, spatial_pipeline, to_grayscale
from .sampler import SampleSpec, sparse_indices
from .seeding import derive_rng
from .tensors import check_frame

R, G, B = 0, 1, 2
GRAY = 0


class Strategy(enum.Enum):
    RGB = "RGB"
    TC = "TC"
    TC_PLUS2 = "TC_PLUS2"
    TC_RGB = "TC_RGB"
    TC_RED = "TC_RED"
    TC_SHORTLONG = "TC_SHORTLONG"
    GRAY_ST = "GRAY_ST"
    GRAY_ONLY = "GRAY_ONLY"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            valid = ", ".join(s.name for s in cls)
            raise ValueError(f"unknown strategy {name!r}; expected one of {valid}") from None


GRAYSCALE_STRATEGIES = frozenset({Strategy.GRAY_ST, Strategy.GRAY_ONLY})


class UnsupportedStrategyError(ValueError):
    """Strategy parameters outside the strategy's defined range."""


@dataclass(frozen=True)
class ChannelIndexMap:
    """T x 3 gather table; entries are 0-based (source frame, source channel)."""

    t_out: int
    source_frames: np.ndarray   # (T, 3) int64
    source_channels: np.ndarray  # (T, 3) int64
    source_is_grayscale: bool
    source_frame_count: int

    def __post_init__(self):
        sf, sc = self.source_frames, self.source_channels
        if sf.shape != (self.t_out, 3) or sc.shape != (self.t_out, 3):
            raise ValueError("index map arrays must have shape (t_out, 3)")
        if sf.min() < 0 or sf.max() >= self.source_frame_count:
            raise ValueError("source frame index outside [0, source_frame_count)")
        if self.source_is_grayscale:
            if (sc != GRAY).any():
                raise ValueError("grayscale maps must address channel 0 only")
        elif sc.min() < 0 or sc.max() > 2:
            raise ValueError("source channel outside {0, 1, 2}")


def _cycle_channel(i: int) -> int:
    m = i % 3
    if m == 1:
        return R
    if m == 2:
        return G
    return B


def required_source_frames(strategy: Strategy, t: int) -> int:
    """Source frames a strategy consumes to emit t output frames."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if strategy is Strategy.TC_PLUS2:
        return t + 2
    if strategy is Strategy.GRAY_ST:
        return 3 * t
    return t


def build_index_map(strategy: Strategy, t: int) -> ChannelIndexMap:
    """The gather table defining `strategy` for t output frames."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if strategy is Strategy.TC_SHORTLONG and t < 5:
        raise UnsupportedStrategyError("TC_SHORTLONG needs t >= 5")

    frames = np.empty((t, 3), dtype=np.int64)
    channels = np.empty((t, 3), dtype=np.int64)
    gray = strategy in GRAYSCALE_STRATEGIES

    for i in range(1, t + 1):
        c = _cycle_channel(i)
        if strategy is Strategy.RGB:
            row_f = (i, i, i)
            row_c = (R, G, B)
        elif strategy is Strategy.TC:
            row_f = (min(i, t), min(i + 1, t), min(i + 2, t))
            row_c = (c, c, c)
        elif strategy is Strategy.TC_PLUS2:
            row_f = (i, i + 1, i + 2)  # over t + 2 source frames, no clamping
            row_c = (c, c, c)
        elif strategy is Strategy.TC_RGB:
            row_f = (min(i, t), min(i + 1, t), min(i + 2, t))
            row_c = (R, G, B)
        elif strategy is Strategy.TC_RED:
            row_f = (min(i, t), min(i + 1, t), min(i + 2, t))
            row_c = (R, R, R)
        elif strategy is Strategy.TC_SHORTLONG:
            if i <= t - 2:
                row_f = (i, i + 1, i + 2)
            elif i == t - 1:
                row_f = (max(t - 5, 1), t - 3, t - 1)  # stride-2 lookback
            else:
                row_f = (t - 4, t - 2, t)
            row_c = (c, c, c)
        elif strategy is Strategy.GRAY_ST:
            row_f = (3 * i - 2, 3 * i - 1, 3 * i)
            row_c = (GRAY, GRAY, GRAY)
        elif strategy is Strategy.GRAY_ONLY:
            row_f = (i, i, i)
            row_c = (GRAY, GRAY, GRAY)
        else:  # pragma: no cover
            raise UnsupportedStrategyError(f"unhandled strategy {strategy}")
        frames[i - 1] = [f - 1 for f in row_f]
        channels[i - 1] = row_c

    return ChannelIndexMap(
        t_out=t,
        source_frames=frames,
        source_channels=channels,
        source_is_grayscale=gray,
        source_frame_count=required_source_frames(strategy, t),
    )


def apply(index_map: ChannelIndexMap, source_frames: list[np.ndarray]) -> np.ndarray:
    """Execute the gather: [H, W, C] sources in, [T, 3, H, W] clip out.

    Every output byte is a verbatim copy of the addressed source byte; no
    arithmetic is performed.
    """
    if len(source_frames) != index_map.source_frame_count:
        raise ValueError(
            f"need {index_map.source_frame_count} source frames, got {len(source_frames)}"
        )
    want_c = 1 if index_map.source_is_grayscale else 3
    shape = source_frames[0].shape
    for f in source_frames:
        check_frame(f)
        if f.shape != shape:
            raise ValueError(f"source frames disagree in shape: {f.shape} vs {shape}")
        if f.shape[2] != want_c:
            raise ValueError(f"strategy expects {want_c}-channel sources, got {f.shape[2]}")

    src = np.stack(source_frames)  # (N, H, W, C) contiguous
    h, w = shape[:2]
    t = index_map.t_out
    sf = index_map.source_frames
    if index_map.source_is_grayscale:
        return np.ascontiguousarray(src[:, :, :, 0][sf])

    out = np.empty((t, 3, h, w), dtype=np.uint8)
    from . import _gather

    _gather.gather_color(src, sf, index_map.source_channels, out)
    return out


def gather_reference(index_map: ChannelIndexMap, source_frames: list[np.ndarray]) -> np.ndarray:
    """Plain-numpy gather, kept as the slow independent path for tests."""
    src = np.stack(source_frames)
    planar = src.transpose(0, 3, 1, 2)
    return np.ascontiguousarray(planar[index_map.source_frames, index_map.source_channels])


def transform_clip(
    source: VideoSource,
    strategy: Strategy,
    spec: SampleSpec,
    spatial: SpatialSpec,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Full per-clip pipeline: sample, decode, (grayscale,) resize/crop, gather.

    Deterministic given (spec.seed, source.id): when `rng` is omitted it is
    derived from that pair, and draw order is fixed (temporal indices first,
    then the spatial transform).
    """
    if rng is None:
        rng = derive_rng(spec.seed, source.id)
    k = required_source_frames(strategy, spec.t)
    indices = sparse_indices(source.frame_count, k, spec.mode, rng)

    unique = sorted(set(indices))
    decoded = {}
    for i in unique:
        frame = read_frame(source.frame_paths[i])
        if strategy in GRAYSCALE_STRATEGIES and frame.shape[2] == 3:
            frame = to_grayscale(frame)
        decoded[i] = frame
    processed = spatial_pipeline([decoded[i] for i in unique], spatial, rng)
    by_index = dict(zip(unique, processed))

    index_map = build_index_map(strategy, spec.t)
    return apply(index_map, [by_index[i] for i in indices])
