"""Throughput measurement for the transform pipeline and the pure gather.

The gather benchmark cycles through a pool of pre-built source-frame sets
large enough to defeat the cache, so both the gather and the raw-copy
baseline run against memory at realistic dataloader conditions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .channelmap import Strategy, apply, build_index_map, required_source_frames, transform_clip
from .ingest import SpatialSpec, VideoSource
from .sampler import SampleSpec

DEFAULT_POOL_BYTES = 96 << 20


def _median(xs: list[float]) -> float:
    return float(np.median(xs))


@dataclass(frozen=True)
class GatherResult:
    strategy: str
    gather_mb_per_s: float
    copy_mb_per_s: float

    @property
    def ratio(self) -> float:
        return self.gather_mb_per_s / self.copy_mb_per_s


@dataclass(frozen=True)
class PipelineResult:
    strategy: str
    clips_per_s: float
    output_mb_per_s: float


def bench_gather(
    strategy: Strategy,
    t: int,
    h: int,
    w: int,
    repeat: int = 5,
    pool_bytes: int = DEFAULT_POOL_BYTES,
    seed: int = 0,
) -> GatherResult:
    """Median throughput of apply() vs a raw copy of equal output size."""
    index_map = build_index_map(strategy, t)
    n = required_source_frames(strategy, t)
    channels = 1 if index_map.source_is_grayscale else 3
    rng = np.random.default_rng(seed)

    clip_out_bytes = t * 3 * h * w
    pool_clips = max(2, pool_bytes // max(n * h * w * channels, clip_out_bytes))
    pool = []
    for _ in range(pool_clips):
        frames = [
            rng.integers(0, 256, size=(h, w, channels)).astype(np.uint8) for _ in range(n)
        ]
        pool.append(frames)

    apply(index_map, pool[0])  # warm up compiled kernels

    total_bytes = pool_clips * clip_out_bytes
    gather_times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for frames in pool:
            apply(index_map, frames)
        gather_times.append(time.perf_counter() - t0)

    blob_src = rng.integers(0, 256, size=total_bytes).astype(np.uint8)
    blob_dst = np.empty_like(blob_src)
    copy_times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        np.copyto(blob_dst, blob_src)
        copy_times.append(time.perf_counter() - t0)

    mb = total_bytes / 1e6
    return GatherResult(
        strategy=strategy.name,
        gather_mb_per_s=mb / _median(gather_times),
        copy_mb_per_s=mb / _median(copy_times),
    )


def bench_pipeline(
    sources: list[VideoSource],
    strategy: Strategy,
    spec: SampleSpec,
    spatial: SpatialSpec,
    repeat: int = 5,
) -> PipelineResult:
    """Median full-pipeline throughput (decode + spatial + gather) per run."""
    if not sources:
        raise ValueError("no sources to benchmark")
    out_bytes = 0
    times = []
    for _ in range(repeat):
        out_bytes = 0
        t0 = time.perf_counter()
        for src in sources:
            clip = transform_clip(src, strategy, spec, spatial)
            out_bytes += clip.nbytes
        times.append(time.perf_counter() - t0)
    elapsed = _median(times)
    return PipelineResult(
        strategy=strategy.name,
        clips_per_s=len(sources) / elapsed,
        output_mb_per_s=out_bytes / 1e6 / elapsed,
    )
