"""chanclip: channel-sampling strategies for video clip preprocessing.

Turns sampled video frames into model-ready [T, 3, H, W] uint8 clips whose
channels are re-ordered across time (time-color reordering, grayscale
short-term stacking, and their ablation variants), plus a synthetic-data
harness that measures how much temporal information each strategy exposes to
a per-frame classifier.
"""

from .channelmap import (
    ChannelIndexMap,
    Strategy,
    UnsupportedStrategyError,
    apply,
    build_index_map,
    required_source_frames,
    transform_clip,
)
from .ingest import (
    SpatialSpec,
    VideoSource,
    crop,
    decode_ppm,
    encode_ppm,
    five_crops_with_flips,
    hflip,
    open_frame_dir,
    read_manifest,
    resize_shorter_side,
    spatial_pipeline,
    to_grayscale,
)
from .sampler import SampleSpec, dense_indices, sparse_indices, test_clip_plan
from .synth import SynthConfig, generate_clip, generate_dataset
from .tensors import read_tensor, read_tensor_file, write_tensor, write_tensor_file

__version__ = "0.1.0"

__all__ = [
    "ChannelIndexMap",
    "SampleSpec",
    "SpatialSpec",
    "Strategy",
    "SynthConfig",
    "UnsupportedStrategyError",
    "VideoSource",
    "apply",
    "build_index_map",
    "crop",
    "decode_ppm",
    "dense_indices",
    "encode_ppm",
    "five_crops_with_flips",
    "generate_clip",
    "generate_dataset",
    "hflip",
    "open_frame_dir",
    "read_manifest",
    "read_tensor",
    "read_tensor_file",
    "required_source_frames",
    "resize_shorter_side",
    "spatial_pipeline",
    "sparse_indices",
    "test_clip_plan",
    "to_grayscale",
    "transform_clip",
    "write_tensor",
    "write_tensor_file",
]
