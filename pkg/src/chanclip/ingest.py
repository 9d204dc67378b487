"""Frame-directory ingestion and the spatial protocol.

Frame files are binary PPM (P6) / PGM (P5) with maxval 255. A dataset is a
manifest (`clip_id,relative_dir,label`, label optional) next to one frame
directory per clip. Spatial processing follows the training protocol: resize
the shorter side to a target in [min, max], then crop — one transform drawn
per clip and applied to every frame, so channels merged across frames stay
pixel-aligned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .tensors import check_frame

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # ITU-R BT.601 luma

RANDOM_CROP = "random_crop"
CENTER_CROP = "center_crop"
FIVE_CROP_FLIP = "five_crop_flip"
SPATIAL_MODES = (RANDOM_CROP, CENTER_CROP, FIVE_CROP_FLIP)

# order matches five_crops_with_flips
TEN_CROP_IDS = (
    "tl", "tr", "bl", "br", "center",
    "tl_flip", "tr_flip", "bl_flip", "br_flip", "center_flip",
)
THREE_CROP_IDS = ("left", "center", "right")

_FRAME_SUFFIXES = {".ppm", ".pgm"}


class DecodeError(ValueError):
    """Frame bytes are not a supported binary PPM/PGM."""


class EmptySourceError(ValueError):
    """Frame directory holds no frame files."""


@dataclass
class VideoSource:
    """An on-disk clip: ordered frame paths plus an optional class label."""

    id: str
    frame_paths: list[Path]
    label: int | None = None

    def __post_init__(self):
        if not self.frame_paths:
            raise EmptySourceError(f"clip {self.id!r} has no frames")

    @property
    def frame_count(self) -> int:
        return len(self.frame_paths)


@dataclass(frozen=True)
class SpatialSpec:
    resize_shorter_min: int
    resize_shorter_max: int
    crop_size: int
    mode: str = CENTER_CROP

    def __post_init__(self):
        if self.resize_shorter_min > self.resize_shorter_max:
            raise ValueError("resize_shorter_min must be <= resize_shorter_max")
        if self.crop_size > self.resize_shorter_min:
            raise ValueError("crop_size must be <= resize_shorter_min")
        if self.crop_size < 1:
            raise ValueError("crop_size must be >= 1")
        if self.mode not in SPATIAL_MODES:
            raise ValueError(f"unknown spatial mode {self.mode!r}")


def open_frame_dir(path: str | Path, clip_id: str | None = None, label: int | None = None) -> VideoSource:
    """Build a VideoSource from a directory of frame files, sorted by name."""
    path = Path(path)
    if not path.is_dir():
        raise FileNotFoundError(f"frame directory {path} does not exist")
    paths = [p for p in path.iterdir() if p.is_file() and p.suffix.lower() in _FRAME_SUFFIXES]
    paths.sort(key=lambda p: p.name)
    if not paths:
        raise EmptySourceError(f"no frame files in {path}")
    return VideoSource(id=clip_id or path.name, frame_paths=paths, label=label)


def read_manifest(path: str | Path) -> list[VideoSource]:
    """Parse a `clip_id,relative_dir,label` manifest; dirs resolve next to it."""
    path = Path(path)
    base = path.parent
    sources = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) == 2:
                clip_id, rel = parts
                label = None
            elif len(parts) == 3:
                clip_id, rel, raw = parts
                label = int(raw) if raw.strip() else None
            else:
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 fields, got {len(parts)}")
            sources.append(open_frame_dir(base / rel, clip_id=clip_id, label=label))
    return sources


# ---------------------------------------------------------------------------
# PPM / PGM

_WHITESPACE = b" \t\n\r\x0b\x0c"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < n and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        elif ch in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise DecodeError("unexpected end of header")
    return data[start:pos], pos


def decode_ppm(data: bytes) -> np.ndarray:
    """Decode binary PPM (P6) or PGM (P5) bytes to an [H, W, C] uint8 frame."""
    magic, pos = _next_token(data, 0)
    if magic == b"P6":
        channels = 3
    elif magic == b"P5":
        channels = 1
    else:
        raise DecodeError(f"unsupported magic {magic!r}; only binary P5/P6 are accepted")
    fields = []
    for _ in range(3):
        tok, pos = _next_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError as exc:
            raise DecodeError(f"bad header token {tok!r}") from exc
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise DecodeError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise DecodeError(f"maxval {maxval} unsupported; must be 255")
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise DecodeError("missing whitespace after maxval")
    pos += 1
    need = height * width * channels
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise DecodeError(f"payload truncated: need {need} bytes, have {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels).copy()


def encode_ppm(frame: np.ndarray) -> bytes:
    """Encode an [H, W, C] uint8 frame as binary PPM (3ch) or PGM (1ch)."""
    check_frame(frame)
    h, w, c = frame.shape
    magic = b"P6" if c == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (w, h)
    return header + np.ascontiguousarray(frame).tobytes()


def read_frame(path: str | Path) -> np.ndarray:
    return decode_ppm(Path(path).read_bytes())


def write_frame(path: str | Path, frame: np.ndarray) -> None:
    Path(path).write_bytes(encode_ppm(frame))


# ---------------------------------------------------------------------------
# Pixel transforms

def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """BT.601 luma with round-half-up; [H, W, 3] -> [H, W, 1]."""
    check_frame(frame)
    if frame.shape[2] != 3:
        raise ValueError(f"grayscale conversion needs 3 channels, got {frame.shape[2]}")
    wr, wg, wb = GRAY_WEIGHTS
    f = frame.astype(np.float64)
    y = wr * f[:, :, 0] + wg * f[:, :, 1] + wb * f[:, :, 2]
    y = np.clip(np.floor(y + 0.5), 0.0, 255.0)
    return y.astype(np.uint8)[:, :, np.newaxis]


def _bilinear(frame: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    # Half-pixel-centered sample coordinates; edge-clamped; exact identity
    # when the scale is 1. Arithmetic kept in the same order as the scalar
    # reference so results agree bit-for-bit.
    h, w = frame.shape[:2]
    src = frame.astype(np.float64)

    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    y0f = np.floor(ys)
    x0f = np.floor(xs)
    fy = (ys - y0f)[:, None, None]
    fx = (xs - x0f)[None, :, None]
    y0 = np.clip(y0f, 0, h - 1).astype(np.intp)
    y1 = np.clip(y0f + 1, 0, h - 1).astype(np.intp)
    x0 = np.clip(x0f, 0, w - 1).astype(np.intp)
    x1 = np.clip(x0f + 1, 0, w - 1).astype(np.intp)

    a = src[y0[:, None], x0[None, :]]
    b = src[y0[:, None], x1[None, :]]
    c = src[y1[:, None], x0[None, :]]
    d = src[y1[:, None], x1[None, :]]
    out = (1.0 - fy) * (1.0 - fx) * a + (1.0 - fy) * fx * b + fy * (1.0 - fx) * c + fy * fx * d
    return np.clip(np.floor(out + 0.5), 0.0, 255.0).astype(np.uint8)


def resize_shorter_side(frame: np.ndarray, target: int) -> np.ndarray:
    """Resize so the shorter side equals `target`, preserving aspect ratio."""
    check_frame(frame)
    if target < 1:
        raise ValueError("resize target must be >= 1")
    h, w = frame.shape[:2]
    if h <= w:
        out_h = target
        out_w = max(1, int(math.floor(w * target / h + 0.5)))
    else:
        out_w = target
        out_h = max(1, int(math.floor(h * target / w + 0.5)))
    if (out_h, out_w) == (h, w):
        return frame.copy()
    return _bilinear(frame, out_h, out_w)


def crop(frame: np.ndarray, top: int, left: int, size: int) -> np.ndarray:
    """Copy a size x size window; out-of-bounds windows raise."""
    check_frame(frame)
    h, w = frame.shape[:2]
    if size < 1:
        raise ValueError("crop size must be >= 1")
    if top < 0 or left < 0 or top + size > h or left + size > w:
        raise ValueError(f"crop window ({top},{left})+{size} outside {h}x{w} frame")
    return frame[top:top + size, left:left + size].copy()


def hflip(frame: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(frame[:, ::-1])


def five_crops_with_flips(frame: np.ndarray, size: int) -> list[np.ndarray]:
    """Corner and center crops plus their horizontal flips, 10 frames total.

    Order: top-left, top-right, bottom-left, bottom-right, center, then the
    flip of each in the same order.
    """
    check_frame(frame)
    h, w = frame.shape[:2]
    if size > min(h, w):
        raise ValueError(f"crop size {size} exceeds frame {h}x{w}")
    windows = [
        (0, 0),
        (0, w - size),
        (h - size, 0),
        (h - size, w - size),
        ((h - size) // 2, (w - size) // 2),
    ]
    crops = [crop(frame, t, l, size) for t, l in windows]
    return crops + [hflip(c) for c in crops]


def crop_window(crop_id: str, h: int, w: int, size: int) -> tuple[int, int, bool]:
    """Resolve a named crop to (top, left, flip).

    `left`/`right` slide along the longer spatial axis; corner names follow
    five_crops_with_flips; a `_flip` suffix requests a horizontal flip.
    """
    flip = crop_id.endswith("_flip")
    base = crop_id[:-5] if flip else crop_id
    ct, cl = (h - size) // 2, (w - size) // 2
    if base == "center":
        top, left = ct, cl
    elif base == "tl":
        top, left = 0, 0
    elif base == "tr":
        top, left = 0, w - size
    elif base == "bl":
        top, left = h - size, 0
    elif base == "br":
        top, left = h - size, w - size
    elif base == "left":
        top, left = (ct, 0) if w >= h else (0, cl)
    elif base == "right":
        top, left = (ct, w - size) if w >= h else (h - size, cl)
    else:
        raise ValueError(f"unknown crop id {crop_id!r}")
    return top, left, flip


def named_crop(frame: np.ndarray, crop_id: str, size: int) -> np.ndarray:
    top, left, flip = crop_window(crop_id, frame.shape[0], frame.shape[1], size)
    out = crop(frame, top, left, size)
    return hflip(out) if flip else out


def spatial_pipeline(
    frames: list[np.ndarray],
    spec: SpatialSpec,
    rng: np.random.Generator | None = None,
    crop_id: str | None = None,
) -> list[np.ndarray]:
    """Resize + crop a clip with one transform shared by every frame.

    random_crop draws the resize target uniformly from [min, max] and a
    uniform window; center_crop uses the min target and the centered window;
    five_crop_flip uses the min target and one of the ten named crops
    (`crop_id`, or drawn uniformly when not given). Draw order is fixed:
    resize target first, then the window.
    """
    if not frames:
        return []
    shape = frames[0].shape
    for f in frames:
        check_frame(f)
        if f.shape != shape:
            raise ValueError(f"frames disagree in shape: {f.shape} vs {shape}")

    if spec.mode == RANDOM_CROP:
        if rng is None:
            raise ValueError("random_crop mode needs a generator")
        target = int(rng.integers(spec.resize_shorter_min, spec.resize_shorter_max + 1))
    else:
        target = spec.resize_shorter_min

    resized = [resize_shorter_side(f, target) for f in frames]
    rh, rw = resized[0].shape[:2]
    size = spec.crop_size

    if spec.mode == RANDOM_CROP:
        top = int(rng.integers(0, rh - size + 1))
        left = int(rng.integers(0, rw - size + 1))
        return [crop(f, top, left, size) for f in resized]
    if spec.mode == CENTER_CROP:
        top, left = (rh - size) // 2, (rw - size) // 2
        return [crop(f, top, left, size) for f in resized]
    # five_crop_flip
    if crop_id is None:
        if rng is None:
            raise ValueError("five_crop_flip mode needs a crop_id or a generator")
        crop_id = TEN_CROP_IDS[int(rng.integers(len(TEN_CROP_IDS)))]
    return [named_crop(f, crop_id, size) for f in resized]
