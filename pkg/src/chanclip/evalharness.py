"""Per-frame linear softmax classifier with mean aggregation over frames.

The model is deliberately minimal: one weight matrix applied to pooled pixel
features of each frame, logits averaged over the clip (the classic 2D
segment-network aggregation), trained by plain SGD in float64. Any accuracy
above chance on the synthetic direction task must therefore come from the
channel sampling strategy, not from the architecture.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .channelmap import Strategy, transform_clip
from .ingest import CENTER_CROP, RANDOM_CROP, SpatialSpec, read_manifest
from .sampler import TEST, TRAIN, SampleSpec
from .seeding import derive_rng

POOLED_SIZE = 32
FEATURE_DIM = 3 * POOLED_SIZE * POOLED_SIZE
NUM_CLASSES = 2


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during SGD."""


@dataclass
class LinearModel:
    weights: np.ndarray  # (classes, FEATURE_DIM) float64
    bias: np.ndarray     # (classes,) float64

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("weights must be (classes, dim) with matching bias")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("model parameters must be finite")

    @classmethod
    def zeros(cls, num_classes: int = NUM_CLASSES, feature_dim: int = FEATURE_DIM) -> "LinearModel":
        return cls(np.zeros((num_classes, feature_dim)), np.zeros(num_classes))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 32
    model_frames: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if min(self.epochs, self.batch_size, self.model_frames) < 1:
            raise ValueError("epochs, batch_size and model_frames must be >= 1")


def featurize(clip: np.ndarray) -> np.ndarray:
    """Average-pool each frame to 3 x 32 x 32, scale to [0, 1], flatten.

    Returns (T, FEATURE_DIM) float64; H and W must be multiples of 32.
    """
    if clip.ndim != 4 or clip.shape[1] != 3:
        raise ValueError(f"clip must be [T, 3, H, W], got {clip.shape}")
    t, c, h, w = clip.shape
    if h % POOLED_SIZE or w % POOLED_SIZE:
        raise ValueError(f"H and W must be multiples of {POOLED_SIZE}, got {h}x{w}")
    bh, bw = h // POOLED_SIZE, w // POOLED_SIZE
    pooled = clip.reshape(t, c, POOLED_SIZE, bh, POOLED_SIZE, bw).mean(axis=(3, 5))
    return (pooled / 255.0).reshape(t, c * POOLED_SIZE * POOLED_SIZE)


def aggregate_tsn(per_frame_logits: np.ndarray) -> np.ndarray:
    """Mean of per-frame logits; order-invariant by construction."""
    if per_frame_logits.ndim != 2 or per_frame_logits.shape[0] < 1:
        raise ValueError("expected (T, classes) logits with T >= 1")
    return per_frame_logits.mean(axis=0)


def _aggregated_logits(model: LinearModel, features: np.ndarray) -> np.ndarray:
    # features (B, T, D) -> per-frame logits (B, T, K) -> mean over T
    per_frame = features @ model.weights.T + model.bias
    return per_frame.mean(axis=1)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(
    model: LinearModel, features: np.ndarray, labels: np.ndarray
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Mean softmax cross-entropy over aggregated logits, with exact gradient.

    `features` is (B, T, D), `labels` (B,). The gradient flows through the
    frame average analytically: each frame contributes its feature vector
    scaled by 1/T.
    """
    if features.ndim != 3 or features.shape[0] < 1:
        raise ValueError("expected non-empty (B, T, D) features")
    b, t, _ = features.shape
    logits = _aggregated_logits(model, features)
    probs = _softmax(logits)
    label_probs = probs[np.arange(b), labels]
    loss = float(-np.log(label_probs).mean())
    delta = probs.copy()
    delta[np.arange(b), labels] -= 1.0
    mean_features = features.mean(axis=1)  # (B, D); exact through the frame mean
    grad_w = delta.T @ mean_features / b
    grad_b = delta.mean(axis=0)
    return loss, (grad_w, grad_b)


def default_spatial(mode: str, crop_size: int = 64) -> SpatialSpec:
    """Identity-sized protocol for the 64 x 64 synthetic frames."""
    spatial_mode = RANDOM_CROP if mode == TRAIN else CENTER_CROP
    return SpatialSpec(crop_size, crop_size, crop_size, spatial_mode)


def load_features(
    manifest: str | Path,
    strategy: Strategy,
    t: int,
    mode: str,
    seed: int,
    spatial: SpatialSpec | None,
) -> tuple[np.ndarray, np.ndarray]:
    spatial = spatial or default_spatial(mode)
    spec = SampleSpec(t=t, mode=mode, seed=seed)
    sources = read_manifest(manifest)
    feats = np.empty((len(sources), t, FEATURE_DIM))
    labels = np.empty(len(sources), dtype=np.int64)
    for i, src in enumerate(sources):
        if src.label is None:
            raise ValueError(f"clip {src.id!r} has no label")
        feats[i] = featurize(transform_clip(src, strategy, spec, spatial))
        labels[i] = src.label
    return feats, labels


def train(
    train_manifest: str | Path,
    strategy: Strategy,
    cfg: TrainConfig,
    spatial: SpatialSpec | None = None,
    epoch_hook: Callable[[int, LinearModel, float], None] | None = None,
) -> tuple[LinearModel, float]:
    """SGD with a fixed learning rate; single-threaded, seeded shuffling.

    Returns the model and the full-dataset loss after the final epoch.
    Raises TrainingDivergedError on non-finite loss.
    """
    feats, labels = load_features(train_manifest, strategy, cfg.model_frames, TRAIN, cfg.seed, spatial)
    model = LinearModel.zeros(NUM_CLASSES)
    rng = derive_rng(cfg.seed, "sgd-shuffle")
    n = len(labels)
    epoch_loss = float("nan")
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo:lo + cfg.batch_size]
            loss, (gw, gb) = loss_and_grad(model, feats[idx], labels[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at epoch {epoch}")
            model.weights -= cfg.learning_rate * gw
            model.bias -= cfg.learning_rate * gb
        epoch_loss, _ = loss_and_grad(model, feats, labels)
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(f"non-finite loss at epoch {epoch}")
        if epoch_hook is not None:
            epoch_hook(epoch, model, epoch_loss)
    return model, epoch_loss


def predict(model: LinearModel, features: np.ndarray) -> np.ndarray:
    """Class predictions for (B, T, D) features."""
    return _aggregated_logits(model, features).argmax(axis=1)


def evaluate(
    model: LinearModel,
    test_manifest: str | Path,
    strategy: Strategy,
    t: int,
    spatial: SpatialSpec | None = None,
) -> float:
    """Top-1 accuracy with test-mode sampling and a center crop."""
    feats, labels = load_features(test_manifest, strategy, t, TEST, 0, spatial)
    correct = int((predict(model, feats) == labels).sum())
    return correct / len(labels)


@dataclass(frozen=True)
class EpochRecord:
    strategy: str
    seed: int
    epoch: int
    train_loss: float
    test_accuracy: float


def run_experiment(
    train_manifest: str | Path,
    test_manifest: str | Path,
    strategy: Strategy,
    cfg: TrainConfig,
    spatial_train: SpatialSpec | None = None,
    spatial_test: SpatialSpec | None = None,
) -> list[EpochRecord]:
    """Train once and score every epoch against cached test features."""
    test_feats, test_labels = load_features(
        test_manifest, strategy, cfg.model_frames, TEST, 0, spatial_test
    )
    records: list[EpochRecord] = []

    def hook(epoch: int, model: LinearModel, train_loss: float) -> None:
        acc = int((predict(model, test_feats) == test_labels).sum()) / len(test_labels)
        records.append(EpochRecord(strategy.name, cfg.seed, epoch, train_loss, acc))

    train(train_manifest, strategy, cfg, spatial_train, epoch_hook=hook)
    return records
