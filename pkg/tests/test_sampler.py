import numpy as np
import pytest

from chanclip.ingest import TEN_CROP_IDS
from chanclip.sampler import (
    TEST,
    TRAIN,
    SampleSpec,
    dense_indices,
    sparse_indices,
)
from chanclip.sampler import test_clip_plan as clip_plan


def segment_bounds(n, k, s):
    return (s * n) // k, ((s + 1) * n) // k - 1


# ---------------------------------------------------------------------------
# Sparse segment sampling

def test_sparse_test_midpoints():
    assert sparse_indices(30, 3, TEST) == [4, 14, 24]


def test_sparse_singleton_segments():
    for k in (1, 4, 9):
        assert sparse_indices(k, k, TEST) == list(range(k))


def test_sparse_clamps_short_clips():
    assert sparse_indices(2, 4, TEST) == [0, 0, 1, 1]
    assert sparse_indices(1, 5, TEST) == [0, 0, 0, 0, 0]


def test_sparse_arguments_checked():
    with pytest.raises(ValueError):
        sparse_indices(0, 3, TEST)
    with pytest.raises(ValueError):
        sparse_indices(3, 0, TEST)
    with pytest.raises(ValueError):
        sparse_indices(3, 3, "validation")
    with pytest.raises(ValueError):
        sparse_indices(3, 3, TRAIN)  # train requires a generator


def test_sparse_bounds_and_monotonicity():
    rng = np.random.default_rng(0)
    for n in range(1, 65):
        for k in range(1, 33):
            for mode in (TEST, TRAIN):
                for _ in range(3 if mode == TRAIN else 1):
                    idxs = sparse_indices(n, k, mode, rng)
                    assert len(idxs) == k
                    assert all(0 <= i < n for i in idxs)
                    assert all(a <= b for a, b in zip(idxs, idxs[1:]))


def test_sparse_many_seeds_spot_check():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        idxs = sparse_indices(37, 11, TRAIN, rng)
        assert all(0 <= i < 37 for i in idxs)
        assert all(a <= b for a, b in zip(idxs, idxs[1:]))


def test_sparse_train_within_segment():
    rng = np.random.default_rng(1)
    for n in range(1, 33):
        for k in range(1, 33):
            idxs = sparse_indices(n, k, TRAIN, rng)
            for s, idx in enumerate(idxs):
                start, end = segment_bounds(n, k, s)
                if end >= start:
                    assert start <= idx <= end
                else:
                    assert idx == start  # clamped empty segment


def test_sparse_test_mode_ignores_seed():
    a = sparse_indices(23, 7, TEST, np.random.default_rng(0))
    b = sparse_indices(23, 7, TEST, np.random.default_rng(12345))
    c = sparse_indices(23, 7, TEST)
    assert a == b == c


# ---------------------------------------------------------------------------
# Dense sampling

def test_dense_first_and_last_window():
    assert dense_indices(100, 8, 8, 0, 10) == [0, 8, 16, 24, 32, 40, 48, 56]
    assert dense_indices(100, 8, 8, 9, 10) == [43, 51, 59, 67, 75, 83, 91, 99]


def test_dense_single_frame_clamps():
    assert dense_indices(1, 8, 8, 3, 10) == [0] * 8


def test_dense_argument_checks():
    with pytest.raises(ValueError):
        dense_indices(10, 4, 2, 5, 5)
    with pytest.raises(ValueError):
        dense_indices(10, 4, 2, -1, 5)
    with pytest.raises(ValueError):
        dense_indices(0, 4, 2, 0, 1)


def test_dense_window_coverage():
    n, k, stride, clips = 200, 8, 3, 10
    length = (k - 1) * stride + 1
    first = dense_indices(n, k, stride, 0, clips)
    last = dense_indices(n, k, stride, clips - 1, clips)
    assert first[0] == 0
    assert last[-1] >= n - stride
    assert n >= length


def test_dense_single_clip_centers_at_start():
    assert dense_indices(50, 4, 3, 0, 1) == [0, 3, 6, 9]


# ---------------------------------------------------------------------------
# Test-time clip plans

def test_plan_three_by_ten():
    plan = clip_plan(10, "three_crops")
    assert len(plan) == 30
    assert plan[0] == (0, "left")
    assert plan[2] == (0, "right")
    assert plan[3] == (1, "left")


def test_plan_one_center():
    assert clip_plan(1, "one_center") == [(0, "center")]


def test_plan_ten_crops_temporal_major():
    plan = clip_plan(2, "ten_crops")
    assert len(plan) == 20
    assert [p[1] for p in plan[:10]] == list(TEN_CROP_IDS)
    assert all(p[0] == 0 for p in plan[:10])
    assert all(p[0] == 1 for p in plan[10:])


def test_plan_rejects_unknowns():
    with pytest.raises(ValueError):
        clip_plan(0, "one_center")
    with pytest.raises(ValueError):
        clip_plan(3, "sixteen_crops")


def test_sample_spec_validation():
    SampleSpec(t=4, mode=TRAIN, seed=1)
    with pytest.raises(ValueError):
        SampleSpec(t=0)
    with pytest.raises(ValueError):
        SampleSpec(t=2, mode="dev")
