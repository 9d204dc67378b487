import numpy as np
import pytest

from chanclip.channelmap import (
    GRAYSCALE_STRATEGIES,
    ChannelIndexMap,
    Strategy,
    UnsupportedStrategyError,
    apply,
    build_index_map,
    gather_reference,
    required_source_frames,
    transform_clip,
)
from chanclip.ingest import CENTER_CROP, SpatialSpec, read_frame, write_frame
from chanclip.sampler import TEST, SampleSpec

ALL_STRATEGIES = list(Strategy)


def min_t(strategy):
    return 5 if strategy is Strategy.TC_SHORTLONG else 1


# ---------------------------------------------------------------------------
# Independent oracle: expected (source frame, channel) pairs straight from the
# defining equations, 1-based, structured as literal per-slot formulas.

def oracle_entries(strategy, t):
    """(frame, channel) 1-based pairs per output frame and slot."""
    def cyc(i):
        return {1: "R", 2: "G", 0: "B"}[i % 3]

    chan_num = {"R": 0, "G": 1, "B": 2, "g": 0}
    rows = []
    for i in range(1, t + 1):
        c = cyc(i)
        if strategy is Strategy.RGB:
            row = [(i, "R"), (i, "G"), (i, "B")]
        elif strategy is Strategy.TC:
            row = [(i, c), (i + 1 if i + 1 <= t else t, c), (i + 2 if i + 2 <= t else t, c)]
        elif strategy is Strategy.TC_PLUS2:
            row = [(i, c), (i + 1, c), (i + 2, c)]
        elif strategy is Strategy.TC_RGB:
            row = [(i, "R"), (min(i + 1, t), "G"), (min(i + 2, t), "B")]
        elif strategy is Strategy.TC_RED:
            row = [(i, "R"), (min(i + 1, t), "R"), (min(i + 2, t), "R")]
        elif strategy is Strategy.TC_SHORTLONG:
            if i == t - 1:
                row = [(max(t - 5, 1), c), (t - 3, c), (t - 1, c)]
            elif i == t:
                row = [(t - 4, c), (t - 2, c), (t, c)]
            else:
                row = [(i, c), (i + 1, c), (i + 2, c)]
        elif strategy is Strategy.GRAY_ST:
            row = [(3 * i - 2, "g"), (3 * i - 1, "g"), (3 * i, "g")]
        elif strategy is Strategy.GRAY_ONLY:
            row = [(i, "g"), (i, "g"), (i, "g")]
        rows.append([(f, chan_num[ch]) for f, ch in row])
    return rows


def oracle_gather(strategy, t, frames):
    """Pixel-by-pixel gather from the oracle entries; no shared code paths."""
    h, w = frames[0].shape[:2]
    out = np.zeros((t, 3, h, w), dtype=np.uint8)
    for i, row in enumerate(oracle_entries(strategy, t)):
        for slot, (f1, ch) in enumerate(row):
            for y in range(h):
                for x in range(w):
                    out[i, slot, y, x] = frames[f1 - 1][y, x, ch]
    return out


def make_frames(strategy, t, h=4, w=4, seed=0):
    n = required_source_frames(strategy, t)
    c = 1 if strategy in GRAYSCALE_STRATEGIES else 3
    rng = np.random.default_rng(seed)
    return [rng.integers(0, 256, size=(h, w, c)).astype(np.uint8) for _ in range(n)]


# ---------------------------------------------------------------------------
# Source-frame accounting

def test_required_source_frames():
    assert required_source_frames(Strategy.GRAY_ST, 8) == 24
    assert required_source_frames(Strategy.TC_PLUS2, 8) == 10
    assert required_source_frames(Strategy.RGB, 1) == 1
    for s in (Strategy.TC, Strategy.TC_RGB, Strategy.TC_RED, Strategy.GRAY_ONLY):
        assert required_source_frames(s, 7) == 7
    assert required_source_frames(Strategy.TC_SHORTLONG, 9) == 9


# ---------------------------------------------------------------------------
# Boundary rules from the defining equations

def test_tc_clamps_final_frames():
    m = build_index_map(Strategy.TC, 8)
    assert m.source_frames[6].tolist() == [6, 7, 7]   # frame 7 = (R7, R8, R8)
    assert m.source_channels[6].tolist() == [0, 0, 0]
    assert m.source_frames[7].tolist() == [7, 7, 7]   # frame 8 = (G8, G8, G8)
    assert m.source_channels[7].tolist() == [1, 1, 1]


def test_tc_shortlong_lookback():
    m = build_index_map(Strategy.TC_SHORTLONG, 8)
    assert m.source_frames[6].tolist() == [2, 4, 6]   # frame 7 = (R3, R5, R7)
    assert m.source_channels[6].tolist() == [0, 0, 0]
    assert m.source_frames[7].tolist() == [3, 5, 7]   # frame 8 = (G4, G6, G8)
    assert m.source_channels[7].tolist() == [1, 1, 1]


def test_grayst_triplets():
    m = build_index_map(Strategy.GRAY_ST, 3)
    assert m.source_frames[1].tolist() == [3, 4, 5]   # frame 2 = (g4, g5, g6)
    assert m.source_frame_count == 9
    assert m.source_is_grayscale


def test_tc_single_frame_all_clamped():
    m = build_index_map(Strategy.TC, 1)
    assert m.source_frames[0].tolist() == [0, 0, 0]
    assert m.source_channels[0].tolist() == [0, 0, 0]


def test_tc_shortlong_needs_five_frames():
    with pytest.raises(UnsupportedStrategyError):
        build_index_map(Strategy.TC_SHORTLONG, 4)
    build_index_map(Strategy.TC_SHORTLONG, 5)


def test_maps_match_oracle_entries():
    for strategy in ALL_STRATEGIES:
        for t in range(min_t(strategy), 13):
            m = build_index_map(strategy, t)
            expected = oracle_entries(strategy, t)
            for i in range(t):
                got = list(zip((m.source_frames[i] + 1).tolist(), m.source_channels[i].tolist()))
                assert got == expected[i], (strategy, t, i)


# ---------------------------------------------------------------------------
# Structural invariants

def test_color_cycle_period_three():
    m = build_index_map(Strategy.TC, 12)
    cycle = m.source_channels[:, 0].tolist()
    assert cycle == [0, 1, 2] * 4


def test_tc_and_tc_plus2_agree_before_the_boundary():
    t = 9
    tc = build_index_map(Strategy.TC, t)
    plus = build_index_map(Strategy.TC_PLUS2, t)
    assert np.array_equal(tc.source_frames[: t - 2], plus.source_frames[: t - 2])
    assert np.array_equal(tc.source_channels, plus.source_channels)
    assert not np.array_equal(tc.source_frames[t - 2:], plus.source_frames[t - 2:])


def test_monotone_time_within_each_output_frame():
    for strategy in ALL_STRATEGIES:
        for t in range(min_t(strategy), 17):
            m = build_index_map(strategy, t)
            assert (np.diff(m.source_frames, axis=1) >= 0).all(), (strategy, t)


def test_index_map_validation():
    with pytest.raises(ValueError):
        ChannelIndexMap(
            t_out=1,
            source_frames=np.array([[0, 0, 5]]),
            source_channels=np.zeros((1, 3), dtype=np.int64),
            source_is_grayscale=False,
            source_frame_count=2,
        )


# ---------------------------------------------------------------------------
# apply(): gather fidelity

@pytest.mark.parametrize("h,w", [(4, 4), (5, 3), (4, 6), (3, 7)])
def test_apply_matches_pixelwise_oracle(h, w):
    for strategy in ALL_STRATEGIES:
        t = 5 if strategy is Strategy.TC_SHORTLONG else 4
        frames = make_frames(strategy, t, h, w, seed=hash(strategy.name) % 1000)
        got = apply(build_index_map(strategy, t), frames)
        assert got.shape == (t, 3, h, w)
        assert np.array_equal(got, oracle_gather(strategy, t, frames)), strategy


def test_apply_agrees_with_numpy_reference_on_many_shapes():
    rng = np.random.default_rng(42)
    for _ in range(20):
        strategy = ALL_STRATEGIES[int(rng.integers(len(ALL_STRATEGIES)))]
        t = int(rng.integers(min_t(strategy), 9))
        h, w = int(rng.integers(1, 13)), int(rng.integers(1, 13))
        frames = make_frames(strategy, t, h, w, seed=int(rng.integers(1 << 30)))
        m = build_index_map(strategy, t)
        assert np.array_equal(apply(m, frames), gather_reference(m, frames))


def test_apply_static_video_collapse():
    rng = np.random.default_rng(3)
    still_rgb = rng.integers(0, 256, size=(4, 4, 3)).astype(np.uint8)
    for strategy in (Strategy.TC, Strategy.TC_PLUS2, Strategy.TC_RED, Strategy.TC_SHORTLONG):
        t = 6
        n = required_source_frames(strategy, t)
        clip = apply(build_index_map(strategy, t), [still_rgb.copy() for _ in range(n)])
        for i in range(t):
            expected_channel = 0 if strategy is Strategy.TC_RED else [0, 1, 2][i % 3]
            for k in range(3):
                assert np.array_equal(clip[i, k], still_rgb[:, :, expected_channel])

    still_gray = rng.integers(0, 256, size=(4, 4, 1)).astype(np.uint8)
    t = 4
    gst = apply(build_index_map(Strategy.GRAY_ST, t), [still_gray.copy() for _ in range(3 * t)])
    go = apply(build_index_map(Strategy.GRAY_ONLY, t), [still_gray.copy() for _ in range(t)])
    assert np.array_equal(gst, go)


def test_apply_value_tagging_purity():
    # fill every (frame, channel) plane with a unique constant and verify the
    # output carries exactly the constants the map dictates
    for strategy in ALL_STRATEGIES:
        t = 6 if strategy is Strategy.TC_SHORTLONG else 5
        n = required_source_frames(strategy, t)
        c = 1 if strategy in GRAYSCALE_STRATEGIES else 3
        frames = []
        for f in range(n):
            frame = np.empty((3, 4, c), dtype=np.uint8)
            for ch in range(c):
                frame[:, :, ch] = (f * 3 + ch) % 251
            frames.append(frame)
        m = build_index_map(strategy, t)
        clip = apply(m, frames)
        for i in range(t):
            for k in range(3):
                tag = (int(m.source_frames[i, k]) * 3 + int(m.source_channels[i, k])) % 251
                assert (clip[i, k] == tag).all(), (strategy, i, k)


def test_apply_rejects_mismatches():
    m = build_index_map(Strategy.TC, 4)
    frames = make_frames(Strategy.TC, 4)
    with pytest.raises(ValueError, match="source frames"):
        apply(m, frames[:-1])
    bad = [f.copy() for f in frames]
    bad[2] = bad[2][:, :, :1]
    with pytest.raises(ValueError):
        apply(m, bad)
    gray = build_index_map(Strategy.GRAY_ONLY, 4)
    with pytest.raises(ValueError, match="1-channel"):
        apply(gray, frames)


# ---------------------------------------------------------------------------
# transform_clip(): the composed pipeline

def write_clip_dir(tmp_path, frames, name="clip0"):
    d = tmp_path / name
    d.mkdir()
    for j, f in enumerate(frames):
        write_frame(d / f"{j:06d}.ppm", f)
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(f"{name},{name},0\n")
    return manifest


def test_transform_rgb_identity(tmp_path):
    rng = np.random.default_rng(5)
    frames = [rng.integers(0, 256, size=(32, 32, 3)).astype(np.uint8) for _ in range(4)]
    from chanclip.ingest import read_manifest

    manifest = write_clip_dir(tmp_path, frames)
    src = read_manifest(manifest)[0]
    spec = SampleSpec(t=4, mode=TEST, seed=0)
    spatial = SpatialSpec(32, 32, 32, CENTER_CROP)
    clip = transform_clip(src, Strategy.RGB, spec, spatial)
    for i in range(4):
        assert np.array_equal(clip[i].transpose(1, 2, 0), frames[i])


def test_transform_deterministic(tmp_path):
    rng = np.random.default_rng(6)
    frames = [rng.integers(0, 256, size=(40, 48, 3)).astype(np.uint8) for _ in range(12)]
    from chanclip.ingest import RANDOM_CROP, read_manifest

    manifest = write_clip_dir(tmp_path, frames)
    src = read_manifest(manifest)[0]
    spec = SampleSpec(t=4, mode="train", seed=77)
    spatial = SpatialSpec(32, 40, 24, RANDOM_CROP)
    a = transform_clip(src, Strategy.TC_PLUS2, spec, spatial)
    b = transform_clip(src, Strategy.TC_PLUS2, spec, spatial)
    assert np.array_equal(a, b)
    other = transform_clip(src, Strategy.TC_PLUS2, SampleSpec(t=4, mode="train", seed=78), spatial)
    assert not np.array_equal(a, other)


def test_transform_grayst_consumes_triple_frames(tmp_path, monkeypatch):
    rng = np.random.default_rng(7)
    frames = [rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8) for _ in range(24)]
    from chanclip import channelmap
    from chanclip.ingest import read_manifest

    manifest = write_clip_dir(tmp_path, frames)
    src = read_manifest(manifest)[0]

    seen = []
    real = channelmap.read_frame
    monkeypatch.setattr(channelmap, "read_frame", lambda p: (seen.append(p), real(p))[1])
    spec = SampleSpec(t=8, mode=TEST, seed=0)
    clip = transform_clip(src, Strategy.GRAY_ST, spec, SpatialSpec(16, 16, 16, CENTER_CROP))
    assert clip.shape == (8, 3, 16, 16)
    assert len(seen) == 24  # n = k = 24: every sampled source frame decoded once


def test_transform_shape_always_t_3(tmp_path):
    rng = np.random.default_rng(8)
    frames = [rng.integers(0, 256, size=(20, 20, 3)).astype(np.uint8) for _ in range(6)]
    from chanclip.ingest import read_manifest

    manifest = write_clip_dir(tmp_path, frames)
    src = read_manifest(manifest)[0]
    spatial = SpatialSpec(16, 16, 16, CENTER_CROP)
    for strategy in ALL_STRATEGIES:
        t = 5 if strategy is Strategy.TC_SHORTLONG else 3
        clip = transform_clip(src, strategy, SampleSpec(t=t, mode=TEST, seed=0), spatial)
        assert clip.shape == (t, 3, 16, 16)
        assert clip.dtype == np.uint8
