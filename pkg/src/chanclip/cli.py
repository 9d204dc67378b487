"""Command-line surface: transform | render | synth | eval | bench.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Transform work is
parallel over clips; every clip's generator derives from (seed, clip id), so
outputs are byte-identical for any --threads value (CHANCLIP_THREADS is the
fallback).
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import evalharness, synth
from .channelmap import Strategy, transform_clip
from .ingest import CENTER_CROP, RANDOM_CROP, SpatialSpec, encode_ppm, read_manifest
from .sampler import TEST, TRAIN, SampleSpec
from .seeding import derive_seed
from .tensors import write_tensor

GUTTER = 2  # montage gutter, px

INDEX_NAME = "index.csv"
METRICS_HEADER = "strategy,seed,epoch,train_loss,test_accuracy"


def _strategy(name: str) -> Strategy:
    try:
        return Strategy.parse(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _strategy_list(names: str) -> list[Strategy]:
    return [_strategy(n) for n in names.split(",") if n.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("CHANCLIP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _spatial_from_args(args, mode: str) -> SpatialSpec:
    spatial_mode = RANDOM_CROP if mode == TRAIN else CENTER_CROP
    resize_min = args.resize_min
    resize_max = max(args.resize_max, resize_min) if mode == TRAIN else resize_min
    return SpatialSpec(resize_min, resize_max, args.crop, spatial_mode)


def _add_spatial_flags(parser: argparse.ArgumentParser, resize_min=224, resize_max=336, crop=224):
    parser.add_argument("--resize-min", type=_positive, default=resize_min,
                        help="shorter-side resize lower bound (train) / target (test)")
    parser.add_argument("--resize-max", type=_positive, default=resize_max,
                        help="shorter-side resize upper bound, train mode only")
    parser.add_argument("--crop", type=_positive, default=crop, help="square crop size")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="global seed")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: CHANCLIP_THREADS or 1)")
    common.add_argument("--verbose", action="store_true", help="per-clip progress on stderr")

    parser = argparse.ArgumentParser(prog="chanclip",
                                     description="channel-sampling clip preprocessing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common],
                       help="transform a dataset into .cten clip tensors")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--strategy", type=_strategy, required=True)
    p.add_argument("--frames", type=_positive, required=True, help="model frame count T")
    p.add_argument("--mode", choices=(TRAIN, TEST), default=TEST)
    _add_spatial_flags(p)

    p = sub.add_parser("render", parents=[common],
                       help="render a strategy-by-frame montage of one clip")
    p.add_argument("--manifest", required=True)
    p.add_argument("--clip-id", required=True)
    p.add_argument("--strategies", type=_strategy_list, required=True,
                   help="comma-separated strategy names, one montage row each")
    p.add_argument("--frames", type=_positive, default=8)
    p.add_argument("--out", required=True, help="output PPM path")
    _add_spatial_flags(p)

    p = sub.add_parser("synth", parents=[common], help="generate the synthetic direction dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--per-class", type=_positive, required=True)
    p.add_argument("--frames-per-clip", type=_positive, default=12)
    p.add_argument("--height", type=_positive, default=64)
    p.add_argument("--width", type=_positive, default=64)
    p.add_argument("--object-size", type=_positive, default=8)
    p.add_argument("--object-intensity", type=int, default=200)
    p.add_argument("--noise-max", type=int, default=63)
    p.add_argument("--speeds", type=_int_list, default=[2, 3, 4])
    p = sub.add_parser("eval", parents=[common],
                       help="train + evaluate the linear probe per strategy and seed")
    p.add_argument("--data-dir", required=True,
                   help="directory holding train/ and test/ synthetic datasets")
    p.add_argument("--strategies", type=_strategy_list,
                   default=[Strategy.RGB, Strategy.TC_PLUS2, Strategy.GRAY_ST])
    p.add_argument("--seeds", type=_int_list, default=[0, 1, 2])
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=_positive, default=30)
    p.add_argument("--batch-size", type=_positive, default=32)
    p.add_argument("--frames", type=_positive, default=4)
    p.add_argument("--crop", type=_positive, default=64)
    p.add_argument("--auto-synth", action="store_true",
                   help="generate train/ and test/ when missing")
    p.add_argument("--train-per-class", type=_positive, default=1000)
    p.add_argument("--test-per-class", type=_positive, default=250)
    p.add_argument("--metrics-out", default=None, help="metrics CSV (default: DATA_DIR/metrics.csv)")

    p = sub.add_parser("bench", parents=[common],
                       help="pipeline and pure-gather throughput")
    p.add_argument("--manifest", required=True)
    p.add_argument("--strategy", type=_strategy, required=True)
    p.add_argument("--frames", type=_positive, default=8)
    p.add_argument("--repeat", type=_positive, default=5)
    p.add_argument("--mode", choices=(TRAIN, TEST), default=TEST)
    _add_spatial_flags(p)

    return parser


def cmd_transform(args) -> int:
    sources = read_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = SampleSpec(t=args.frames, mode=args.mode, seed=args.seed)
    spatial = _spatial_from_args(args, args.mode)
    threads = _resolve_threads(args.threads)

    def one(src):
        clip = transform_clip(src, args.strategy, spec, spatial)
        buf = io.BytesIO()
        write_tensor(clip, buf)
        return buf.getvalue()

    written: list[Path] = []
    failures: list[tuple[str, Exception]] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for src, result in zip(sources, pool.map(lambda s: _try(one, s), sources)):
            if isinstance(result, Exception):
                failures.append((src.id, result))
                continue
            path = out_dir / f"{src.id}.cten"
            path.write_bytes(result)
            written.append(path)
            if args.verbose:
                print(f"transformed {src.id} -> {path}", file=sys.stderr)

    if failures:
        for clip_id, exc in failures:
            print(f"error: clip {clip_id}: {exc}", file=sys.stderr)
        for path in written:
            path.unlink(missing_ok=True)
        return 1

    lines = ["clip_id,label,path"]
    for src in sources:
        label = "" if src.label is None else str(src.label)
        lines.append(f"{src.id},{label},{src.id}.cten")
    (out_dir / INDEX_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _try(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:  # noqa: BLE001 - per-clip failures are reported, not fatal
        return exc


def cmd_render(args) -> int:
    sources = {s.id: s for s in read_manifest(args.manifest)}
    if args.clip_id not in sources:
        raise KeyError(f"clip {args.clip_id!r} not in manifest")
    src = sources[args.clip_id]
    spec = SampleSpec(t=args.frames, mode=TEST, seed=args.seed)
    spatial = _spatial_from_args(args, TEST)

    rows = []
    for strategy in args.strategies:
        clip = transform_clip(src, strategy, spec, spatial)
        rows.append([np.ascontiguousarray(frame.transpose(1, 2, 0)) for frame in clip])

    th, tw = rows[0][0].shape[:2]
    n_rows, n_cols = len(rows), args.frames
    height = n_rows * th + (n_rows - 1) * GUTTER
    width = n_cols * tw + (n_cols - 1) * GUTTER
    montage = np.zeros((height, width, 3), dtype=np.uint8)
    for r, tiles in enumerate(rows):
        for c, tile in enumerate(tiles):
            y = r * (th + GUTTER)
            x = c * (tw + GUTTER)
            montage[y:y + th, x:x + tw] = tile
    Path(args.out).write_bytes(encode_ppm(montage))
    if args.verbose:
        print(f"montage {height}x{width} -> {args.out}", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        frames_per_clip=args.frames_per_clip,
        height=args.height,
        width=args.width,
        object_size=args.object_size,
        object_intensity=args.object_intensity,
        noise_max=args.noise_max,
        speeds=tuple(args.speeds),
        seed=args.seed,
    )
    manifest = synth.generate_dataset(cfg, args.per_class, args.out_dir)
    print(manifest)
    return 0


def _ensure_synth_split(args, name: str, per_class: int) -> Path:
    root = Path(args.data_dir) / name
    manifest = root / synth.MANIFEST_NAME
    if manifest.exists():
        return manifest
    if not args.auto_synth:
        raise FileNotFoundError(f"{manifest} missing; run `chanclip synth` or pass --auto-synth")
    cfg = synth.SynthConfig(seed=derive_seed(args.seed, f"synth-{name}"))
    return synth.generate_dataset(cfg, per_class, root)


def cmd_eval(args) -> int:
    train_manifest = _ensure_synth_split(args, "train", args.train_per_class)
    test_manifest = _ensure_synth_split(args, "test", args.test_per_class)
    metrics_path = Path(args.metrics_out) if args.metrics_out else Path(args.data_dir) / "metrics.csv"
    threads = _resolve_threads(args.threads)

    grid = [(strategy, seed) for strategy in args.strategies for seed in args.seeds]

    def one(job):
        strategy, seed = job
        cfg = evalharness.TrainConfig(
            learning_rate=args.lr,
            epochs=args.epochs,
            batch_size=args.batch_size,
            model_frames=args.frames,
            seed=seed,
        )
        spatial_train = evalharness.default_spatial(TRAIN, args.crop)
        spatial_test = evalharness.default_spatial(TEST, args.crop)
        test_feats, test_labels = evalharness.load_features(
            test_manifest, strategy, cfg.model_frames, TEST, 0, spatial_test
        )
        records = []

        def hook(epoch, model, train_loss):
            acc = int((evalharness.predict(model, test_feats) == test_labels).sum()) / len(test_labels)
            records.append(evalharness.EpochRecord(strategy.name, seed, epoch, train_loss, acc))

        try:
            evalharness.train(train_manifest, strategy, cfg, spatial_train, epoch_hook=hook)
        except evalharness.TrainingDivergedError as exc:
            return records, exc
        return records, None

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(one, grid))

    lines = [METRICS_HEADER]
    finals: dict[str, list[float]] = {}
    failed = False
    for (strategy, seed), (records, error) in zip(grid, results):
        for rec in records:
            lines.append(
                f"{rec.strategy},{rec.seed},{rec.epoch},{rec.train_loss:.12g},{rec.test_accuracy:.12g}"
            )
        if error is not None:
            failed = True
            print(f"error: {strategy.name} seed {seed}: {error}", file=sys.stderr)
        elif records:
            finals.setdefault(strategy.name, []).append(records[-1].test_accuracy)
    metrics_path.parent.mkdir(parents=True, exist_ok=True)
    metrics_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    summary = sorted(
        ((name, float(np.mean(accs))) for name, accs in finals.items()),
        key=lambda kv: kv[1],
        reverse=True,
    )
    print(f"{'strategy':<14}{'mean_accuracy':>14}")
    for name, acc in summary:
        print(f"{name:<14}{acc:>14.4f}")
    print(f"metrics written to {metrics_path}")
    return 1 if failed else 0


def cmd_bench(args) -> int:
    sources = read_manifest(args.manifest)
    spec = SampleSpec(t=args.frames, mode=args.mode, seed=args.seed)
    spatial = _spatial_from_args(args, args.mode)

    pipe = bench_mod.bench_pipeline(sources, args.strategy, spec, spatial, repeat=args.repeat)
    out_bytes = args.frames * 3 * args.crop * args.crop
    print(f"pipeline [{args.strategy.name}] {pipe.clips_per_s:.1f} clips/s "
          f"{pipe.output_mb_per_s:.1f} MB/s ({out_bytes} output bytes/clip)")

    gather = bench_mod.bench_gather(args.strategy, args.frames, args.crop, args.crop,
                                    repeat=args.repeat, seed=args.seed)
    print(f"gather   [{args.strategy.name}] {gather.gather_mb_per_s:.0f} MB/s "
          f"vs raw copy {gather.copy_mb_per_s:.0f} MB/s (ratio {gather.ratio:.2f})")
    return 0


_COMMANDS = {
    "transform": cmd_transform,
    "render": cmd_render,
    "synth": cmd_synth,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
