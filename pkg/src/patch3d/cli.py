"""Command-line front end.

Subcommands
    convert          depth RoIs -> patch tensor / point-set dumps + manifest
    mask             depth RoIs -> foreground mask dumps + manifest
    equiv-check      set-function vs grid-function deviation harness
    iou              BEV / 3D IoU (and loss breakdown) between two boxes
    eval             AP tables from prediction and ground-truth label dirs
    ablate-channels  AP grid across the z / xz / xyz / uvz input configs
    report           re-render a result CSV as an aligned text table

Options may also come from a JSON config file (--config); flags given on
the command line win. All randomness flows from --seed.

Exit codes: 0 success; 1 runtime error; 2 usage or input parse error;
3 frame alignment error; 4 equivalence failure.
"""

import argparse
import json
import sys
from pathlib import Path

from .boxes import Box3D, detection_loss, iou_3d, iou_bev, monte_carlo_iou_bev
from .errors import (
    AlignmentError,
    EmptyInputError,
    EmptyRoiError,
    FormatError,
    MalformedCalibrationError,
    ParseError,
)
from .evaluation import evaluate, results_to_rows, route_by_distance, rows_to_csv, rows_to_table
from .kitti import (
    crop_roi,
    load_intrinsics,
    load_label_dir,
    read_depth_map,
    record_to_box,
    record_to_detection,
    record_to_gt,
)
from .patches import (
    ChannelConfig,
    build_patch_tensor,
    dump_patch_tensor,
    dump_pointset,
    make_foreground_mask,
    patch_to_pointset,
    resample_patch,
)
from .setfunc import equivalence_trials

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_ALIGNMENT = 3
EXIT_EQUIVALENCE = 4

EQUIV_TOLERANCE = 1e-6

_CHANNEL_CHOICES = ("z", "xz", "xyz", "uvz")


def _load_config(argv):
    """Peek at --config before building the parser so file values can seed
    the per-flag defaults (command-line flags then win naturally)."""
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
        else:
            continue
        try:
            return json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"config file {path}: {e}") from None
    return {}


def _build_parser(cfg):
    def get(dest, default):
        return cfg.get(dest, default)

    parser = argparse.ArgumentParser(
        prog="patch3d",
        description="Depth-patch geometry and oriented-box evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of flag defaults; flags win")
        p.add_argument("--seed", type=int, default=get("seed", 0))
        p.add_argument("--out", default=get("out", None), help="output path")

    p = sub.add_parser("convert", help="dump patch tensors / point sets per RoI")
    common(p)
    p.add_argument("--depth-dir", default=get("depth_dir", None), required="depth_dir" not in cfg)
    p.add_argument("--label-dir", default=get("label_dir", None), required="label_dir" not in cfg)
    p.add_argument("--calib-dir", default=get("calib_dir", None), required="calib_dir" not in cfg)
    p.add_argument("--calib-key", default=get("calib_key", "P2"))
    p.add_argument("--channels", choices=_CHANNEL_CHOICES, default=get("channels", "xyz"))
    p.add_argument("--patch-size", type=int, default=get("patch_size", 32))
    p.add_argument("--emit", choices=("patch", "points", "both"), default=get("emit", "patch"))
    p.add_argument("--dist-thresholds", nargs=2, type=float, metavar=("NEAR", "FAR"),
                   default=get("dist_thresholds", (30.0, 50.0)))
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("mask", help="dump foreground masks per RoI")
    common(p)
    p.add_argument("--depth-dir", default=get("depth_dir", None), required="depth_dir" not in cfg)
    p.add_argument("--label-dir", default=get("label_dir", None), required="label_dir" not in cfg)
    p.add_argument("--patch-size", type=int, default=get("patch_size", 32))
    p.add_argument("--mask-offset", type=float, default=get("mask_offset", 0.0))
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("equiv-check", help="set-function vs grid-function harness")
    common(p)
    p.add_argument("--trials", type=int, default=get("trials", 100))
    p.add_argument("--patch-size", type=int, default=get("patch_size", 32))
    p.add_argument("--inject-fault", action="store_true",
                   help="negative control: permute weights on the grid path")
    p.add_argument("--depth-dir", default=get("depth_dir", None))
    p.add_argument("--label-dir", default=get("label_dir", None))
    p.add_argument("--calib-dir", default=get("calib_dir", None))
    p.add_argument("--calib-key", default=get("calib_key", "P2"))
    p.add_argument("--channels", choices=_CHANNEL_CHOICES, default=get("channels", "xyz"))
    p.set_defaults(func=cmd_equiv_check)

    p = sub.add_parser("iou", help="IoU and loss breakdown between two boxes")
    common(p)
    p.add_argument("--box-a", nargs=7, type=float, required=True,
                   metavar=("X", "Y", "Z", "H", "W", "L", "THETA"))
    p.add_argument("--box-b", nargs=7, type=float, required=True,
                   metavar=("X", "Y", "Z", "H", "W", "L", "THETA"))
    p.add_argument("--lambda", dest="corner_weight", type=float,
                   default=get("corner_weight", 10.0))
    p.add_argument("--mc-samples", type=int, default=get("mc_samples", 0),
                   help="also print a Monte-Carlo BEV IoU estimate")
    p.set_defaults(func=cmd_iou)

    p = sub.add_parser("eval", help="AP tables from label and prediction dirs")
    common(p)
    p.add_argument("--label-dir", default=get("label_dir", None), required="label_dir" not in cfg)
    p.add_argument("--pred-dir", default=get("pred_dir", None), required="pred_dir" not in cfg)
    p.add_argument("--classes", default=get("classes", "Car"),
                   help="comma-separated class labels")
    p.add_argument("--iou-threshold", type=float, default=get("iou_threshold", 0.7))
    p.add_argument("--metric", choices=("r11", "r40", "both"), default=get("metric", "both"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate-channels", help="AP grid across channel configs")
    common(p)
    p.add_argument("--label-dir", default=get("label_dir", None), required="label_dir" not in cfg)
    p.add_argument("--pred-root", default=get("pred_root", None), required="pred_root" not in cfg,
                   help="directory with one prediction subdir per config (z, xz, xyz, uvz)")
    p.add_argument("--classes", default=get("classes", "Car"))
    p.add_argument("--iou-threshold", type=float, default=get("iou_threshold", 0.7))
    p.add_argument("--metric", choices=("r11", "r40", "both"), default=get("metric", "r11"))
    p.set_defaults(func=cmd_ablate_channels)

    p = sub.add_parser("report", help="render a result CSV as an aligned table")
    common(p)
    p.add_argument("csv", help="CSV produced by the eval subcommand")
    p.set_defaults(func=cmd_report)

    return parser


def cmd_convert(args):
    config = ChannelConfig.from_string(args.channels)
    out_dir = Path(args.out or "converted")
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = load_label_dir(args.label_dir)
    entries, errors = [], []
    for frame in sorted(labels):
        try:
            intr = load_intrinsics(Path(args.calib_dir) / f"{frame}.txt", args.calib_key)
            depth = read_depth_map(Path(args.depth_dir) / f"{frame}.png")
        except (OSError, ParseError, FormatError, MalformedCalibrationError) as e:
            errors.append({"frame": frame, "error": str(e)})
            continue
        for idx, rec in enumerate(labels[frame]):
            if rec.type == "DontCare":
                continue
            try:
                patch = resample_patch(crop_roi(depth, rec.bbox), args.patch_size)
                tensor = build_patch_tensor(patch, intr, config)
            except (EmptyRoiError, EmptyInputError) as e:
                errors.append({"frame": frame, "roi": idx, "error": str(e)})
                continue
            stem = f"{frame}_{idx:03d}_{config.value}"
            files = {}
            if args.emit in ("patch", "both"):
                path = out_dir / f"{stem}.patch"
                path.write_text(dump_patch_tensor(tensor))
                files["patch"] = path.name
            if args.emit in ("points", "both"):
                path = out_dir / f"{stem}.points"
                path.write_text(dump_pointset(patch_to_pointset(tensor)))
                files["points"] = path.name
            entries.append({
                "frame": frame,
                "roi": idx,
                "label": rec.type,
                "bbox": list(rec.bbox),
                "config": config.value,
                "n": tensor.n,
                "head": route_by_distance(record_to_box(rec),
                                          tuple(args.dist_thresholds)),
                "files": files,
            })
    manifest = {
        "channels": config.value,
        "patch_size": args.patch_size,
        "entries": entries,
        "errors": errors,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"converted {len(entries)} RoIs across {len(labels)} frames; "
          f"{len(errors)} errors")
    for err in errors:
        print(f"  skipped: {err}", file=sys.stderr)
    return EXIT_OK


def cmd_mask(args):
    out_dir = Path(args.out or "masks")
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = load_label_dir(args.label_dir)
    entries, errors = [], []
    for frame in sorted(labels):
        try:
            depth = read_depth_map(Path(args.depth_dir) / f"{frame}.png")
        except (OSError, FormatError) as e:
            errors.append({"frame": frame, "error": str(e)})
            continue
        for idx, rec in enumerate(labels[frame]):
            if rec.type == "DontCare":
                continue
            try:
                patch = resample_patch(crop_roi(depth, rec.bbox), args.patch_size)
                mask = make_foreground_mask(patch, args.mask_offset)
            except (EmptyRoiError, EmptyInputError) as e:
                errors.append({"frame": frame, "roi": idx, "error": str(e)})
                continue
            path = out_dir / f"{frame}_{idx:03d}.mask"
            rows = "\n".join("".join("1" if v else "0" for v in row) for row in mask)
            path.write_text(f"mask v1\nn {mask.shape[0]}\n{rows}\n")
            entries.append({
                "frame": frame,
                "roi": idx,
                "foreground_fraction": round(float(mask.mean()), 6),
                "file": path.name,
            })
    manifest = {"mask_offset": args.mask_offset, "patch_size": args.patch_size,
                "entries": entries, "errors": errors}
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    fractions = [e["foreground_fraction"] for e in entries]
    mean_frac = sum(fractions) / len(fractions) if fractions else 0.0
    print(f"masked {len(entries)} RoIs; mean foreground fraction {mean_frac:.3f}; "
          f"{len(errors)} errors")
    return EXIT_OK


def _collect_real_tensors(args, limit=50):
    if not (args.depth_dir and args.label_dir and args.calib_dir):
        return []
    config = ChannelConfig.from_string(args.channels)
    labels = load_label_dir(args.label_dir)
    tensors = []
    for frame in sorted(labels):
        try:
            intr = load_intrinsics(Path(args.calib_dir) / f"{frame}.txt", args.calib_key)
            depth = read_depth_map(Path(args.depth_dir) / f"{frame}.png")
        except (OSError, ParseError, FormatError, MalformedCalibrationError):
            continue
        for rec in labels[frame]:
            if rec.type == "DontCare":
                continue
            try:
                patch = resample_patch(crop_roi(depth, rec.bbox), args.patch_size)
                tensors.append(build_patch_tensor(patch, intr, config))
            except (EmptyRoiError, EmptyInputError):
                continue
            if len(tensors) >= limit:
                return tensors
    return tensors


def cmd_equiv_check(args):
    tensors = _collect_real_tensors(args)
    devs = equivalence_trials(
        trials=args.trials,
        seed=args.seed,
        max_side=args.patch_size,
        inject_fault=args.inject_fault,
        tensors=tensors,
    )
    max_dev = float(devs.max()) if devs.size else 0.0
    ok = max_dev <= EQUIV_TOLERANCE
    report = (
        f"trials {devs.size} (random {args.trials}, real {len(tensors)})\n"
        f"max_abs_deviation {max_dev:.6e}\n"
        f"tolerance {EQUIV_TOLERANCE:.1e}\n"
        f"status {'ok' if ok else 'FAIL'}\n"
    )
    print(report, end="")
    if args.out:
        Path(args.out).write_text(report)
    return EXIT_OK if ok else EXIT_EQUIVALENCE


def cmd_iou(args):
    a = Box3D(*args.box_a)
    b = Box3D(*args.box_b)
    loss = detection_loss(a, b, corner_weight=args.corner_weight)
    lines = [
        f"iou_bev {iou_bev(a, b):.6f}",
        f"iou_3d {iou_3d(a, b):.6f}",
        f"loss_total {loss.total:.6f}",
        f"loss_center {loss.center:.6f}",
        f"loss_size {loss.size:.6f}",
        f"loss_heading {loss.heading:.6f}",
        f"loss_corner {loss.corner:.6f}",
    ]
    if args.mc_samples > 0:
        mc = monte_carlo_iou_bev(a, b, samples=args.mc_samples, seed=args.seed)
        lines.append(f"iou_bev_mc {mc:.6f}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def _load_eval_dirs(label_dir, pred_dir):
    gts = {f: [record_to_gt(r) for r in recs]
           for f, recs in load_label_dir(label_dir).items()}
    dets = {f: [record_to_detection(r) for r in recs]
            for f, recs in load_label_dir(pred_dir).items()}
    return gts, dets


def _print_frame_diff(gts, dets):
    print("frame alignment failure:", file=sys.stderr)
    for frame in sorted(set(gts) - set(dets)):
        print(f"  missing prediction file: {frame}", file=sys.stderr)
    for frame in sorted(set(dets) - set(gts)):
        print(f"  prediction without ground truth: {frame}", file=sys.stderr)


def cmd_eval(args):
    gts, dets = _load_eval_dirs(args.label_dir, args.pred_dir)
    if set(gts) != set(dets):
        _print_frame_diff(gts, dets)
        return EXIT_ALIGNMENT
    metrics = ("r11", "r40") if args.metric == "both" else (args.metric,)
    rows = []
    for label in args.classes.split(","):
        for kind in ("3d", "bev"):
            results = evaluate(dets, gts, label, kind, args.iou_threshold)
            rows.extend(results_to_rows(label, kind, results, metrics))
    print(rows_to_table(rows), end="")
    if args.out:
        Path(args.out).write_text(rows_to_csv(rows))
    return EXIT_OK


def cmd_ablate_channels(args):
    gt_records = load_label_dir(args.label_dir)
    gts = {f: [record_to_gt(r) for r in recs] for f, recs in gt_records.items()}
    label = args.classes.split(",")[0]
    kinds = ("3d", "bev")
    buckets = ("easy", "moderate", "hard")
    metrics = ("r11", "r40") if args.metric == "both" else (args.metric,)

    per_config = {}  # config -> {(kind, bucket, metric): value} or None
    for config in _CHANNEL_CHOICES:
        pred_dir = Path(args.pred_root) / config
        if not pred_dir.is_dir():
            per_config[config] = None
            continue
        try:
            dets = {f: [record_to_detection(r) for r in recs]
                    for f, recs in load_label_dir(pred_dir).items()}
            if set(dets) != set(gts):
                raise AlignmentError("frame sets differ")
            values = {}
            for kind in kinds:
                results = evaluate(dets, gts, label, kind, args.iou_threshold)
                for row in results_to_rows(label, kind, results, metrics):
                    values[(row[1], row[2], row[3])] = row[4]
            per_config[config] = values
        except (ParseError, AlignmentError) as e:
            print(f"  config {config}: {e}", file=sys.stderr)
            per_config[config] = None

    tables = []
    csv_lines = ["input,kind,difficulty,metric,value"]
    for metric in metrics:
        header = ["input"] + [f"{k}_{d}" for k in kinds for d in buckets]
        rows = [tuple(header)]
        for config in _CHANNEL_CHOICES:
            values = per_config[config]
            cells = [config]
            for kind in kinds:
                for bucket in buckets:
                    v = None if values is None else values.get((kind, bucket, metric))
                    cells.append("n/a" if v is None else f"{v:.4f}")
                    csv_lines.append(
                        f"{config},{kind},{bucket},{metric},"
                        + ("n/a" if v is None else f"{v:.6f}"))
            rows.append(tuple(cells))
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = [f"metric {metric}"] if len(metrics) > 1 else []
        for i, row in enumerate(rows):
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        tables.append("\n".join(lines))
    print("\n\n".join(tables))
    if args.out:
        Path(args.out).write_text("\n".join(csv_lines) + "\n")
    return EXIT_OK


def cmd_report(args):
    lines = Path(args.csv).read_text().splitlines()
    if not lines:
        raise ParseError(f"{args.csv}: empty report")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 5:
            raise ParseError(f"{args.csv} line {lineno}: expected 5 columns, "
                             f"got {len(cells)}")
        rows.append(tuple(cells))
    text = rows_to_table(rows)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        cfg = _load_config(argv)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    parser = _build_parser(cfg)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ParseError, FormatError, MalformedCalibrationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except AlignmentError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ALIGNMENT
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
