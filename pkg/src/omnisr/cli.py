"""Command-line entry point: ``omnisr <subcommand> ...``."""

import argparse
import logging
import os
import sys

import numpy as np

from . import bench, raster
from .erp import ViewportSpec, row_weights
from .imageio import is_supported, load_image, save_image
from .losses import d_360ss, grad_360ss

log = logging.getLogger("omnisr")


def _inputs(path):
    if os.path.isdir(path):
        return [os.path.join(path, n) for n in sorted(os.listdir(path)) if is_supported(n)]
    return [path]


def _out_path(outdir, src):
    stem = os.path.splitext(os.path.basename(src))[0]
    return os.path.join(outdir, stem + ".png")


def cmd_weights(args):
    wm = row_weights(args.height)
    text = "".join(format(float(w), ".17g") + "\n" for w in wm.weights)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _map_images(args, fn):
    os.makedirs(args.out, exist_ok=True)
    status = 0
    for src in _inputs(args.inp):
        try:
            img = load_image(src)
            save_image(fn(img), _out_path(args.out, src), args.bit_depth)
        except (OSError, ValueError) as exc:
            log.error("%s: %s", src, exc)
            status = 1
    return status


def cmd_degrade(args):
    return _map_images(args, lambda img: raster.degrade(img, args.factor, sigma=args.sigma))


def cmd_upsample(args):
    up = raster.upsample_nn if args.method == "nn" else raster.upsample_bicubic
    return _map_images(args, lambda img: up(img, args.factor))


def _size(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None


def cmd_viewport(args):
    spec = ViewportSpec.from_degrees(args.yaw, args.pitch, args.fov, *args.size)
    save_image(raster.render_viewport(load_image(args.inp), spec), args.out, args.bit_depth)
    return 0


def cmd_loss360(args):
    ref = raster.to_luma(load_image(args.ref))
    dist = raster.to_luma(load_image(args.dist))
    d = d_360ss(ref, dist)
    print(f"d_360ss {d:.17g}")
    print(f"loss    {1.0 - d:.17g}")
    if args.grad_out:
        g = grad_360ss(ref, dist)
        peak = float(np.max(np.abs(g)))
        scale = 0.5 / peak if peak > 0 else 1.0
        save_image(0.5 + scale * g, args.grad_out, bit_depth=16)
        # pixel = 0.5 + scale * gradient
        print(f"grad_scale {scale:.17g}")
    return 0


def cmd_evaluate(args):
    manifest = bench.scan_dataset(args.ref)
    report = bench.evaluate_manifest(
        manifest, args.factor, args.method, plane=args.plane,
        external_dir=args.external_dir, sigma=args.sigma, jobs=args.jobs)
    bench.emit_report(report, "csv", args.out)
    for image_id, err in report.errors:
        log.error("not scored: %s (%s)", image_id, err)
    print(f"scored {len(report.rows)}/{len(manifest)} images -> {args.out}")
    return 0 if report.complete else 1


def cmd_report(args):
    reports = [bench.read_report_csv(p) for p in args.inp]
    if args.format == "csv":
        if len(reports) != 1:
            raise SystemExit("csv output takes exactly one input report")
        text = bench.report_csv(reports[0])
    else:
        text = bench.reports_markdown(reports)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


def cmd_crops(args):
    specs = bench.load_views(args.views)
    images = ((os.path.splitext(os.path.basename(p))[0], load_image(p)) for p in _inputs(args.inp))
    written = bench.export_crops(images, specs, args.out)
    print(f"wrote {len(written)} crops to {args.out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="omnisr", description="ERP super-resolution quality toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("weights", help="print ERP row weights")
    s.add_argument("--height", type=int, required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("degrade", help="Gaussian blur + decimation")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--factor", type=int, required=True)
    s.add_argument("--sigma", type=float, default=None, help="default: factor / 2")
    s.add_argument("--out", required=True)
    s.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    s.set_defaults(func=cmd_degrade)

    s = sub.add_parser("upsample", help="nearest-neighbour or bicubic upscaling")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--method", choices=("nn", "bicubic"), required=True)
    s.add_argument("--factor", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    s.set_defaults(func=cmd_upsample)

    s = sub.add_parser("viewport", help="render a rectilinear crop")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--yaw", type=float, default=0.0, help="degrees")
    s.add_argument("--pitch", type=float, default=0.0, help="degrees")
    s.add_argument("--fov", type=float, default=90.0, help="horizontal fov, degrees")
    s.add_argument("--size", type=_size, default=(512, 512), help="WxH")
    s.add_argument("--out", required=True)
    s.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    s.set_defaults(func=cmd_viewport)

    s = sub.add_parser("loss360", help="sphere-weighted SSIM loss of one pair")
    s.add_argument("--ref", required=True)
    s.add_argument("--dist", required=True)
    s.add_argument("--grad-out", default=None, help="write the gradient as a 16-bit PNG")
    s.set_defaults(func=cmd_loss360)

    s = sub.add_parser("evaluate", help="score a reconstruction method over a directory")
    s.add_argument("--ref", required=True)
    s.add_argument("--method", choices=bench.METHODS, required=True)
    s.add_argument("--external-dir", default=None)
    s.add_argument("--factor", type=int, required=True)
    s.add_argument("--sigma", type=float, default=None)
    s.add_argument("--plane", choices=bench.PLANES, default="luma")
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("report", help="render one or more CSV reports")
    s.add_argument("--in", dest="inp", action="append", required=True)
    s.add_argument("--format", choices=("md", "csv"), default="md")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("crops", help="export rectilinear crops for visual comparison")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--views", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_crops)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
