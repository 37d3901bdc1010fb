"""Command-line interface: ``wvfi {interpolate,decompose,verify,bench,init-weights}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import engine, losses, verify
from .config import DEFAULT_CANDIDATES, ETA_GRID, EngineConfig
from .imageio import ImageFormatError, load_image, save_image
from .motion import mpnet_forward
from .synthesis import encode_context, wsnet_reconstruct
from .wavelet import decompose
from .weights import WeightFileError, init_weights, load_weights, save_weights

log = logging.getLogger("wvfi")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _weights(args):
    if getattr(args, "weights", None):
        return load_weights(args.weights)
    return init_weights(seed=args.seed)


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def cmd_interpolate(args) -> int:
    i0, i1 = load_image(args.frame0), load_image(args.frame1)
    config = EngineConfig(dynamic=args.dynamic, eta=args.eta, seed=args.seed)
    out = engine.run(i0, i1, load_weights(args.weights), config)
    save_image(out.frame, args.out)
    rep = engine.report(out)
    log.info("eta %.4f, flops %d, densities %s", rep["eta_used"], rep["flops"], rep["mask_density"])
    if args.report:
        _write_json(args.report, rep)
    return 0


def _band_image(band: np.ndarray, level: int, detail: bool) -> np.ndarray:
    scale = float(1 << level)
    return np.clip(0.5 + band / scale if detail else band / scale, 0.0, 1.0)


def cmd_decompose(args) -> int:
    image = engine.pad_to_multiple(load_image(args.image), 1 << args.levels)
    pyramid = decompose(image, args.levels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for l, band in enumerate(pyramid.levels, start=1):
        for name, data in zip(("ll", "lh", "hl", "hh"), band.bands()):
            save_image(_band_image(data, l, name != "ll"), out_dir / f"level{l}_{name}.png")
    log.info("wrote %d coefficient images to %s", 4 * args.levels, out_dir)
    return 0


def cmd_verify(args) -> int:
    return 0 if verify.run_checks(seed=args.seed) else 1


def bench_triplet(i0, i1, gt, weights, etas) -> list[dict]:
    _, h, w = i0.shape
    p0, p1 = engine.pad_to_multiple(i0), engine.pad_to_multiple(i1)
    motion, _ = mpnet_forward(p0, p1, weights)
    ctx = encode_context(p0, p1, motion, weights)
    rows = []
    for eta in etas:
        res = wsnet_reconstruct(ctx, eta, weights)
        frame = res.frame[:, :h, :w]
        rows.append(
            {
                "eta": eta,
                "psnr": losses.psnr(np.clip(frame, 0, 1), gt),
                "ssim": losses.ssim(np.clip(frame, 0, 1), gt),
                "flops": res.flops,
                "mask_density": {str(l): d for l, d in res.densities().items()},
            }
        )
    return rows


def cmd_bench(args) -> int:
    root = Path(args.dir)
    samples = sorted(p for p in root.iterdir() if p.is_dir())
    if not samples:
        raise FileNotFoundError(f"no triplet directories under {root}")
    weights = _weights(args)
    per_sample = {}
    for sample in samples:
        frames = [load_image(sample / f) for f in ("frame0.png", "frame1.png", "gt.png")]
        per_sample[sample.name] = bench_triplet(*frames, weights, args.etas)
        for row in per_sample[sample.name]:
            print(
                f"{sample.name:<20} eta={row['eta']:.4f} psnr={row['psnr']:7.3f} "
                f"ssim={row['ssim']:.4f} gflops={row['flops'] / 1e9:8.3f}"
            )
    aggregate = []
    for i, eta in enumerate(args.etas):
        rows = [r[i] for r in per_sample.values()]
        aggregate.append(
            {
                "eta": eta,
                "psnr": float(np.mean([r["psnr"] for r in rows])),
                "ssim": float(np.mean([r["ssim"] for r in rows])),
                "flops": float(np.mean([r["flops"] for r in rows])),
            }
        )
    base = aggregate[0]["flops"]
    for row in aggregate:
        row["relative_flops"] = row["flops"] / base if base else 0.0
        print(
            f"{'mean':<20} eta={row['eta']:.4f} psnr={row['psnr']:7.3f} "
            f"ssim={row['ssim']:.4f} relative flops={row['relative_flops']:.3f}"
        )
    if args.report:
        _write_json(args.report, {"etas": args.etas, "samples": per_sample, "aggregate": aggregate})
    return 0


def cmd_init_weights(args) -> int:
    save_weights(init_weights(seed=args.seed), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wvfi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interpolate", help="synthesise the middle frame of two inputs")
    p.add_argument("--frame0", required=True)
    p.add_argument("--frame1", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--eta", type=float, default=0.0, help="fixed threshold ratio")
    mode.add_argument("--dynamic", action="store_true", help="let the classifier choose among %s" % (DEFAULT_CANDIDATES,))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write a JSON report here")
    p.set_defaults(fn=cmd_interpolate)

    p = sub.add_parser("decompose", help="write per-level Haar coefficient images")
    p.add_argument("--image", required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("verify", help="run the built-in property checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="PSNR/SSIM/FLOPs over a threshold sweep")
    p.add_argument("--dir", required=True, help="directory of <name>/{frame0,frame1,gt}.png triplets")
    p.add_argument("--etas", type=_float_list, default=list(ETA_GRID))
    p.add_argument("--weights")
    p.add_argument("--seed", type=int, default=0, help="weight seed when --weights is absent")
    p.add_argument("--report")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("init-weights", help="write seeded initial weights")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_init_weights)
    return parser


def run_cli(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("WVFI_LOG", "WARNING").upper(),
        format="%(levelname)s %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ImageFormatError, WeightFileError, ValueError, OSError) as exc:
        print(f"wvfi {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
