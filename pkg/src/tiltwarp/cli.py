"""Command-line surface.

Subcommands: gen-dataset, correct, evaluate, bench, serve.  Exit codes:
0 success, 1 usage error, 2 data error, 3 internal error.  Files are
written to a ``.partial`` path and renamed on completion, so a crash never
leaves a truncated output under the final name.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time

import numpy as np

from .config import Config, parse_mesh_spec, parse_size_spec
from .errors import DataError
from .flow import read_flow, upsample_flow
from .image import Image, load_image, save_image
from .mesh import read_mesh, rotation_mesh_pair
from .metrics import psnr, ssim
from .pipeline import correct_image_timed
from .synth import generate_dataset, read_manifest
from .warp import Boundary, backward_warp, mesh_to_flow

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

IMAGE_EXTS = (".png", ".jpg", ".jpeg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mesh", default="8x6", metavar="UxV", help="mesh cells across width x height (default 8x6)")
    p.add_argument("--work-res", default="512x384", metavar="WxH", help="working resolution (default 512x384)")
    p.add_argument("--boundary", choices=("zero", "clamp"), default="zero", help="out-of-range sampling policy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0, help="kernel threads (0 = all cores)")
    p.add_argument("--format", choices=("png",), default="png", help="output image format")


def _config_from(args) -> Config:
    cols, rows = parse_mesh_spec(args.mesh)
    ww, wh = parse_size_spec(args.work_res)
    return Config(
        mesh_cols=cols,
        mesh_rows=rows,
        work_width=ww,
        work_height=wh,
        boundary=Boundary.CLAMP if args.boundary == "clamp" else Boundary.CONSTANT,
        seed=args.seed,
        threads=args.threads or None,
    )


def _atomic_save(img: Image, path: str) -> None:
    tmp = path + ".partial"
    save_image(img, tmp)
    os.replace(tmp, path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tiltwarp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="synthesize a tilt dataset from horizontal images")
    p.add_argument("src_dir")
    p.add_argument("out_dir")
    _add_common(p)

    p = sub.add_parser("correct", help="correct one image with a mesh or flow file")
    p.add_argument("input")
    p.add_argument("warp_file", help="correction mesh (text) or flow (TWFL binary), sniffed by content")
    p.add_argument("output")
    _add_common(p)

    p = sub.add_parser("evaluate", help="PSNR/SSIM of predictions against manifest labels")
    p.add_argument("manifest")
    p.add_argument("predictions_dir")
    p.add_argument("--split", choices=("test", "train", "all"), default="test")
    _add_common(p)

    p = sub.add_parser("bench", help="time the correction stages over image sizes")
    p.add_argument("--sizes", default="512x384,1024x768,1536x1152,2048x1536")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--angle", type=float, default=5.4)
    _add_common(p)

    p = sub.add_parser("serve", help="run the interactive mesh-correction service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--data-dir", default=".", help="directory for session exports")
    p.add_argument("--ui-dir", default=None, help="optional static frontend to serve at /")
    _add_common(p)

    return parser


def cmd_gen_dataset(args) -> int:
    cfg = _config_from(args)
    cfg.apply_threads()
    if not os.path.isdir(args.src_dir):
        raise DataError(f"source directory not found: {args.src_dir}")
    sources = sorted(
        os.path.join(args.src_dir, name)
        for name in os.listdir(args.src_dir)
        if name.lower().endswith(IMAGE_EXTS)
    )
    if not sources:
        raise DataError(f"no images in {args.src_dir}")
    records = generate_dataset(
        sources,
        args.out_dir,
        seed=cfg.seed,
        cols=cfg.mesh_cols,
        rows=cfg.mesh_rows,
        width=cfg.work_width,
        height=cfg.work_height,
    )
    n_test = sum(1 for r in records if r.split == "test")
    print(f"wrote {len(records)} records ({len(records) - n_test} train / {n_test} test) to {args.out_dir}")
    return EXIT_OK


def _load_warp_file(path: str):
    """Sniff a warp file: TWFL magic means flow, the mesh header means mesh."""
    try:
        with open(path, "rb") as f:
            head = f.read(16)
    except FileNotFoundError:
        raise DataError(f"no such warp file: {path}") from None
    if head.startswith(b"TWFL"):
        return None, read_flow(path)
    if head.startswith(b"tiltwarp-mesh"):
        return read_mesh(path), None
    raise DataError(f"unrecognized warp file (want a mesh or TWFL flow): {path}")


def cmd_correct(args) -> int:
    cfg = _config_from(args)
    cfg.apply_threads()
    source = load_image(args.input)
    mesh, flow = _load_warp_file(args.warp_file)
    corrected, times = correct_image_timed(source, mesh=mesh, flow=flow, boundary=cfg.boundary, fill=cfg.fill)
    _atomic_save(corrected, args.output)
    print(
        f"corrected {source.width}x{source.height} in {times.total_s * 1000:.1f} ms "
        f"(downsample {times.downsample_s * 1000:.1f}, flow {times.mesh_to_flow_s * 1000:.1f}, "
        f"upsample {times.upsample_s * 1000:.1f}, warp {times.warp_s * 1000:.1f})"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    records = read_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    if args.split != "all":
        records = [r for r in records if r.split == args.split]
    if not records:
        raise DataError(f"no {args.split} records in manifest")
    missing = []
    rows = []
    for r in records:
        pred_path = os.path.join(args.predictions_dir, os.path.basename(r.input_path))
        if not os.path.exists(pred_path):
            missing.append(r.input_path)
            continue
        pred = load_image(pred_path)
        label = load_image(os.path.join(base, r.label_path))
        rows.append((os.path.basename(r.input_path), psnr(pred, label), ssim(pred, label)))
    if missing:
        raise DataError("missing predictions for: " + ", ".join(missing))
    print(f"{'image':40s} {'psnr_db':>10s} {'ssim':>8s}")
    for name, p, s in rows:
        print(f"{name:40s} {p:10.4f} {s:8.4f}")
    mp = float(np.mean([p for _, p, _ in rows]))
    ms = float(np.mean([s for _, _, s in rows]))
    print(f"{'mean(' + str(len(rows)) + ')':40s} {mp:10.4f} {ms:8.4f}")
    return EXIT_OK


def bench_stages(width: int, height: int, cfg: Config, angle: float, runs: int) -> dict:
    """Median stage times (seconds) at one size; first run warms the kernels."""
    rng = np.random.default_rng(cfg.seed)
    img = Image((rng.random((height, width, 3)) * 0.8 + 0.1), unit=True)
    rig, pre = rotation_mesh_pair(angle, cfg.work_width, cfg.work_height, cfg.mesh_cols, cfg.mesh_rows)
    m2f, ups, wrp = [], [], []
    for _ in range(runs + 1):
        t0 = time.perf_counter()
        fw = mesh_to_flow(rig, pre)
        t1 = time.perf_counter()
        ff = upsample_flow(fw, width, height)
        t2 = time.perf_counter()
        backward_warp(img, ff, cfg.boundary, cfg.fill)
        t3 = time.perf_counter()
        m2f.append(t1 - t0)
        ups.append(t2 - t1)
        wrp.append(t3 - t2)
    return {
        "width": width,
        "height": height,
        "pixels": width * height,
        "mesh_to_flow_s": statistics.median(m2f[1:]),
        "upsample_s": statistics.median(ups[1:]),
        "warp_s": statistics.median(wrp[1:]),
    }


def cmd_bench(args) -> int:
    cfg = _config_from(args)
    nthreads = cfg.apply_threads()
    sizes = [parse_size_spec(s) for s in args.sizes.split(",")]
    runs = max(20, args.runs)
    print(f"threads={nthreads} runs={runs} work_res={cfg.work_width}x{cfg.work_height} angle={args.angle}")
    print(f"{'size':>12s} {'pixels':>10s} {'mesh_to_flow_ms':>16s} {'upsample_ms':>12s} {'warp_ms':>10s} {'total_ms':>10s}")
    for w, h in sizes:
        r = bench_stages(w, h, cfg, args.angle, runs)
        total = r["mesh_to_flow_s"] + r["upsample_s"] + r["warp_s"]
        print(
            f"{f'{w}x{h}':>12s} {r['pixels']:>10d} {r['mesh_to_flow_s'] * 1000:>16.2f} "
            f"{r['upsample_s'] * 1000:>12.2f} {r['warp_s'] * 1000:>10.2f} {total * 1000:>10.2f}"
        )
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _config_from(args)
    cfg.apply_threads()
    if not os.path.isdir(args.data_dir):
        raise DataError(f"data directory not found: {args.data_dir}")
    if args.ui_dir is not None and not os.path.isdir(args.ui_dir):
        raise DataError(f"ui directory not found: {args.ui_dir}")
    app = create_app(data_dir=args.data_dir, config=cfg, ui_dir=args.ui_dir)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as e:
        raise DataError(f"cannot serve on {args.host}:{args.port}: {e}") from None
    return EXIT_OK


_COMMANDS = {
    "gen-dataset": cmd_gen_dataset,
    "correct": cmd_correct,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except DataError as e:
        print(f"tiltwarp: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as e:  # pragma: no cover - defensive
        print(f"tiltwarp: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
