#!/usr/bin/env python3
"""Generate a folder of procedural "horizontal" images for demos and quick
experiments (no external data needed).  Each image mixes low-frequency
gradients, a horizon-ish band, and a few blobs, so tilts are visible."""

import argparse
import os

import numpy as np

import tiltwarp as tw


def demo_image(seed: int, width: int, height: int) -> tw.Image:
    rng = np.random.default_rng(seed)
    x = (np.arange(width) + 0.5) / width
    y = (np.arange(height) + 0.5) / height
    xx, yy = np.meshgrid(x, y)
    horizon = 0.45 + 0.08 * rng.uniform(-1, 1)
    sky = np.clip((horizon - yy) * 3.0, 0, 1)
    chans = []
    for base in rng.uniform(0.25, 0.75, 3):
        v = base * (0.55 + 0.45 * sky)
        for _ in range(4):
            cx0, cy0 = rng.uniform(0.1, 0.9, 2)
            amp = rng.uniform(-0.25, 0.3)
            sig = rng.uniform(0.01, 0.06)
            v = v + amp * np.exp(-((xx - cx0) ** 2 + (yy - cy0) ** 2) / sig)
        v = v + 0.05 * np.sin(2 * np.pi * (3 * xx + rng.uniform()))
        chans.append(v)
    arr = np.clip(np.stack(chans, axis=-1), 0, 1)
    # crisp horizontal band; misalignment makes tilt obvious
    band = (np.abs(yy - horizon) < 0.006)[:, :, None]
    arr = np.where(band, 0.95, arr)
    return tw.to_uint8(tw.Image(arr, unit=True))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--size", default="512x384")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    w, h = (int(t) for t in args.size.lower().split("x"))
    os.makedirs(args.out_dir, exist_ok=True)
    for k in range(args.count):
        path = os.path.join(args.out_dir, f"demo{k:03d}.png")
        tw.save_image(demo_image(args.seed * 1000 + k, w, h), path)
        print(path)


if __name__ == "__main__":
    main()
