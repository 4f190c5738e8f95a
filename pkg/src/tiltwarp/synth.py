"""Synthetic tilt dataset construction.

Samples are built from perceptually horizontal images: each source image is
deformed by a boundary-preserving tilt mesh at six random angles (one per
magnitude interval), giving (tilted input, horizontal label, angle) triples
plus the ground-truth correction mesh that undoes the tilt.

The tilt generator is a stand-in for a full content-aware rotation: vertex
p moves by w(p) * (R(theta)*(p-c) + c - p), where the weight w is a per-axis
cubic smoothstep that is 0 on the frame boundary and 1 inside a 25%-inset
core rectangle.  This keeps the image rectangular (boundary pinned) while
the interior rotates rigidly by theta, which is what the round-trip and
correction oracles rely on.

Angle sign convention: a stored angle of +theta means the input content is
tilted counterclockwise on screen by theta; applying the emitted correction
mesh (or analytic_rotation_flow(+theta)) removes it.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, FormatError, MeshValidityError
from .image import Image, image_from_array, load_image, resize_bilinear, save_image
from .mesh import (
    Mesh,
    frame_center,
    mesh_is_valid,
    rigid_mesh,
    rotation_matrix,
    validate_mesh,
    write_mesh,
)
from .warp import Boundary, mesh_warp, warp_positions

# Angle magnitude intervals; negative ones are closed at the low end,
# positive ones at the high end, so +/-10 are included and (-1, 1) never is.
ANGLE_INTERVALS = (
    (-10.0, -7.0),
    (-7.0, -4.0),
    (-4.0, -1.0),
    (1.0, 4.0),
    (4.0, 7.0),
    (7.0, 10.0),
)

MAX_TILT_DEG = 10.0
DEFAULT_CORE_INSET = 0.25


@dataclass(frozen=True)
class AngleSample:
    degrees: float
    interval_index: int

    def __post_init__(self):
        lo, hi = ANGLE_INTERVALS[self.interval_index]
        d = self.degrees
        inside = (lo <= d < hi) if lo < 0 else (lo < d <= hi)
        if not inside:
            raise DataError(f"angle {d} outside interval {self.interval_index}")


def sample_angles(seed: int) -> list[AngleSample]:
    """One uniform draw per interval, deterministic for a given seed.

    Positive intervals are open-low/closed-high, so their values come from
    negating a draw over the mirrored negative interval.
    """
    rng = np.random.default_rng(seed)
    out = []
    for k, (lo, hi) in enumerate(ANGLE_INTERVALS):
        if lo < 0:
            val = float(rng.uniform(lo, hi))
        else:
            val = -float(rng.uniform(-hi, -lo))
        out.append(AngleSample(val, k))
    return out


# --- tilt mesh generation ----------------------------------------------------


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _axis_weight(coord: np.ndarray, size: float, inset: float) -> np.ndarray:
    edge_dist = np.minimum(coord, size - coord)
    return _smoothstep(edge_dist / (inset * size))


def tilt_displacement_weight(points: np.ndarray, width: int, height: int, inset: float = DEFAULT_CORE_INSET) -> np.ndarray:
    """w(p): 0 on the frame boundary, 1 inside the inset core, smooth between."""
    p = np.asarray(points, dtype=np.float64)
    return _axis_weight(p[..., 0], width, inset) * _axis_weight(p[..., 1], height, inset)


def tilt_map(points: np.ndarray, theta_deg: float, width: int, height: int, inset: float = DEFAULT_CORE_INSET) -> np.ndarray:
    """T(p) = p + w(p) * (R(theta)*(p-c) + c - p), c = pixel-grid center."""
    p = np.asarray(points, dtype=np.float64)
    cx, cy = frame_center(width, height)
    c = np.array([cx, cy])
    rot = rotation_matrix(theta_deg)
    d = (p - c) @ rot.T + c - p
    w = tilt_displacement_weight(p, width, height, inset)
    return p + w[..., None] * d


def _invert_tilt_map(targets: np.ndarray, theta_deg: float, width: int, height: int, inset: float) -> np.ndarray:
    """Solve T(q) = target per point with Newton and finite-difference Jacobians."""
    t = np.asarray(targets, dtype=np.float64)
    flat = t.reshape(-1, 2)
    q = flat.copy()
    h = 1e-5
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    for _ in range(50):
        f = tilt_map(q, theta_deg, width, height, inset) - flat
        err = np.abs(f).max()
        if err < 1e-10:
            break
        jx = (tilt_map(q + ex, theta_deg, width, height, inset) - tilt_map(q - ex, theta_deg, width, height, inset)) / (2 * h)
        jy = (tilt_map(q + ey, theta_deg, width, height, inset) - tilt_map(q - ey, theta_deg, width, height, inset)) / (2 * h)
        a, b = jx[:, 0], jy[:, 0]
        c_, d_ = jx[:, 1], jy[:, 1]
        det = a * d_ - b * c_
        if np.abs(det).min() < 1e-9:
            raise MeshValidityError("tilt map Jacobian is singular; tilt too aggressive")
        dx = (d_ * f[:, 0] - b * f[:, 1]) / det
        dy = (-c_ * f[:, 0] + a * f[:, 1]) / det
        q[:, 0] -= dx
        q[:, 1] -= dy
    else:
        raise MeshValidityError("tilt map inversion did not converge")
    return q.reshape(t.shape)


def synth_tilt_mesh(
    theta_deg: float,
    width: int,
    height: int,
    cols: int,
    rows: int,
    inset: float = DEFAULT_CORE_INSET,
) -> tuple[Mesh, Mesh]:
    """Rigid mesh and its tilt-deformed copy (vertices moved by w * rotation).

    Used as (source, destination) the pair warps a horizontal image into a
    counterclockwise-tilted one while keeping the frame boundary pinned.
    """
    if abs(theta_deg) > MAX_TILT_DEG:
        raise DataError(f"|theta| must be <= {MAX_TILT_DEG} degrees")
    rig = rigid_mesh(width, height, cols, rows)
    tilted = tilt_map(rig.vertices, theta_deg, width, height, inset)
    m_tilt = Mesh(cols, rows, width, height, tilted)
    if not mesh_is_valid(m_tilt):
        raise MeshValidityError(
            f"tilt mesh failed quad validity (theta={theta_deg}, grid {cols}x{rows})"
        )
    return rig, m_tilt


def correction_mesh(
    theta_deg: float,
    width: int,
    height: int,
    cols: int,
    rows: int,
    inset: float = DEFAULT_CORE_INSET,
) -> Mesh:
    """Mesh whose per-cell warp undoes the synthetic tilt: vertices at the
    numerically inverted tilt map, exactly the reverse rotation in the core."""
    rig = rigid_mesh(width, height, cols, rows)
    inv = _invert_tilt_map(rig.vertices, theta_deg, width, height, inset)
    m = Mesh(cols, rows, width, height, inv)
    validate_mesh(m)
    return m


@dataclass(frozen=True)
class Sample:
    """One generated record, still in memory (nothing written yet)."""

    tilted: Image
    label: Image
    angle: float
    rig: Mesh
    tilt: Mesh  # deforms horizontal -> tilted
    correction: Mesh  # deforms tilted -> horizontal (the ground truth)


def make_sample(
    horizontal: Image,
    theta_deg: float,
    cols: int = 8,
    rows: int = 6,
    inset: float = DEFAULT_CORE_INSET,
) -> Sample:
    """Tilt a horizontal image by theta and keep the correction mesh.

    The tilted input is mesh_warp(horizontal, rig, tilt); edge sampling uses
    clamp so boundary pixels never blend toward the fill value.  At theta=0
    the input equals the label bit-exactly.
    """
    w, h = horizontal.width, horizontal.height
    rig, m_tilt = synth_tilt_mesh(theta_deg, w, h, cols, rows, inset)
    m_corr = correction_mesh(theta_deg, w, h, cols, rows, inset)
    tilted = mesh_warp(horizontal, rig, m_tilt, boundary=Boundary.CLAMP)
    return Sample(tilted, horizontal, float(theta_deg), rig, m_tilt, m_corr)


# --- rigid-rotation baselines ------------------------------------------------


def _rotated_extents(width: int, height: int, theta_deg: float) -> tuple[int, int]:
    t = math.radians(theta_deg)
    c, s = abs(math.cos(t)), abs(math.sin(t))
    # shave float dust so exact quarter turns do not grow the canvas
    out_w = math.ceil(width * c + height * s - 1e-7)
    out_h = math.ceil(width * s + height * c - 1e-7)
    return out_w, out_h


def rigid_rotate(img: Image, theta_deg: float) -> tuple[Image, Image]:
    """Rotate by theta about the image center onto the grown bounding canvas.

    Returns (rotated, mask); the 1-channel mask is 255 where the sample came
    from inside the source frame.  Positive angles rotate content clockwise
    on screen, matching analytic_rotation_flow.
    """
    if abs(theta_deg) > 90.0:
        raise DataError("|theta| must be at most 90 degrees")
    w, h = img.width, img.height
    out_w, out_h = _rotated_extents(w, h, theta_deg)
    cx, cy = frame_center(w, h)
    ox, oy = frame_center(out_w, out_h)
    rot = rotation_matrix(-theta_deg)
    xs = np.arange(out_w, dtype=np.float64)[None, :] - ox
    ys = np.arange(out_h, dtype=np.float64)[:, None] - oy
    px = rot[0, 0] * xs + rot[0, 1] * ys + cx
    py = rot[1, 0] * xs + rot[1, 1] * ys + cy
    px = np.broadcast_to(px, (out_h, out_w))
    py = np.broadcast_to(py, (out_h, out_w))
    eps = 1e-6
    valid = (px >= -eps) & (px <= w - 1 + eps) & (py >= -eps) & (py <= h - 1 + eps)
    rotated = warp_positions(img, px, py, boundary=Boundary.CONSTANT, fill=0.0)
    mask = image_from_array(np.where(valid, 255, 0).astype(np.uint8))
    return rotated, mask


@dataclass(frozen=True)
class CropRect:
    x: float
    y: float
    width: float
    height: float

    @property
    def area(self) -> float:
        return self.width * self.height


def max_inscribed_crop(width: int, height: int, theta_deg: float) -> CropRect:
    """Largest axis-aligned rectangle with the original aspect ratio that
    fits inside the rotated frame, centered in the rotated canvas.

    With c = |cos t|, s = |sin t|, a centered scale-k copy of the original
    rectangle fits iff k*(w*c + h*s) <= w and k*(w*s + h*c) <= h (corner
    coordinates in the rotated frame's axes); the optimum is the smaller
    bound.  Coordinates are relative to the rigid_rotate canvas.
    """
    if width <= 0 or height <= 0:
        raise DataError("frame dimensions must be positive")
    if not (0.0 < abs(theta_deg) < 45.0):
        raise DataError("|theta| must be in (0, 45) degrees")
    t = math.radians(theta_deg)
    c, s = abs(math.cos(t)), abs(math.sin(t))
    scale = min(width / (width * c + height * s), height / (width * s + height * c))
    cw = scale * width
    ch = scale * height
    out_w, out_h = _rotated_extents(width, height, theta_deg)
    return CropRect((out_w - cw) / 2.0, (out_h - ch) / 2.0, cw, ch)


# --- manifest ----------------------------------------------------------------
#
# One record per line, tab-separated key=value fields in fixed order:
#
#   input=<path>\tlabel=<path>\tangle=<repr float>\tsplit=<train|test>
#
# Paths may not contain tabs or newlines; angles round-trip bit-exactly.


@dataclass(frozen=True)
class SampleRecord:
    input_path: str
    label_path: str
    angle: float
    split: str

    def __post_init__(self):
        if self.split not in ("train", "test"):
            raise DataError(f"split must be train or test, got {self.split!r}")
        if not (1.0 < abs(self.angle) <= MAX_TILT_DEG):
            raise DataError(f"|angle| must lie in (1, {MAX_TILT_DEG}], got {self.angle}")
        for p in (self.input_path, self.label_path):
            if "\t" in p or "\n" in p:
                raise DataError("paths may not contain tabs or newlines")


def write_manifest(records: list[SampleRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(f"input={r.input_path}\tlabel={r.label_path}\tangle={r.angle!r}\tsplit={r.split}\n")


def read_manifest(path) -> list[SampleRecord]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except FileNotFoundError:
        raise DataError(f"no such manifest: {path}") from None
    records = []
    keys = ("input", "label", "angle", "split")
    for ln_no, ln in enumerate(lines, start=1):
        if not ln.strip():
            continue
        fields = ln.split("\t")
        if len(fields) != 4:
            raise FormatError(f"line {ln_no}: expected 4 fields, got {len(fields)}")
        vals = {}
        for key, field in zip(keys, fields):
            if not field.startswith(key + "="):
                raise FormatError(f"line {ln_no}: expected {key}=..., got {field!r}")
            vals[key] = field[len(key) + 1 :]
        try:
            angle = float(vals["angle"])
        except ValueError:
            raise FormatError(f"line {ln_no}: bad angle {vals['angle']!r}") from None
        try:
            records.append(SampleRecord(vals["input"], vals["label"], angle, vals["split"]))
        except DataError as e:
            raise FormatError(f"line {ln_no}: {e}") from None
    return records


def assign_splits(records: list[SampleRecord], seed: int) -> list[SampleRecord]:
    """Deterministic 9:1 split, independent of record order.

    Records are ranked by a stable hash of (seed, input basename); the first
    round(N/10) of that ranking become the test set.
    """
    def rank(r: SampleRecord) -> str:
        name = os.path.basename(r.input_path)
        return hashlib.sha256(f"{seed}:{name}".encode()).hexdigest()

    order = sorted(range(len(records)), key=lambda k: rank(records[k]))
    n_test = int(len(records) / 10 + 0.5)
    test_idx = set(order[:n_test])
    return [replace(r, split="test" if k in test_idx else "train") for k, r in enumerate(records)]


# --- dataset generation --------------------------------------------------------


def _stable_child_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def generate_dataset(
    sources: list,
    out_dir,
    seed: int = 0,
    cols: int = 8,
    rows: int = 6,
    width: int = 512,
    height: int = 384,
) -> list[SampleRecord]:
    """Build the synthetic tilt dataset under out_dir.

    Layout: input/ holds tilted PNGs (6 per source, one angle per interval),
    gt/ the shared horizontal labels, mesh/ the ground-truth correction
    meshes, manifest.txt the record list with the seeded 9:1 split.  Paths
    in the manifest are relative to out_dir.  Everything is deterministic
    given (sources, seed).
    """
    if not sources:
        raise DataError("no source images given")
    out_dir = os.fspath(out_dir)
    for sub in ("input", "gt", "mesh"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)
    records: list[SampleRecord] = []
    for src in sorted(os.fspath(s) for s in sources):
        stem = os.path.splitext(os.path.basename(src))[0]
        img = load_image(src)
        if (img.width, img.height) != (width, height):
            img = resize_bilinear(img, width, height)
        label_rel = os.path.join("gt", f"{stem}.png")
        _atomic_save_image(img, os.path.join(out_dir, label_rel))
        for angle in sample_angles(_stable_child_seed(seed, stem)):
            sample = make_sample(img, angle.degrees, cols, rows)
            input_rel = os.path.join("input", f"{stem}_a{angle.interval_index}.png")
            mesh_rel = os.path.join("mesh", f"{stem}_a{angle.interval_index}.mesh")
            _atomic_save_image(sample.tilted, os.path.join(out_dir, input_rel))
            _atomic_write_mesh(sample.correction, os.path.join(out_dir, mesh_rel))
            records.append(SampleRecord(input_rel, label_rel, angle.degrees, "train"))
    records = assign_splits(records, seed)
    tmp = os.path.join(out_dir, "manifest.txt.partial")
    write_manifest(records, tmp)
    os.replace(tmp, os.path.join(out_dir, "manifest.txt"))
    return records


def _atomic_save_image(img: Image, path: str) -> None:
    tmp = path + ".partial"
    save_image(img, tmp)
    os.replace(tmp, path)


def _atomic_write_mesh(mesh: Mesh, path: str) -> None:
    tmp = path + ".partial"
    write_mesh(mesh, tmp)
    os.replace(tmp, path)
