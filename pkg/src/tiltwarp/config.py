"""Runtime configuration shared by the CLI and the editing service."""

from __future__ import annotations

from dataclasses import dataclass

from ._kernels import max_threads, set_threads
from .errors import DataError
from .warp import Boundary

DEFAULT_MESH_COLS = 8  # cells across the width
DEFAULT_MESH_ROWS = 6  # cells across the height
DEFAULT_WORK_WIDTH = 512
DEFAULT_WORK_HEIGHT = 384


@dataclass
class Config:
    mesh_cols: int = DEFAULT_MESH_COLS
    mesh_rows: int = DEFAULT_MESH_ROWS
    work_width: int = DEFAULT_WORK_WIDTH
    work_height: int = DEFAULT_WORK_HEIGHT
    boundary: Boundary = Boundary.CONSTANT
    fill: float = 0.0
    seed: int = 0
    threads: int | None = None  # None = all available cores

    def __post_init__(self):
        if self.mesh_cols < 1 or self.mesh_rows < 1:
            raise DataError("mesh must have at least one cell per axis")
        if self.work_width <= self.mesh_cols or self.work_height <= self.mesh_rows:
            raise DataError("working resolution must exceed the mesh grid")

    def apply_threads(self) -> int:
        """Pin the kernel thread pool; returns the effective count."""
        return set_threads(self.threads if self.threads else max_threads())


def parse_mesh_spec(spec: str) -> tuple[int, int]:
    """Parse 'UxV' (cells across width x cells across height)."""
    try:
        u, v = spec.lower().split("x")
        return int(u), int(v)
    except ValueError:
        raise DataError(f"bad mesh spec {spec!r}, expected UxV") from None


def parse_size_spec(spec: str) -> tuple[int, int]:
    """Parse 'WxH' in pixels."""
    try:
        w, h = spec.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise DataError(f"bad size spec {spec!r}, expected WxH") from None
