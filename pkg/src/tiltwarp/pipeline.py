"""Arbitrary-resolution correction: the deployment path for warps that are
defined at a fixed working resolution.

A full-resolution input is corrected in four stages: downsample to the
working resolution (this is what a flow predictor consumes), rasterize the
mesh into a flow at that resolution, upsample the flow back to the input
resolution (resizing and magnifying the values), and backward-warp the
original full-resolution pixels.  Only the final warp touches every output
pixel, which is why it dominates the runtime.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import DataError
from .flow import FlowField, upsample_flow
from .image import Image, resize_bilinear
from .mesh import Mesh, rigid_mesh
from .warp import Boundary, backward_warp, mesh_to_flow


@dataclass(frozen=True)
class StageTimes:
    downsample_s: float
    mesh_to_flow_s: float
    upsample_s: float
    warp_s: float

    @property
    def total_s(self) -> float:
        return self.downsample_s + self.mesh_to_flow_s + self.upsample_s + self.warp_s


def correct_image(
    source: Image,
    mesh: Mesh | None = None,
    flow: FlowField | None = None,
    boundary: Boundary = Boundary.CONSTANT,
    fill: float = 0.0,
) -> Image:
    corrected, _ = correct_image_timed(source, mesh, flow, boundary, fill)
    return corrected


def correct_image_timed(
    source: Image,
    mesh: Mesh | None = None,
    flow: FlowField | None = None,
    boundary: Boundary = Boundary.CONSTANT,
    fill: float = 0.0,
) -> tuple[Image, StageTimes]:
    """Run the four-stage correction; exactly one of mesh/flow drives it.

    The mesh (or flow) fixes the working resolution through its own frame
    size.  The downsampled image is computed even though no predictor runs
    here, so measured timings match the deployment pipeline.
    """
    if (mesh is None) == (flow is None):
        raise DataError("provide exactly one of mesh or flow")
    if mesh is not None:
        work_w, work_h = mesh.width, mesh.height
    else:
        work_w, work_h = flow.width, flow.height

    t0 = time.perf_counter()
    resize_bilinear(source, work_w, work_h)
    t1 = time.perf_counter()
    if mesh is not None:
        rig = rigid_mesh(work_w, work_h, mesh.cols, mesh.rows)
        flow_work = mesh_to_flow(rig, mesh)
    else:
        flow_work = flow
    t2 = time.perf_counter()
    flow_full = upsample_flow(flow_work, source.width, source.height)
    t3 = time.perf_counter()
    corrected = backward_warp(source, flow_full, boundary, fill)
    t4 = time.perf_counter()
    return corrected, StageTimes(t1 - t0, t2 - t1, t3 - t2, t4 - t3)


def full_resolution_flow(source_width: int, source_height: int, mesh: Mesh) -> FlowField:
    """The upsampled flow the correction pipeline applies at full resolution."""
    rig = rigid_mesh(mesh.width, mesh.height, mesh.cols, mesh.rows)
    return upsample_flow(mesh_to_flow(rig, mesh), source_width, source_height)
