"""tiltwarp: mesh-to-flow warping toolkit for horizon correction.

The geometric core converts low-resolution mesh deformations into dense
backward optical flows via per-cell DLT homographies, composes and
upsamples flows, and warps images with them.  On top of it sit a synthetic
tilt dataset generator, PSNR/SSIM evaluation, a CLI, and a local session
service for interactive mesh correction.
"""

from .config import Config
from .errors import (
    DataError,
    DecodeError,
    DegenerateGeometryError,
    FormatError,
    MeshValidityError,
)
from .flow import (
    FlowField,
    analytic_rotation_flow,
    compose_flows,
    mirror_flow,
    read_flow,
    upsample_flow,
    write_flow,
    zero_flow,
)
from .homography import Homography, dlt_homography, grid_homographies
from .image import (
    Image,
    image_from_array,
    load_image,
    mirror_lr,
    resize_bilinear,
    save_image,
    to_uint8,
    to_unit,
)
from .mesh import (
    Mesh,
    frame_center,
    mesh_is_valid,
    mirror_mesh,
    read_mesh,
    rigid_mesh,
    rotation_mesh_pair,
    scale_mesh,
    validate_mesh,
    write_mesh,
)
from .metrics import MetricReport, endpoint_error, psnr, ssim
from .pipeline import correct_image, correct_image_timed, full_resolution_flow
from .synth import (
    ANGLE_INTERVALS,
    AngleSample,
    CropRect,
    Sample,
    SampleRecord,
    assign_splits,
    correction_mesh,
    generate_dataset,
    make_sample,
    max_inscribed_crop,
    read_manifest,
    rigid_rotate,
    sample_angles,
    synth_tilt_mesh,
    write_manifest,
)
from .warp import Boundary, backward_warp, cell_index, mesh_to_flow, mesh_warp

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
