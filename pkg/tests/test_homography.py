"""DLT homographies: exactness, forced forms, degeneracy rejection, grids.

The rotation oracle is the closed-form 2x2 rotation embedded in a 3x3
matrix; DLT from 4 rotated points must reproduce it to high precision.
"""

import math

import numpy as np
import pytest

import tiltwarp as tw
from tiltwarp.errors import DegenerateGeometryError
from tiltwarp.mesh import translate_mesh

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def rotation_homography(theta_deg: float, cx: float, cy: float) -> np.ndarray:
    """Closed-form rotation about (cx, cy) as a normalized 3x3 matrix."""
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array(
        [
            [c, -s, cx - c * cx + s * cy],
            [s, c, cy - s * cx - c * cy],
            [0.0, 0.0, 1.0],
        ]
    )


class TestDlt:
    def test_identity_is_bit_exact(self):
        h = tw.dlt_homography(UNIT_SQUARE, UNIT_SQUARE)
        np.testing.assert_array_equal(h.matrix, np.eye(3))

    def test_pure_translation_forced_entries(self):
        dst = UNIT_SQUARE + np.array([5.0, 0.0])
        h = tw.dlt_homography(UNIT_SQUARE, dst).matrix
        assert h[0, 2] == pytest.approx(5.0, abs=1e-12)
        assert h[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert h[1, 1] == pytest.approx(1.0, abs=1e-12)
        for idx in ((0, 1), (1, 0), (1, 2), (2, 0), (2, 1)):
            assert h[idx] == pytest.approx(0.0, abs=1e-12)

    def test_rotation_matches_closed_form(self):
        # one 64x64 cell of the default grid, rotated 9.5 degrees about the
        # 512x384 pixel-grid center
        cx, cy = tw.frame_center(512, 384)
        src = np.array([[256.0, 192.0], [320.0, 192.0], [320.0, 256.0], [256.0, 256.0]])
        rot = rotation_homography(9.5, cx, cy)
        dst = (np.c_[src, np.ones(4)] @ rot.T)[:, :2]
        h = tw.dlt_homography(src, dst).matrix
        np.testing.assert_allclose(h, rot, atol=1e-8)

    def test_reprojection_below_tolerance_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            src = rng.uniform(0, 512, (4, 2))
            dst = src + rng.uniform(-40, 40, (4, 2))
            try:
                h = tw.dlt_homography(src, dst)
            except DegenerateGeometryError:
                continue  # rare random near-degenerate draw
            err = np.abs(h.apply(src) - dst).max()
            assert err < 1e-6

    def test_projective_component_recovered(self):
        target = np.array([[1.0, 0.1, 3.0], [-0.05, 0.95, -2.0], [1e-4, -2e-4, 1.0]])
        src = np.array([[10.0, 10.0], [400.0, 30.0], [380.0, 300.0], [20.0, 280.0]])
        dst = np.c_[src, np.ones(4)] @ target.T
        dst = dst[:, :2] / dst[:, 2:3]
        h = tw.dlt_homography(src, dst).matrix
        np.testing.assert_allclose(h, target, rtol=1e-9, atol=1e-12)

    def test_collinear_source_rejected(self):
        src = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [0.0, 1.0]])
        with pytest.raises(DegenerateGeometryError):
            tw.dlt_homography(src, UNIT_SQUARE)

    def test_coincident_points_rejected(self):
        src = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(DegenerateGeometryError):
            tw.dlt_homography(src, UNIT_SQUARE)

    def test_collinear_destination_rejected(self):
        dst = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        with pytest.raises(DegenerateGeometryError):
            tw.dlt_homography(UNIT_SQUARE, dst)

    def test_apply_and_inverse(self):
        src = np.array([[0.0, 0.0], [100.0, 0.0], [100.0, 80.0], [0.0, 80.0]])
        dst = np.array([[3.0, 2.0], [97.0, -1.0], [104.0, 83.0], [-2.0, 77.0]])
        h = tw.dlt_homography(src, dst)
        np.testing.assert_allclose(h.inverse().apply(h.apply(src)), src, atol=1e-9)


class TestGridHomographies:
    def test_identity_mesh_gives_identity_everywhere(self):
        rig = tw.rigid_mesh(512, 384, 8, 6)
        hs = tw.grid_homographies(rig, rig)
        assert hs.shape == (6, 8, 3, 3)
        for v in range(6):
            for u in range(8):
                np.testing.assert_array_equal(hs[v, u], np.eye(3))

    def test_translation_mesh_gives_translation_everywhere(self):
        rig = tw.rigid_mesh(512, 384, 8, 6)
        hs = tw.grid_homographies(rig, translate_mesh(rig, 3.0, -2.0))
        expected = np.array([[1, 0, 3.0], [0, 1, -2.0], [0, 0, 1]])
        np.testing.assert_allclose(hs, np.broadcast_to(expected, hs.shape), atol=1e-10)

    def test_rigid_rotation_collapses_to_one_homography(self):
        # all 48 per-cell maps equal the single analytic rotation
        for theta in (3.1, -5.4, 9.5):
            rig, pre = tw.rotation_mesh_pair(theta, 512, 384, 8, 6)
            hs = tw.grid_homographies(rig, pre)
            cx, cy = tw.frame_center(512, 384)
            expected = rotation_homography(-theta, cx, cy)
            np.testing.assert_allclose(hs, np.broadcast_to(expected, hs.shape), atol=1e-8)
            spread = np.abs(hs - hs[0, 0]).max()
            assert spread < 1e-8

    def test_grid_shape_mismatch_rejected(self):
        a = tw.rigid_mesh(512, 384, 8, 6)
        b = tw.rigid_mesh(512, 384, 4, 3)
        with pytest.raises(DegenerateGeometryError):
            tw.grid_homographies(a, b)

    def test_degenerate_cell_propagates(self):
        rig = tw.rigid_mesh(100, 100, 2, 2)
        v = rig.vertices.copy()
        v[1, 1] = (95.0, 95.0)
        from tiltwarp.errors import MeshValidityError

        with pytest.raises(MeshValidityError):
            tw.grid_homographies(rig, tw.Mesh(2, 2, 100, 100, v))
