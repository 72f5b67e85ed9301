"""Single-finger kinematics: frozen fixtures, invariants, workspace records.

Expected numbers marked "oracle" were computed by tests/oracles.py routines
(generic least squares on the sphere equations resp. circle-geometry
solvability) before being frozen here.
"""

from __future__ import annotations

import io
import math

import numpy as np
import pytest

from polydelta.kinematics import (
    DeltaGeometry,
    NoIntersectionError,
    OutOfStrokeError,
    UnreachableError,
    forward_kinematics,
    forward_kinematics_masked,
    inverse_kinematics,
    numeric_jacobian,
    sample_workspace,
    workspace_metrics,
    workspace_sweep,
    WorkspaceGrid,
    rotation_z,
)

GEOM = DeltaGeometry()  # 20 / 6 / 45, stroke 20

# oracle: least-squares sphere intersection, residual < 1e-10
FK_OFF_AXIS = np.array([-15.194841499804916, -26.318237490618188, -21.909167149590324])


def test_fk_symmetric_actuation_drops_straight_down():
    p = forward_kinematics(GEOM, (10.0, 10.0, 10.0))
    z = 10.0 - math.sqrt(45.0**2 - 14.0**2)
    assert np.allclose(p, [0.0, 0.0, z], atol=1e-9)
    assert abs(z - (-32.766809560686)) < 1e-9


def test_fk_off_axis_matches_sphere_oracle():
    p = forward_kinematics(GEOM, (0.0, 0.0, 20.0))
    assert np.linalg.norm(p - FK_OFF_AXIS) < 1e-9


def test_fk_sphere_residuals_below_tolerance():
    rng = np.random.default_rng(11)
    a = rng.uniform(0.0, GEOM.stroke, size=(500, 3))
    p = forward_kinematics(GEOM, a)
    centers_xy = GEOM.sphere_centers_xy()
    for i in range(3):
        c = np.concatenate([np.broadcast_to(centers_xy[i], (500, 2)), a[:, i : i + 1]], axis=1)
        r = np.linalg.norm(p - c, axis=1)
        assert np.max(np.abs(r - GEOM.link_length)) < 1e-9


def test_fk_branch_stays_below_carriages():
    rng = np.random.default_rng(12)
    a = rng.uniform(0.0, GEOM.stroke, size=(1000, 3))
    p = forward_kinematics(GEOM, a)
    assert np.all(p[:, 2] < a.min(axis=1))


def test_fk_common_mode_is_pure_translation():
    rng = np.random.default_rng(13)
    a = rng.uniform(0.0, 10.0, size=(200, 3))
    base = forward_kinematics(GEOM, a)
    lifted = forward_kinematics(GEOM, a + 7.5)
    assert np.allclose(lifted - base, [0.0, 0.0, 7.5], atol=1e-9)


def test_fk_rotational_equivariance():
    rot = rotation_z(0.7)
    turned = DeltaGeometry(rail_angles=tuple(t + 0.7 for t in GEOM.rail_angles))
    rng = np.random.default_rng(14)
    a = rng.uniform(0.0, GEOM.stroke, size=(100, 3))
    assert np.allclose(
        forward_kinematics(turned, a), forward_kinematics(GEOM, a) @ rot.T, atol=1e-9
    )


def test_fk_rejects_out_of_stroke():
    with pytest.raises(OutOfStrokeError):
        forward_kinematics(GEOM, (0.0, 0.0, 25.0))
    with pytest.raises(OutOfStrokeError):
        forward_kinematics(GEOM, (-1.0, 0.0, 0.0))


def test_fk_reports_no_intersection():
    tight = DeltaGeometry(link_length=14.2)
    with pytest.raises(NoIntersectionError):
        forward_kinematics(tight, (0.0, 20.0, 0.0))


def test_ik_round_trip_exact():
    rng = np.random.default_rng(15)
    a = rng.uniform(0.0, GEOM.stroke, size=(2000, 3))
    p = forward_kinematics(GEOM, a)
    a2, ok = inverse_kinematics(GEOM, p)
    assert np.all(ok)
    assert np.max(np.abs(a2 - a)) < 1e-9


def test_ik_unreachable_and_stroke_errors():
    with pytest.raises(UnreachableError):
        inverse_kinematics(GEOM, (100.0, 0.0, -30.0))
    # Reachable by the spheres, but the carriage would sit above the stroke.
    with pytest.raises(OutOfStrokeError):
        inverse_kinematics(GEOM, (0.0, 0.0, 5.0))
    a, ok = inverse_kinematics(GEOM, (0.0, 0.0, 5.0), enforce_stroke=False)
    assert not np.all(ok)
    assert np.allclose(a, 5.0 + math.sqrt(45.0**2 - 14.0**2))


def test_ik_never_clamps():
    # a point just outside the z window must raise, not return clipped values
    deep = (0.0, 0.0, -math.sqrt(45.0**2 - 14.0**2) - 1e-3)
    with pytest.raises(OutOfStrokeError):
        inverse_kinematics(GEOM, deep)


def test_jacobian_determinant_positive_at_home():
    J = numeric_jacobian(GEOM, (10.0, 10.0, 10.0))
    det = np.linalg.det(J)
    assert det > 0.0
    # oracle: finite differences over the least-squares FK gave 3.5917471
    assert abs(det - 3.5917471) < 1e-3
    # common-mode column sum: platform moves straight up at unit rate
    assert np.allclose(J @ np.ones(3), [0.0, 0.0, 1.0], atol=1e-6)


# ----- workspace -----


def test_default_lattice_fully_reachable():
    grid = sample_workspace(GEOM, (5, 5, 5))
    assert grid.grid_shape == (5, 5, 5)
    assert grid.actuations.shape == (125, 3)
    assert grid.reachable_count == 125


def test_degenerate_geometry_lattice_misses():
    # oracle: circle-geometry solvability count on the same lattice = 29
    tight = DeltaGeometry(link_length=14.2)
    grid = sample_workspace(tight, (5, 5, 5))
    assert grid.reachable_count == 29
    assert np.all(np.isnan(grid.points[~grid.reachable]))


def test_workspace_points_match_fk():
    grid = sample_workspace(GEOM, (4, 4, 4))
    for a, p in grid.samples():
        assert np.allclose(forward_kinematics(GEOM, a), p, atol=1e-12)


def test_workspace_metrics_frozen_values():
    m = workspace_metrics(sample_workspace(GEOM, (5, 5, 5)))
    assert np.allclose(m.extents, [57.449996201359966, 53.56391189368387, 24.353480698848557], atol=1e-6)
    # z-extent is the stroke plus the off-axis dip of the lower branch;
    # equal actuation alone would translate the platform by exactly 20.
    assert m.extents[2] > GEOM.stroke
    assert abs(m.hull_volume - 28491.690194581086) < 1e-3


def test_metrics_degenerate_cloud_zero_volume():
    grid = sample_workspace(GEOM, (3, 1, 1))
    # collinear-ish tiny cloud; hull volume must be reported as zero
    grid.reachable[:] = True
    m = workspace_metrics(grid)
    assert m.hull_volume == 0.0


def test_workspace_csv_round_trip():
    grid = sample_workspace(DeltaGeometry(link_length=14.2), (3, 3, 3))
    text = grid.to_csv_str()
    lines = text.strip().split("\n")
    assert lines[0] == "a1,a2,a3,x,y,z,reachable"
    assert len(lines) == 28
    back = WorkspaceGrid.from_csv(io.StringIO(text), grid.geometry, (3, 3, 3))
    assert back.reachable_count == grid.reachable_count
    ok = grid.reachable
    assert np.allclose(back.actuations, grid.actuations, atol=1e-4)
    # 6 significant digits survive for the reachable coordinates
    assert np.allclose(back.points[ok], grid.points[ok], rtol=1e-5, atol=1e-4)
    assert np.all(np.isnan(back.points[~back.reachable]))


def test_workspace_csv_significant_digits():
    grid = sample_workspace(GEOM, (2, 2, 2))
    line = grid.to_csv_str().strip().split("\n")[1]
    assert line.split(",")[5] == "-42.7668"  # %.6g of the home drop


def test_sweep_trend_monotone_in_both_parameters():
    records = workspace_sweep((15.0, 20.0, 25.0), (35.0, 45.0, 55.0))
    vol = {(r["base_radius"], r["link_length"]): r["hull_volume"] for r in records}
    for db in (15.0, 20.0, 25.0):
        assert vol[(db, 35.0)] < vol[(db, 45.0)] < vol[(db, 55.0)]
    for dl in (35.0, 45.0, 55.0):
        assert vol[(15.0, dl)] > vol[(20.0, dl)] > vol[(25.0, dl)]


def test_geometry_validation():
    with pytest.raises(ValueError):
        DeltaGeometry(ee_radius=25.0)  # larger than base
    with pytest.raises(ValueError):
        DeltaGeometry(link_length=10.0)  # shorter than R
    with pytest.raises(ValueError):
        DeltaGeometry(stroke=0.0)
