"""Object model geometry: signed distance, closest surface point, support."""

import numpy as np
import pytest

from polydelta.objects import (
    Box,
    ConvexMesh,
    Cylinder,
    Pose,
    Sphere,
    load_mesh_vertices,
    object_from_dict,
    object_from_json,
)


def test_sphere_queries():
    s = Sphere(10.0)
    assert s.signed_distance([15, 0, 0]) == pytest.approx(5.0, abs=1e-12)
    assert s.signed_distance([0, 3, 0]) == pytest.approx(-7.0, abs=1e-12)
    assert s.contains([0, 0, 0]) and not s.contains([0, 0, 11])
    cp, n, d = s.closest_surface([15.0, 0.0, 0.0])
    assert np.allclose(cp, [10, 0, 0]) and np.allclose(n, [1, 0, 0]) and d == pytest.approx(5)
    assert np.allclose(s.centroid, 0)
    assert s.characteristic_radius == 10.0
    assert s.z_interval() == (-10.0, 10.0)


def test_cylinder_regions():
    c = Cylinder(15.0, 60.0)
    assert c.signed_distance([20, 0, 0]) == pytest.approx(5.0)       # side
    assert c.signed_distance([0, 0, 35]) == pytest.approx(5.0)       # cap
    assert c.signed_distance([20, 0, 35]) == pytest.approx(np.hypot(5, 5))  # edge
    assert c.signed_distance([0, 0, 0]) == pytest.approx(-15.0)      # interior
    cp, n, d = c.closest_surface([0.0, 10.0, 29.0])
    # interior point nearer the cap than the wall exits through the cap
    assert np.allclose(cp, [0, 10, 30]) and np.allclose(n, [0, 0, 1])
    assert d == pytest.approx(-1.0)


def test_cylinder_pose_and_z_interval():
    c = Cylinder(15.0, 60.0, Pose(position=(0, 0, 5), rpy=(np.pi / 2, 0, 0)))
    lo, hi = c.z_interval()  # axis now along y: extent set by the radius
    assert lo == pytest.approx(-10.0) and hi == pytest.approx(20.0)
    assert c.signed_distance([0, 0, 5 + 15]) == pytest.approx(0.0, abs=1e-9)


def test_box_regions():
    b = Box((10, 20, 30))
    assert b.signed_distance([10, 0, 0]) == pytest.approx(5.0)
    assert b.signed_distance([0, 0, 0]) == pytest.approx(-5.0)
    cp, n, d = b.closest_surface([1.0, 2.0, 0.0])
    assert np.allclose(cp, [5, 2, 0]) and np.allclose(n, [1, 0, 0]) and d == pytest.approx(-4)
    corner = np.array([10.0, 15.0, 20.0])
    assert b.signed_distance(corner) == pytest.approx(np.linalg.norm(corner - [5, 10, 15]))


def test_box_support_matches_corners():
    rng = np.random.default_rng(4)
    b = Box((10, 20, 30), Pose(position=(1, -2, 3), rpy=(0.3, -0.7, 1.2)))
    R, t = b.pose.matrix(), np.array(b.pose.position)
    corners = np.array(
        [[sx * 5, sy * 10, sz * 15] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
    ) @ R.T + t
    for _ in range(50):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        assert b.support(d) == pytest.approx((corners @ d).max(), abs=1e-9)


def test_mesh_tetra_queries():
    verts = np.array([[0, 0, 0], [10, 0, 0], [0, 10, 0], [0, 0, 10]], float)
    m = ConvexMesh(verts)
    assert np.allclose(m.centroid, [2.5, 2.5, 2.5])
    assert not m.hull_replaced
    assert m.signed_distance([20, 0, 0]) == pytest.approx(10.0)
    assert m.signed_distance([1, 1, 1]) == pytest.approx(-1.0)
    cp, n, d = m.closest_surface([5.0, 5.0, 5.0])
    assert np.allclose(n, np.ones(3) / np.sqrt(3))
    assert d == pytest.approx((15 - 10) / np.sqrt(3))


def test_mesh_nonconvex_input_collapses_to_hull():
    cube = [[x, y, z] for x in (0, 10) for y in (0, 10) for z in (0, 10)]
    m = ConvexMesh(cube + [[5, 5, 5]])
    assert m.hull_replaced
    assert len(m.vertices) == 8
    assert np.allclose(m.centroid, [5, 5, 5])
    assert m.signed_distance([5, 5, 12]) == pytest.approx(2.0)


def test_closest_surface_consistency_random():
    rng = np.random.default_rng(11)
    shapes = [
        Sphere(8.0, Pose(position=(3, -1, 2))),
        Cylinder(6.0, 14.0, Pose(position=(-2, 0, 1), rpy=(0.4, 0.2, -0.9))),
        Box((8, 5, 12), Pose(position=(0, 4, -3), rpy=(-0.3, 0.8, 0.1))),
        ConvexMesh(rng.normal(scale=6.0, size=(30, 3))),
    ]
    for obj in shapes:
        pts = rng.normal(scale=12.0, size=(200, 3))
        cp, n, sd = obj.closest_surface(pts)
        assert np.allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-9)
        # |signed distance| equals the distance to the returned surface point
        assert np.allclose(np.abs(sd), np.linalg.norm(pts - cp, axis=1), atol=1e-7)
        # the surface point is on the surface
        assert np.max(np.abs(obj.signed_distance(cp))) < 1e-6
        # stepping outward along the normal increases the signed distance
        outside = sd > 1.0
        probe = obj.signed_distance(pts[outside] + 0.5 * n[outside])
        assert np.all(probe > sd[outside] + 0.49)


def test_contains_agrees_with_signed_distance():
    c = Cylinder(5.0, 10.0)
    pts = np.random.default_rng(2).normal(scale=7.0, size=(300, 3))
    assert np.array_equal(c.contains(pts), c.signed_distance(pts) <= 0.0)


def test_descriptor_round_trip():
    objs = [
        Sphere(7.5, Pose(position=(1, 2, 3))),
        Cylinder(4.0, 9.0, Pose(rpy=(0.1, 0.2, 0.3))),
        Box((2, 3, 4)),
        ConvexMesh([[0, 0, 0], [4, 0, 0], [0, 4, 0], [0, 0, 4], [4, 4, 4]]),
    ]
    rng = np.random.default_rng(5)
    pts = rng.normal(scale=6.0, size=(50, 3))
    for obj in objs:
        clone = object_from_dict(obj.to_dict())
        assert np.allclose(clone.signed_distance(pts), obj.signed_distance(pts), atol=1e-12)
        assert np.allclose(clone.centroid, obj.centroid, atol=1e-12)


def test_object_from_json_rejects_unknown_shape():
    with pytest.raises(ValueError, match="unknown shape"):
        object_from_json('{"shape": "torus", "radius": 1}')


def test_off_and_obj_ingestion(tmp_path):
    verts = [[0, 0, 0], [6, 0, 0], [0, 6, 0], [0, 0, 6]]
    off = tmp_path / "tet.off"
    off.write_text(
        "OFF\n4 4 6\n"
        + "".join(f"{x} {y} {z}\n" for x, y, z in verts)
        + "3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n"
    )
    obj = tmp_path / "tet.obj"
    obj.write_text(
        "# comment\n"
        + "".join(f"v {x} {y} {z}\n" for x, y, z in verts)
        + "f 1 2 3\nf 1 2 4\nf 1 3 4\nf 2 3 4\n"
    )
    ref = ConvexMesh(verts)
    for path in (off, obj):
        m = ConvexMesh(load_mesh_vertices(str(path)))
        assert np.allclose(sorted(map(tuple, m.vertices)), sorted(map(tuple, ref.vertices)))
    loaded = object_from_dict({"shape": "mesh", "file": str(off)})
    assert loaded.signed_distance([12, 0, 0]) == pytest.approx(6.0)


def test_mesh_rejects_degenerate_input():
    with pytest.raises(ValueError):
        ConvexMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]])  # too few
    with pytest.raises(Exception):  # coplanar cloud has no 3D hull
        ConvexMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]])


def test_shape_validation():
    with pytest.raises(ValueError):
        Sphere(-1.0)
    with pytest.raises(ValueError):
        Cylinder(1.0, 0.0)
    with pytest.raises(ValueError):
        Box((1, 0, 1))
