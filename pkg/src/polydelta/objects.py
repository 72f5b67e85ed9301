"""Convex object models used for kinematic contact and wrench analysis.

Every model answers signed distance, closest surface point with outward
normal, and containment for batched query points, plus its centroid and the
characteristic radius (largest centroid-to-surface distance) used to scale
torques.  Non-convex meshes are replaced by their convex hull; that
simplification is deliberate and documented.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Pose:
    """Rigid transform: intrinsic XYZ rotation followed by translation."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def matrix(self) -> np.ndarray:
        rx, ry, rz = self.rpy
        cx, sx = math.cos(rx), math.sin(rx)
        cy, sy = math.cos(ry), math.sin(ry)
        cz, sz = math.cos(rz), math.sin(rz)
        Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
        Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
        Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
        return Rz @ Ry @ Rx

    def to_dict(self) -> dict:
        return {"position": list(self.position), "rpy": list(self.rpy)}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose":
        return cls(
            position=tuple(float(v) for v in d.get("position", (0, 0, 0))),
            rpy=tuple(float(v) for v in d.get("rpy", (0, 0, 0))),
        )


class ObjectModel:
    """Base class; subclasses implement the local-frame queries."""

    pose: Pose

    def __init__(self, pose: Pose | None = None):
        self.pose = pose or Pose()
        self._R = self.pose.matrix()
        self._t = np.asarray(self.pose.position, dtype=float)

    # subclass interface, all in the object's local frame
    def _closest_local(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _centroid_local(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def characteristic_radius(self) -> float:
        raise NotImplementedError

    def _support_local(self, d: np.ndarray) -> float:
        raise NotImplementedError

    # world-frame API
    def closest_surface(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(surface_points, outward_normals, signed_distances) for queries."""
        p = np.asarray(points, dtype=float)
        local = (p - self._t) @ self._R
        cp, n, sd = self._closest_local(local.reshape(-1, 3))
        cp = cp @ self._R.T + self._t
        n = n @ self._R.T
        if p.ndim == 1:
            return cp[0], n[0], float(sd[0])
        return cp.reshape(p.shape), n.reshape(p.shape), sd.reshape(p.shape[:-1])

    def support(self, direction) -> float:
        """max over the surface of point . direction (exact, convexity)."""
        d = np.asarray(direction, dtype=float)
        return self._support_local(d @ self._R) + float(d @ self._t)

    def signed_distance(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        local = (p - self._t) @ self._R
        _, _, sd = self._closest_local(local.reshape(-1, 3))
        return sd.reshape(p.shape[:-1]) if p.ndim > 1 else float(sd[0])

    def contains(self, points) -> np.ndarray:
        sd = self.signed_distance(points)
        return sd <= 0.0

    @property
    def centroid(self) -> np.ndarray:
        return self._centroid_local() @ self._R.T + self._t

    def z_interval(self) -> tuple[float, float]:
        """Exact world-frame z extent, from the support function."""
        up = np.array([0.0, 0.0, 1.0])
        return -self.support(-up), self.support(up)

    def to_dict(self) -> dict:
        raise NotImplementedError


class Sphere(ObjectModel):
    def __init__(self, radius: float, pose: Pose | None = None):
        super().__init__(pose)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def _closest_local(self, pts):
        d = np.linalg.norm(pts, axis=-1)
        safe = np.where(d < 1e-12, 1.0, d)
        n = pts / safe[..., None]
        n[d < 1e-12] = [0.0, 0.0, 1.0]
        return self.radius * n, n, d - self.radius

    def _centroid_local(self):
        return np.zeros(3)

    def _support_local(self, d):
        return self.radius * float(np.linalg.norm(d))

    @property
    def characteristic_radius(self) -> float:
        return self.radius

    def to_dict(self):
        return {"shape": "sphere", "radius": self.radius, "pose": self.pose.to_dict()}


class Cylinder(ObjectModel):
    """Axis along local z, centred on the origin."""

    def __init__(self, radius: float, height: float, pose: Pose | None = None):
        super().__init__(pose)
        if radius <= 0 or height <= 0:
            raise ValueError("radius and height must be positive")
        self.radius = float(radius)
        self.height = float(height)

    def _closest_local(self, pts):
        r = self.radius
        hz = 0.5 * self.height
        rho = np.linalg.norm(pts[..., :2], axis=-1)
        safe = np.where(rho < 1e-12, 1.0, rho)
        u = pts[..., :2] / safe[..., None]
        u[rho < 1e-12] = [1.0, 0.0]
        z = pts[..., 2]

        cp = np.empty_like(pts)
        n = np.empty_like(pts)
        sd = np.empty(pts.shape[:-1])

        outside_r = rho > r
        above = np.abs(z) > hz

        # side region: radially outside, within the caps
        m = outside_r & ~above
        cp[m, 0:2] = r * u[m]
        cp[m, 2] = z[m]
        n[m, 0:2] = u[m]
        n[m, 2] = 0.0
        sd[m] = rho[m] - r

        # cap region: within radius, beyond a cap
        m = ~outside_r & above
        cp[m, 0:2] = pts[m, 0:2]
        cp[m, 2] = np.sign(z[m]) * hz
        n[m, 0:2] = 0.0
        n[m, 2] = np.sign(z[m])
        sd[m] = np.abs(z[m]) - hz

        # edge region: outside both
        m = outside_r & above
        cp[m, 0:2] = r * u[m]
        cp[m, 2] = np.sign(z[m]) * hz
        diff = pts[m] - cp[m]
        dist = np.linalg.norm(diff, axis=-1)
        n[m] = diff / np.where(dist < 1e-12, 1.0, dist)[..., None]
        sd[m] = dist

        # interior: nearest of side wall and caps
        m = ~outside_r & ~above
        d_side = r - rho[m]
        d_cap = hz - np.abs(z[m])
        side_closer = d_side <= d_cap
        mm = np.where(m)[0]
        ms = mm[side_closer]
        mc = mm[~side_closer]
        cp[ms, 0:2] = r * u[ms]
        cp[ms, 2] = z[ms]
        n[ms, 0:2] = u[ms]
        n[ms, 2] = 0.0
        sd[ms] = -(r - rho[ms])
        cp[mc, 0:2] = pts[mc, 0:2]
        zsign = np.where(z[mc] >= 0.0, 1.0, -1.0)
        cp[mc, 2] = zsign * hz
        n[mc, 0:2] = 0.0
        n[mc, 2] = zsign
        sd[mc] = -(hz - np.abs(z[mc]))
        return cp, n, sd

    def _centroid_local(self):
        return np.zeros(3)

    def _support_local(self, d):
        return self.radius * math.hypot(d[0], d[1]) + 0.5 * self.height * abs(d[2])

    @property
    def characteristic_radius(self) -> float:
        return math.hypot(self.radius, 0.5 * self.height)

    def to_dict(self):
        return {
            "shape": "cylinder",
            "radius": self.radius,
            "height": self.height,
            "pose": self.pose.to_dict(),
        }


class Box(ObjectModel):
    """Axis-aligned in its local frame, centred on the origin."""

    def __init__(self, size, pose: Pose | None = None):
        super().__init__(pose)
        self.size = tuple(float(v) for v in size)
        if len(self.size) != 3 or any(v <= 0 for v in self.size):
            raise ValueError("size must be three positive extents")

    def _closest_local(self, pts):
        h = 0.5 * np.asarray(self.size)
        q = np.clip(pts, -h, h)
        diff = pts - q
        dist = np.linalg.norm(diff, axis=-1)
        outside = dist > 1e-12

        cp = q.copy()
        n = np.zeros_like(pts)
        sd = np.empty(pts.shape[:-1])
        n[outside] = diff[outside] / dist[outside, None]
        sd[outside] = dist[outside]

        # interior points: push out through the nearest face
        inside = ~outside
        if np.any(inside):
            gap = h - np.abs(pts[inside])  # (k, 3) distances to each face pair
            ax = np.argmin(gap, axis=-1)
            k = np.where(inside)[0]
            sgn = np.where(pts[k, ax] >= 0.0, 1.0, -1.0)
            cp[k, ax] = sgn * h[ax]
            n[k, ax] = sgn
            sd[k] = -gap[np.arange(len(k)), ax]
        return cp, n, sd

    def _centroid_local(self):
        return np.zeros(3)

    def _support_local(self, d):
        return float(0.5 * np.asarray(self.size) @ np.abs(d))

    @property
    def characteristic_radius(self) -> float:
        return float(np.linalg.norm(0.5 * np.asarray(self.size)))

    def to_dict(self):
        return {"shape": "box", "size": list(self.size), "pose": self.pose.to_dict()}


class ConvexMesh(ObjectModel):
    """Convex hull of a vertex cloud; non-convex input collapses to its hull.

    ``hull_replaced`` records whether that collapse changed the shape: it is
    True when some input vertex sits strictly inside the hull (beyond the
    1e-6 convexity tolerance), i.e. the input mesh was not convex.
    """

    def __init__(self, vertices, pose: Pose | None = None):
        super().__init__(pose)
        from scipy.spatial import ConvexHull

        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 4:
            raise ValueError("need at least four 3D vertices")
        self.hull = ConvexHull(pts)
        depth = pts @ self.hull.equations[:, :3].T + self.hull.equations[:, 3]
        self.hull_replaced = bool(np.any(depth.max(axis=1) < -1e-6))
        self.vertices = pts[self.hull.vertices]
        self._tris = pts[self.hull.simplices]  # (F, 3, 3)
        self._eqs = self.hull.equations  # (F, 4), n.x + b <= 0 inside
        vol_centroid = _hull_centroid(pts, self.hull)
        self._centroid = vol_centroid
        self._char_r = float(np.linalg.norm(self.vertices - vol_centroid, axis=1).max())

    def _closest_local(self, pts):
        cp, dist = _closest_on_triangles(pts, self._tris)
        plane = pts @ self._eqs[:, :3].T + self._eqs[:, 3]  # (Q, F)
        inside = np.all(plane <= 1e-9, axis=-1)

        n = np.zeros_like(pts)
        sd = dist.copy()
        out = ~inside & (dist > 1e-12)
        n[out] = (pts[out] - cp[out]) / dist[out, None]
        # interior (or exactly on the surface): most-violated face plane
        if np.any(~out):
            k = np.where(~out)[0]
            f = np.argmax(plane[k], axis=-1)
            n[k] = self._eqs[f, :3]
            sd[k] = plane[k, f]
            cp[k] = pts[k] - plane[k, f, None] * self._eqs[f, :3]
        return cp, n, sd

    def _centroid_local(self):
        return self._centroid

    def _support_local(self, d):
        return float((self.vertices @ d).max())

    @property
    def characteristic_radius(self) -> float:
        return self._char_r

    def to_dict(self):
        return {
            "shape": "mesh",
            "vertices": self.vertices.tolist(),
            "pose": self.pose.to_dict(),
        }


def _hull_centroid(points: np.ndarray, hull) -> np.ndarray:
    """Volume centroid by fanning tetrahedra from the vertex mean."""
    apex = points[hull.vertices].mean(axis=0)
    tris = points[hull.simplices]
    v0 = tris[:, 0] - apex
    v1 = tris[:, 1] - apex
    v2 = tris[:, 2] - apex
    vols = np.abs(np.einsum("ij,ij->i", v0, np.cross(v1, v2))) / 6.0
    cents = (tris.sum(axis=1) + apex) / 4.0
    total = vols.sum()
    if total < 1e-12:
        return apex
    return (cents * vols[:, None]).sum(axis=0) / total


def _closest_on_triangles(pts: np.ndarray, tris: np.ndarray):
    """Closest point on any triangle for each query; vectorised over both.

    Standard region-based point/triangle projection (Eberly), evaluated for
    all (query, face) pairs at once.
    """
    Q = pts.shape[0]
    F = tris.shape[0]
    a = tris[:, 0][None]  # (1, F, 3)
    ab = (tris[:, 1] - tris[:, 0])[None]
    ac = (tris[:, 2] - tris[:, 0])[None]
    p = pts[:, None, :]  # (Q, 1, 3)
    ap = p - a

    d1 = np.einsum("qfk,qfk->qf", np.broadcast_to(ab, (Q, F, 3)), ap)
    d2 = np.einsum("qfk,qfk->qf", np.broadcast_to(ac, (Q, F, 3)), ap)
    dot_abab = np.einsum("xfk,xfk->xf", ab, ab)
    dot_abac = np.einsum("xfk,xfk->xf", ab, ac)
    dot_acac = np.einsum("xfk,xfk->xf", ac, ac)

    denom = dot_abab * dot_acac - dot_abac**2
    denom = np.where(np.abs(denom) < 1e-18, 1e-18, denom)
    v = (dot_acac * d1 - dot_abac * d2) / denom
    w = (dot_abab * d2 - dot_abac * d1) / denom
    # clamp barycentrics into the triangle
    v = np.clip(v, 0.0, 1.0)
    w = np.clip(w, 0.0, 1.0)
    over = v + w > 1.0
    scale = np.where(over, (v + w), 1.0)
    v = v / scale
    w = w / scale
    cand = a + v[..., None] * ab + w[..., None] * ac  # (Q, F, 3)
    # clamped barycentric projection may sit slightly off the true closest
    # point near edges; refine by also testing the three edges
    for e0, e1 in ((tris[:, 0], tris[:, 1]), (tris[:, 1], tris[:, 2]), (tris[:, 2], tris[:, 0])):
        d = (e1 - e0)[None]
        t = np.einsum("qfk,qfk->qf", p - e0[None], np.broadcast_to(d, (Q, F, 3)))
        t = t / np.maximum(np.einsum("xfk,xfk->xf", d, d), 1e-18)
        t = np.clip(t, 0.0, 1.0)
        pt = e0[None] + t[..., None] * d
        better = np.linalg.norm(p - pt, axis=-1) < np.linalg.norm(p - cand, axis=-1)
        cand = np.where(better[..., None], pt, cand)

    dist = np.linalg.norm(p - cand, axis=-1)  # (Q, F)
    best = np.argmin(dist, axis=-1)
    rows = np.arange(Q)
    return cand[rows, best], dist[rows, best]


# ----- descriptors and mesh files -----


def object_from_dict(d: dict) -> ObjectModel:
    shape = d.get("shape")
    pose = Pose.from_dict(d.get("pose", {}))
    if shape == "sphere":
        return Sphere(float(d["radius"]), pose)
    if shape == "cylinder":
        return Cylinder(float(d["radius"]), float(d["height"]), pose)
    if shape == "box":
        return Box(d["size"], pose)
    if shape == "mesh":
        if "vertices" in d:
            return ConvexMesh(d["vertices"], pose)
        if "file" in d:
            return ConvexMesh(load_mesh_vertices(d["file"]), pose)
        raise ValueError("mesh descriptor needs 'vertices' or 'file'")
    raise ValueError(f"unknown shape {shape!r}")


def object_from_json(text: str) -> ObjectModel:
    return object_from_dict(json.loads(text))


def load_mesh_vertices(path: str) -> np.ndarray:
    """Vertices from an OFF or (ASCII) OBJ file; faces are not needed since
    only the convex hull is used."""
    with open(path) as fp:
        text = fp.read()
    name = path.lower()
    if name.endswith(".off"):
        return _parse_off(text)
    if name.endswith(".obj"):
        return _parse_obj(text)
    # sniff
    if text.lstrip().startswith("OFF"):
        return _parse_off(text)
    return _parse_obj(text)


def _parse_off(text: str) -> np.ndarray:
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError("not an OFF file")
    nv = int(tokens[1])
    vals = tokens[4 : 4 + 3 * nv]
    if len(vals) < 3 * nv:
        raise ValueError("truncated OFF vertex block")
    return np.asarray(vals, dtype=float).reshape(nv, 3)


def _parse_obj(text: str) -> np.ndarray:
    verts = []
    for line in text.splitlines():
        if line.startswith("v "):
            parts = line.split()
            verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
    if not verts:
        raise ValueError("OBJ file contains no vertices")
    return np.asarray(verts, dtype=float)
