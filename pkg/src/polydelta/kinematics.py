"""Closed-form kinematics for a single linear-rail Delta finger.

The finger is a classic linear Delta: three vertical rails carry sliding
carriages, and each carriage connects to the moving platform through a
parallelogram linkage of fixed length.  The parallelograms keep the platform
orientation constant, so the mechanism is a pure 3-DOF translator.

All lengths are millimetres.  The actuation value of a rail is the carriage
z-coordinate measured along the rail, constrained to [0, stroke].
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_RAIL_ANGLES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)

# Tolerance used when deciding whether an actuation value sits inside the
# stroke interval; absorbs round-off from the closed-form solve, never more.
STROKE_EPS = 1e-9


class KinematicsError(ValueError):
    """Base class for kinematic solve failures."""


class NoIntersectionError(KinematicsError):
    """The three carriage spheres share no common point."""


class UnreachableError(KinematicsError):
    """No carriage height can place the platform at the requested point."""


class OutOfStrokeError(KinematicsError):
    """A solution exists geometrically but violates the stroke limits."""


# ===================== geometry =====================


@dataclass(frozen=True)
class DeltaGeometry:
    """Dimensions of one linear Delta finger.

    base_radius   distance from the finger axis to each rail
    ee_radius     distance from the platform centre to each link attachment
    link_length   parallelogram (arm) length
    stroke        usable carriage travel along the rail
    rail_angles   azimuth of each rail around the finger axis, radians
    """

    base_radius: float = 20.0
    ee_radius: float = 6.0
    link_length: float = 45.0
    stroke: float = 20.0
    rail_angles: tuple[float, float, float] = DEFAULT_RAIL_ANGLES

    def __post_init__(self):
        if self.base_radius <= 0 or self.ee_radius <= 0:
            raise ValueError("radii must be positive")
        if self.ee_radius >= self.base_radius:
            raise ValueError("ee_radius must be smaller than base_radius")
        if self.link_length <= self.effective_radius:
            raise ValueError(
                "link_length must exceed base_radius - ee_radius, "
                f"got {self.link_length} <= {self.effective_radius}"
            )
        if self.stroke <= 0:
            raise ValueError("stroke must be positive")
        if len(self.rail_angles) != 3:
            raise ValueError("exactly three rails required")

    @property
    def effective_radius(self) -> float:
        """Radius of the circle traced by the sphere centres (R = D_b - D_e)."""
        return self.base_radius - self.ee_radius

    def sphere_centers_xy(self) -> np.ndarray:
        """(3, 2) xy positions of the reduced sphere centres."""
        ang = np.asarray(self.rail_angles, dtype=float)
        r = self.effective_radius
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)

    def to_dict(self) -> dict:
        return {
            "base_radius": self.base_radius,
            "ee_radius": self.ee_radius,
            "link_length": self.link_length,
            "stroke": self.stroke,
            "rail_angles": list(self.rail_angles),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeltaGeometry":
        return cls(
            base_radius=float(d["base_radius"]),
            ee_radius=float(d["ee_radius"]),
            link_length=float(d["link_length"]),
            stroke=float(d["stroke"]),
            rail_angles=tuple(float(a) for a in d.get("rail_angles", DEFAULT_RAIL_ANGLES)),
        )


# ===================== forward kinematics =====================


def _trilaterate(centers: np.ndarray, radius: float):
    """Intersect three equal-radius spheres, batched.

    centers has shape (..., 3, 3).  Returns (points_low, valid) where
    points_low is the intersection branch with the smaller z coordinate and
    valid flags whether an intersection exists.
    """
    c1 = centers[..., 0, :]
    c2 = centers[..., 1, :]
    c3 = centers[..., 2, :]

    v12 = c2 - c1
    d = np.linalg.norm(v12, axis=-1)
    ex = v12 / d[..., None]
    v13 = c3 - c1
    i = np.einsum("...k,...k->...", ex, v13)
    ey = v13 - i[..., None] * ex
    ey = ey / np.linalg.norm(ey, axis=-1)[..., None]
    ez = np.cross(ex, ey)
    j = np.einsum("...k,...k->...", ey, v13)

    # Equal radii make the first chord coordinate simply d/2.
    x = 0.5 * d
    y = (i * i + j * j) / (2.0 * j) - (i / j) * x
    h2 = radius * radius - x * x - y * y

    valid = h2 >= -1e-12 * radius * radius
    h = np.sqrt(np.maximum(h2, 0.0))

    base = c1 + x[..., None] * ex + y[..., None] * ey
    pa = base + h[..., None] * ez
    pb = base - h[..., None] * ez
    low = np.where((pa[..., 2] <= pb[..., 2])[..., None], pa, pb)
    return low, valid


def sphere_centers(geometry: DeltaGeometry, actuation: np.ndarray) -> np.ndarray:
    """Sphere centres c_i = (R cos t_i, R sin t_i, a_i) for given actuation.

    actuation broadcasts over leading axes; shape (..., 3) -> (..., 3, 3).
    """
    a = np.asarray(actuation, dtype=float)
    xy = geometry.sphere_centers_xy()
    out = np.empty(a.shape[:-1] + (3, 3), dtype=float)
    out[..., :, 0] = xy[:, 0]
    out[..., :, 1] = xy[:, 1]
    out[..., :, 2] = a
    return out


def forward_kinematics(
    geometry: DeltaGeometry,
    actuation,
    *,
    check_stroke: bool = True,
) -> np.ndarray:
    """Platform position for carriage heights ``actuation`` (shape (..., 3)).

    The platform point is the sphere-intersection branch below the carriages.
    Raises NoIntersectionError if the spheres do not meet and OutOfStrokeError
    if an actuation value leaves [0, stroke] (the solver never clamps).
    """
    a = np.asarray(actuation, dtype=float)
    if a.shape[-1] != 3:
        raise ValueError("actuation must have trailing dimension 3")
    if check_stroke:
        if np.any(a < -STROKE_EPS) or np.any(a > geometry.stroke + STROKE_EPS):
            raise OutOfStrokeError(
                f"actuation outside [0, {geometry.stroke}]: {a[np.logical_or(a < -STROKE_EPS, a > geometry.stroke + STROKE_EPS)][:3]}"
            )
    centers = sphere_centers(geometry, a)
    p, valid = _trilaterate(centers, geometry.link_length)
    if not np.all(valid):
        raise NoIntersectionError("carriage spheres share no common point")
    return p


def forward_kinematics_masked(geometry: DeltaGeometry, actuation) -> tuple[np.ndarray, np.ndarray]:
    """Batch FK that flags misses instead of raising.

    Returns (points, reachable); points hold NaN where unreachable.
    """
    a = np.asarray(actuation, dtype=float)
    centers = sphere_centers(geometry, a)
    p, valid = _trilaterate(centers, geometry.link_length)
    p = np.where(valid[..., None], p, np.nan)
    return p, valid


# ===================== inverse kinematics =====================


def inverse_kinematics(
    geometry: DeltaGeometry,
    point,
    *,
    enforce_stroke: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Carriage heights that place the platform at ``point`` (shape (..., 3)).

    Returns (actuation, in_bounds) where in_bounds flags each rail's solution
    against the stroke interval.  The carriage sits above the platform, so the
    positive branch of the per-rail quadratic is taken.

    Raises UnreachableError when some rail's sphere cannot reach the point and,
    when enforce_stroke is set, OutOfStrokeError if any rail solution leaves
    [0, stroke].  Out-of-range requests are rejected, never clamped.
    """
    p = np.asarray(point, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError("point must have trailing dimension 3")
    cxy = geometry.sphere_centers_xy()  # (3, 2)
    diff = p[..., None, :2] - cxy  # (..., 3, 2)
    d2 = np.einsum("...k,...k->...", diff, diff)
    disc = geometry.link_length ** 2 - d2
    if np.any(disc < 0.0):
        raise UnreachableError("point lies outside the reach of at least one rail")
    a = p[..., 2, None] + np.sqrt(disc)
    in_bounds = (a >= -STROKE_EPS) & (a <= geometry.stroke + STROKE_EPS)
    if enforce_stroke and not np.all(in_bounds):
        raise OutOfStrokeError("rail solution violates stroke limits")
    return a, in_bounds


def numeric_jacobian(geometry: DeltaGeometry, actuation, h: float = 1e-2) -> np.ndarray:
    """Central-difference Jacobian d(platform)/d(actuation), shape (3, 3).

    Column i is the platform velocity per unit carriage speed on rail i.
    """
    a = np.asarray(actuation, dtype=float).reshape(3)
    cols = []
    for i in range(3):
        ap = a.copy()
        am = a.copy()
        ap[i] += h
        am[i] -= h
        fp = forward_kinematics(geometry, ap, check_stroke=False)
        fm = forward_kinematics(geometry, am, check_stroke=False)
        cols.append((fp - fm) / (2.0 * h))
    return np.stack(cols, axis=-1)


# ===================== workspace sampling =====================


@dataclass
class WorkspaceGrid:
    """Reachability record over a rectangular actuation lattice.

    actuations    (L, 3) lattice of carriage heights
    points        (L, 3) platform positions, NaN rows where unreachable
    reachable     (L,) bool mask
    """

    geometry: DeltaGeometry
    grid_shape: tuple[int, int, int]
    actuations: np.ndarray
    points: np.ndarray
    reachable: np.ndarray

    @property
    def reachable_count(self) -> int:
        return int(np.count_nonzero(self.reachable))

    @property
    def reachable_points(self) -> np.ndarray:
        return self.points[self.reachable]

    def samples(self):
        """Iterate (actuation, point) pairs for the reachable lattice nodes."""
        for a, p in zip(self.actuations[self.reachable], self.points[self.reachable]):
            yield a, p

    # ----- serialization -----

    CSV_HEADER = ("a1", "a2", "a3", "x", "y", "z", "reachable")

    def to_csv(self, fp) -> None:
        """Write rows ``a1,a2,a3,x,y,z,reachable`` with 6 significant digits."""
        w = csv.writer(fp, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        for a, p, r in zip(self.actuations, self.points, self.reachable):
            row = [_fmt6(v) for v in a] + [_fmt6(v) for v in p] + ["1" if r else "0"]
            w.writerow(row)

    def to_csv_str(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, fp, geometry: DeltaGeometry, grid_shape=None) -> "WorkspaceGrid":
        rows = list(csv.reader(fp))
        if not rows or tuple(rows[0]) != cls.CSV_HEADER:
            raise ValueError(f"expected header {','.join(cls.CSV_HEADER)}")
        acts, pts, flags = [], [], []
        for row in rows[1:]:
            acts.append([float(v) for v in row[0:3]])
            pts.append([float(v) for v in row[3:6]])
            flags.append(row[6].strip() == "1")
        n = len(acts)
        shape = tuple(grid_shape) if grid_shape else (n, 1, 1)
        return cls(
            geometry=geometry,
            grid_shape=shape,
            actuations=np.asarray(acts, dtype=float),
            points=np.asarray(pts, dtype=float),
            reachable=np.asarray(flags, dtype=bool),
        )

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "geometry": self.geometry.to_dict(),
            "grid_shape": list(self.grid_shape),
            "actuations": self.actuations.tolist(),
            "points": [
                [None if not r else float(v) for v in p]
                for p, r in zip(self.points, self.reachable)
            ],
            "reachable": [bool(r) for r in self.reachable],
        }


def _fmt6(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.6g}"


def sample_workspace(
    geometry: DeltaGeometry,
    grid_shape: tuple[int, int, int] = (5, 5, 5),
) -> WorkspaceGrid:
    """Evaluate FK over a regular lattice covering [0, stroke]^3.

    Lattice nodes whose spheres fail to intersect are kept as misses so the
    record covers the whole lattice.
    """
    n1, n2, n3 = grid_shape
    axes = [np.linspace(0.0, geometry.stroke, n) for n in (n1, n2, n3)]
    g1, g2, g3 = np.meshgrid(*axes, indexing="ij")
    lattice = np.stack([g1.ravel(), g2.ravel(), g3.ravel()], axis=-1)
    points, valid = forward_kinematics_masked(geometry, lattice)
    return WorkspaceGrid(
        geometry=geometry,
        grid_shape=(n1, n2, n3),
        actuations=lattice,
        points=points,
        reachable=valid,
    )


@dataclass(frozen=True)
class WorkspaceMetrics:
    bbox_min: tuple[float, float, float]
    bbox_max: tuple[float, float, float]
    extents: tuple[float, float, float]
    hull_volume: float

    def to_dict(self) -> dict:
        return {
            "bbox_min": list(self.bbox_min),
            "bbox_max": list(self.bbox_max),
            "extents": list(self.extents),
            "hull_volume": self.hull_volume,
        }


def workspace_metrics(grid: WorkspaceGrid) -> WorkspaceMetrics:
    """Bounding box and convex-hull volume of the reachable samples.

    Fewer than four non-degenerate points yield zero hull volume.
    """
    pts = grid.reachable_points
    if pts.shape[0] == 0:
        z = (0.0, 0.0, 0.0)
        return WorkspaceMetrics(z, z, z, 0.0)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    volume = hull_volume(pts)
    return WorkspaceMetrics(tuple(lo), tuple(hi), tuple(hi - lo), volume)


def hull_volume(points: np.ndarray) -> float:
    """Convex-hull volume of a point cloud; 0 for degenerate clouds."""
    from scipy.spatial import ConvexHull, QhullError

    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 4:
        return 0.0
    try:
        return float(ConvexHull(pts).volume)
    except QhullError:
        return 0.0


def workspace_sweep(
    base_radii,
    link_lengths,
    *,
    ee_radius: float = 6.0,
    stroke: float = 20.0,
    grid_shape: tuple[int, int, int] = (5, 5, 5),
) -> list[dict]:
    """Hull volume for every (base_radius, link_length) combination.

    Returns one record per combination; used to study the reach/size
    trade-off when choosing finger dimensions.
    """
    records = []
    for db in base_radii:
        for dl in link_lengths:
            geom = DeltaGeometry(
                base_radius=db, ee_radius=ee_radius, link_length=dl, stroke=stroke
            )
            grid = sample_workspace(geom, grid_shape)
            m = workspace_metrics(grid)
            records.append(
                {
                    "base_radius": db,
                    "link_length": dl,
                    "reachable_count": grid.reachable_count,
                    "hull_volume": m.hull_volume,
                    "extents": list(m.extents),
                }
            )
    return records


def rotation_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def geometry_to_json(geometry: DeltaGeometry) -> str:
    return json.dumps({"schema_version": 1, "geometry": geometry.to_dict()}, indent=2)
