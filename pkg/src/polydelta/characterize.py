"""Ingestion and statistics for hardware characterization logs.

Two log families are supported, both plain CSV with fixed headers:

* pose logs (``a1,a2,a3,x,y,z,roll,pitch,yaw``) — commanded carriage
  heights in mm and the end-effector pose observed by an external tracker
  (positions in mm, intrinsic XYZ Euler angles in degrees); and
* force logs (``direction,a1,a2,a3,advance,force``) — rectified contact
  force in N measured while advancing the carriages by ``advance`` mm
  toward one of five fixed touch faces.

The statistics are deliberately pedestrian: per-axis mean absolute error
of the observed pose against the rigid kinematic model, and ordinary
least squares force-vs-advance fits per touch direction.  All operations
are pure and single-threaded; re-ingesting a serialized log reproduces
every statistic bit for bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .kinematics import STROKE_EPS, DeltaGeometry, forward_kinematics_masked

POSE_LOG_HEADER = ("a1", "a2", "a3", "x", "y", "z", "roll", "pitch", "yaw")
FORCE_LOG_HEADER = ("direction", "a1", "a2", "a3", "advance", "force")
FORCE_DIRECTIONS = ("+X", "-X", "+Y", "-Y", "-Z")

# Translational / rotational MAE measured on a motion-captured physical
# prototype of this finger class.  Reports show these as a comparison band
# for context; they are reference hardware numbers, never a test target.
HARDWARE_REFERENCE_MAE_MM = (0.73, 0.77, 0.43)
HARDWARE_REFERENCE_MAE_DEG = (3.36, 2.28, 3.97)


class CharacterizeError(ValueError):
    """Base class for log ingestion and analysis failures."""


class MalformedLogError(CharacterizeError):
    """The CSV text does not match the required header or value domain."""


class InsufficientDataError(CharacterizeError):
    """A statistic was requested over a group with too few usable rows."""


def _read_rows(text: str, header: tuple[str, ...]) -> list[list[str]]:
    reader = csv.reader(io.StringIO(text))
    try:
        got = next(reader)
    except StopIteration:
        raise MalformedLogError("empty log: missing header row") from None
    if tuple(h.strip() for h in got) != header:
        raise MalformedLogError(
            f"bad header: expected {','.join(header)!r}, got {','.join(got)!r}"
        )
    rows = []
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedLogError(
                f"row {len(rows) + 2}: expected {len(header)} fields, got {len(row)}"
            )
        rows.append(row)
    return rows


def _parse_floats(cells, row_index: int) -> list[float]:
    out = []
    for cell in cells:
        try:
            v = float(cell)
        except ValueError:
            raise MalformedLogError(f"row {row_index}: non-numeric value {cell!r}") from None
        if not np.isfinite(v):
            raise MalformedLogError(f"row {row_index}: non-finite value {cell!r}")
        out.append(v)
    return out


def _float_cell(v: float) -> str:
    # repr of a Python float is the shortest string that round-trips the
    # exact bit pattern, which is what makes serialize -> ingest lossless
    return repr(float(v))


# ===================== pose logs =====================


@dataclass(frozen=True)
class PoseLog:
    """Commanded actuations with externally observed end-effector poses."""

    actuation: np.ndarray  # (n, 3) mm
    position: np.ndarray  # (n, 3) mm
    rpy_deg: np.ndarray  # (n, 3) degrees, intrinsic XYZ

    def __post_init__(self):
        a = np.asarray(self.actuation, dtype=float).reshape(-1, 3)
        p = np.asarray(self.position, dtype=float).reshape(-1, 3)
        r = np.asarray(self.rpy_deg, dtype=float).reshape(-1, 3)
        if not (a.shape == p.shape == r.shape):
            raise MalformedLogError("actuation, position, rpy_deg must align")
        if not (np.isfinite(a).all() and np.isfinite(p).all() and np.isfinite(r).all()):
            raise MalformedLogError("pose log contains non-finite values")
        object.__setattr__(self, "actuation", a)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "rpy_deg", r)

    def __len__(self) -> int:
        return self.actuation.shape[0]

    @classmethod
    def from_csv(cls, text: str) -> "PoseLog":
        rows = _read_rows(text, POSE_LOG_HEADER)
        vals = np.array(
            [_parse_floats(r, i + 2) for i, r in enumerate(rows)], dtype=float
        ).reshape(-1, 9)
        return cls(vals[:, 0:3], vals[:, 3:6], vals[:, 6:9])

    @classmethod
    def load(cls, path) -> "PoseLog":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_csv(fh.read())

    def to_csv(self) -> str:
        lines = [",".join(POSE_LOG_HEADER)]
        for a, p, r in zip(self.actuation, self.position, self.rpy_deg):
            lines.append(",".join(_float_cell(v) for v in (*a, *p, *r)))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class KinematicsReport:
    """Per-axis MAE of observed poses against the rigid model."""

    mae_xyz: tuple[float, float, float]  # mm
    mae_rpy: tuple[float, float, float]  # degrees
    n_rows: int
    n_excluded: int
    excluded_rows: tuple[int, ...]
    errors_xyz: np.ndarray = field(repr=False)  # (n_used, 3) signed, mm
    errors_rpy: np.ndarray = field(repr=False)  # (n_used, 3) signed, deg

    def to_dict(self) -> dict:
        return {
            "mae_xyz_mm": list(self.mae_xyz),
            "mae_rpy_deg": list(self.mae_rpy),
            "n_rows": self.n_rows,
            "n_excluded": self.n_excluded,
            "excluded_rows": list(self.excluded_rows),
            "reference_mae_xyz_mm": list(HARDWARE_REFERENCE_MAE_MM),
            "reference_mae_rpy_deg": list(HARDWARE_REFERENCE_MAE_DEG),
        }

    def errors_csv(self) -> str:
        """Per-point signed errors for plotting (model minus nothing: obs - model)."""
        lines = ["err_x,err_y,err_z,err_roll,err_pitch,err_yaw"]
        for exyz, erpy in zip(self.errors_xyz, self.errors_rpy):
            lines.append(",".join(_float_cell(v) for v in (*exyz, *erpy)))
        return "\n".join(lines) + "\n"


def kinematics_mae(log: PoseLog, geom: DeltaGeometry) -> KinematicsReport:
    """Mean absolute pose error of a log against the kinematic model.

    The model pose for each row is ``forward_kinematics(geom, a)`` with
    identically zero orientation — the ideal platform never tilts, so the
    rotational error is simply the observed Euler triplet.  Rows whose
    commanded actuation the model cannot realize (outside the stroke, or
    carriage spheres sharing no point) are excluded from the averages and
    reported in ``excluded_rows``.
    """
    if len(log) == 0:
        raise InsufficientDataError("pose log has no rows")
    model, valid = forward_kinematics_masked(geom, log.actuation)
    in_stroke = np.all(
        (log.actuation >= -STROKE_EPS) & (log.actuation <= geom.stroke + STROKE_EPS),
        axis=1,
    )
    used = valid & in_stroke
    if not used.any():
        raise InsufficientDataError("every row is unreachable for this geometry")
    errors_xyz = log.position[used] - model[used]
    errors_rpy = log.rpy_deg[used].copy()
    mae_xyz = np.abs(errors_xyz).mean(axis=0)
    mae_rpy = np.abs(errors_rpy).mean(axis=0)
    excluded = np.nonzero(~used)[0]
    return KinematicsReport(
        mae_xyz=tuple(float(v) for v in mae_xyz),
        mae_rpy=tuple(float(v) for v in mae_rpy),
        n_rows=len(log),
        n_excluded=int(excluded.size),
        excluded_rows=tuple(int(i) for i in excluded),
        errors_xyz=errors_xyz,
        errors_rpy=errors_rpy,
    )


# ===================== force logs =====================


def _normalize_direction(raw: str, row_index: int) -> str:
    d = raw.strip().replace("−", "-").upper()
    if d in FORCE_DIRECTIONS:
        return d
    raise MalformedLogError(
        f"row {row_index}: direction {raw!r} not in {'/'.join(FORCE_DIRECTIONS)}"
    )


@dataclass(frozen=True)
class ForceLog:
    """Rectified contact-force measurements versus actuation advance."""

    direction: tuple[str, ...]
    actuation: np.ndarray  # (n, 3) mm
    advance: np.ndarray  # (n,) mm
    force: np.ndarray  # (n,) N, rectified
    tag: str = ""  # label for the geometry this log was measured on

    def __post_init__(self):
        a = np.asarray(self.actuation, dtype=float).reshape(-1, 3)
        adv = np.asarray(self.advance, dtype=float).reshape(-1)
        f = np.asarray(self.force, dtype=float).reshape(-1)
        d = tuple(self.direction)
        if not (len(d) == a.shape[0] == adv.shape[0] == f.shape[0]):
            raise MalformedLogError("force log columns must align")
        if not (np.isfinite(a).all() and np.isfinite(adv).all() and np.isfinite(f).all()):
            raise MalformedLogError("force log contains non-finite values")
        if (f < 0).any():
            raise MalformedLogError("force log contains negative (unrectified) forces")
        bad = [x for x in d if x not in FORCE_DIRECTIONS]
        if bad:
            raise MalformedLogError(f"unknown directions {bad[:3]!r}")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "actuation", a)
        object.__setattr__(self, "advance", adv)
        object.__setattr__(self, "force", f)

    def __len__(self) -> int:
        return len(self.direction)

    @classmethod
    def from_csv(cls, text: str, *, tag: str = "") -> "ForceLog":
        rows = _read_rows(text, FORCE_LOG_HEADER)
        dirs = [_normalize_direction(r[0], i + 2) for i, r in enumerate(rows)]
        vals = np.array(
            [_parse_floats(r[1:], i + 2) for i, r in enumerate(rows)], dtype=float
        ).reshape(-1, 5)
        # load-cell sign depends on which face was probed; rectify on ingest
        return cls(tuple(dirs), vals[:, 0:3], vals[:, 3], np.abs(vals[:, 4]), tag=tag)

    @classmethod
    def load(cls, path, *, tag: str = "") -> "ForceLog":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_csv(fh.read(), tag=tag)

    def to_csv(self) -> str:
        lines = [",".join(FORCE_LOG_HEADER)]
        for d, a, adv, f in zip(self.direction, self.actuation, self.advance, self.force):
            lines.append(d + "," + ",".join(_float_cell(v) for v in (*a, adv, f)))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DirectionFit:
    """Ordinary least squares force = slope * advance + intercept."""

    direction: str
    tag: str
    slope: float  # N/mm
    intercept: float  # N
    r2: float
    stderr: float  # standard error of the slope
    ci95: tuple[float, float]  # 95% confidence interval on the slope
    n: int

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "tag": self.tag,
            "slope_n_per_mm": self.slope,
            "intercept_n": self.intercept,
            "r2": self.r2,
            "stderr": self.stderr,
            "ci95": [self.ci95[0], self.ci95[1]],
            "n": self.n,
        }


def force_fit(log: ForceLog, *, tag: str | None = None) -> dict[str, DirectionFit]:
    """Per-direction linear fits of force against actuation advance.

    Returns fits for every direction present in the log, keyed by
    direction and stamped with the log's geometry tag (overridable via
    ``tag``).  A present direction with fewer than two distinct advance
    values cannot support a line and raises InsufficientDataError, as
    does an empty log.
    """
    if len(log) == 0:
        raise InsufficientDataError("force log has no rows")
    group_tag = log.tag if tag is None else tag
    dirs = np.array(log.direction)
    fits: dict[str, DirectionFit] = {}
    for d in FORCE_DIRECTIONS:
        mask = dirs == d
        if not mask.any():
            continue
        adv = log.advance[mask]
        f = log.force[mask]
        if np.unique(adv).size < 2:
            raise InsufficientDataError(
                f"direction {d}: need >= 2 distinct advance values, got {np.unique(adv).size}"
            )
        res = stats.linregress(adv, f)
        n = int(adv.size)
        if n > 2 and np.isfinite(res.stderr) and res.stderr > 0:
            half = float(stats.t.ppf(0.975, n - 2)) * float(res.stderr)
            ci = (float(res.slope) - half, float(res.slope) + half)
        else:
            ci = (float(res.slope), float(res.slope))
        fits[d] = DirectionFit(
            direction=d,
            tag=group_tag,
            slope=float(res.slope),
            intercept=float(res.intercept),
            r2=float(res.rvalue) ** 2,
            stderr=float(res.stderr),
            ci95=ci,
            n=n,
        )
    return fits


# ===================== geometry sweeps =====================


def sweep_report(geoms, *, grid_shape: tuple[int, int, int] = (5, 5, 5)) -> list[dict]:
    """Workspace metrics for a list of candidate finger geometries.

    One row per geometry, in input order: dimensions, reachable convex-hull
    volume, and bounding box.  Exposes the size/reach trade-off when
    choosing base radius and link length.
    """
    from .kinematics import sample_workspace, workspace_metrics

    rows = []
    for geom in geoms:
        grid = sample_workspace(geom, grid_shape)
        m = workspace_metrics(grid)
        rows.append(
            {
                "base_radius": geom.base_radius,
                "link_length": geom.link_length,
                "ee_radius": geom.ee_radius,
                "stroke": geom.stroke,
                "reachable_count": grid.reachable_count,
                "hull_volume": m.hull_volume,
                "bbox_min": list(m.bbox_min),
                "bbox_max": list(m.bbox_max),
                "extents": list(m.extents),
            }
        )
    return rows
