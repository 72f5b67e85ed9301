"""Multi-finger hand assembled from linear Delta fingers.

Fingers are placed on a circle around the hand z-axis, each rotated so its
first rail (the "inner" rail) faces the axis.  Actuators may be shared
between links through a coupling topology; the reduced actuation vector is
expanded to per-link values by a 0/1 matrix and collapsed back by its
least-squares pseudo-inverse, which for disjoint coupling groups is plain
row averaging.

Sign convention that follows from the FK branch (platform below carriages):
raising a carriage pulls the platform horizontally toward that rail.  Driving
the inner-rail actuators toward full stroke therefore draws the fingertips
toward the hand axis — that is the closing direction.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kinematics import (
    DeltaGeometry,
    OutOfStrokeError,
    UnreachableError,
    forward_kinematics,
    forward_kinematics_masked,
    inverse_kinematics,
    rotation_z,
)

SCHEMA_VERSION = 1

GROUP_GEOMETRY_TOL = 1e-6  # mm / rad, for coupled-rail placement checks


class InvalidTopologyError(ValueError):
    """Coupling topology is inconsistent with the hand geometry."""


class FrameCollisionWarning(UserWarning):
    """Two fingers' rail sets are closer than the configured clearance."""


# ===================== hand parameters =====================


@dataclass(frozen=True)
class HandParams:
    """Placement parameters plus one DeltaGeometry per finger.

    n_fingers            finger count N (1..6 supported)
    coupling_link_length radial distance from the hand axis to each inner rail
    fingertip_angle      azimuthal spacing between fingers, radians
    actuation_height     z offset of the rail base plane in the hand frame
    fingers              per-finger geometry
    fingertip_offset     (N, 3) tip position in each platform frame
    """

    n_fingers: int = 4
    coupling_link_length: float = 20.0
    fingertip_angle: float = math.pi / 2.0
    actuation_height: float = 0.0
    fingers: tuple[DeltaGeometry, ...] = ()
    fingertip_offset: tuple = ()

    def __post_init__(self):
        if not (1 <= self.n_fingers <= 6):
            raise ValueError("n_fingers must be within 1..6")
        if self.coupling_link_length < 0:
            raise ValueError("coupling_link_length must be non-negative")
        if not (0.0 < self.fingertip_angle <= 2.0 * math.pi / self.n_fingers + 1e-12):
            raise ValueError(
                "fingertip_angle must lie in (0, 2*pi/n_fingers]"
            )
        if not self.fingers:
            object.__setattr__(
                self, "fingers", tuple(DeltaGeometry() for _ in range(self.n_fingers))
            )
        if len(self.fingers) != self.n_fingers:
            raise ValueError("fingers must have n_fingers entries")
        if not self.fingertip_offset:
            object.__setattr__(
                self,
                "fingertip_offset",
                tuple((0.0, 0.0, -15.0) for _ in range(self.n_fingers)),
            )
        if len(self.fingertip_offset) != self.n_fingers:
            raise ValueError("fingertip_offset must have n_fingers entries")

    @property
    def n_links(self) -> int:
        return 3 * self.n_fingers

    def offsets_array(self) -> np.ndarray:
        return np.asarray(self.fingertip_offset, dtype=float).reshape(self.n_fingers, 3)

    def to_dict(self) -> dict:
        return {
            "n_fingers": self.n_fingers,
            "coupling_link_length": self.coupling_link_length,
            "fingertip_angle": self.fingertip_angle,
            "actuation_height": self.actuation_height,
            "fingers": [g.to_dict() for g in self.fingers],
            "fingertip_offset": [list(o) for o in self.fingertip_offset],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HandParams":
        return cls(
            n_fingers=int(d["n_fingers"]),
            coupling_link_length=float(d["coupling_link_length"]),
            fingertip_angle=float(d["fingertip_angle"]),
            actuation_height=float(d.get("actuation_height", 0.0)),
            fingers=tuple(DeltaGeometry.from_dict(g) for g in d["fingers"]),
            fingertip_offset=tuple(tuple(float(v) for v in o) for o in d["fingertip_offset"]),
        )


def standard_hand(n_fingers: int = 4, **overrides) -> HandParams:
    """Hand with the validated square-arrangement defaults.

    Four 20/6/45 fingers with 20 mm stroke, inner rails on a 20 mm circle,
    fingers every 90 degrees, straight 15 mm fingertips.
    """
    kw = dict(
        n_fingers=n_fingers,
        coupling_link_length=20.0,
        fingertip_angle=2.0 * math.pi / n_fingers,
        actuation_height=0.0,
    )
    kw.update(overrides)
    return HandParams(**kw)


# ===================== frames =====================


def finger_frames(params: HandParams, *, clearance: float = 2.0):
    """Rigid transform (R, t) of each finger base in the hand frame.

    Finger k sits at azimuth k * fingertip_angle with its local +x axis
    pointing at the hand axis, so the rail at local azimuth 0 lands at radial
    distance coupling_link_length from the axis.  Rails stay parallel to the
    hand z-axis.  Emits FrameCollisionWarning when rails of different fingers
    come closer than ``clearance``.
    """
    frames = []
    for k in range(params.n_fingers):
        phi = k * params.fingertip_angle
        geom = params.fingers[k]
        rho = params.coupling_link_length + geom.base_radius
        R = rotation_z(phi + math.pi)
        t = np.array(
            [rho * math.cos(phi), rho * math.sin(phi), params.actuation_height]
        )
        frames.append((R, t))

    xy = rail_positions_xy(params, frames)
    n = params.n_fingers
    for i in range(n):
        for j in range(i + 1, n):
            d = np.linalg.norm(xy[i][:, None, :] - xy[j][None, :, :], axis=-1)
            if d.min() < clearance:
                warnings.warn(
                    f"fingers {i} and {j} have rails {d.min():.3f} mm apart "
                    f"(clearance {clearance} mm)",
                    FrameCollisionWarning,
                    stacklevel=2,
                )
    return frames


def rail_positions_xy(params: HandParams, frames=None) -> list[np.ndarray]:
    """Per finger, the (3, 2) hand-frame xy positions of its rails."""
    if frames is None:
        frames = _frames_no_warn(params)
    out = []
    for k, (R, t) in enumerate(frames):
        geom = params.fingers[k]
        ang = np.asarray(geom.rail_angles)
        local = np.stack(
            [geom.base_radius * np.cos(ang), geom.base_radius * np.sin(ang), np.zeros(3)],
            axis=-1,
        )
        world = local @ R.T + t
        out.append(world[:, :2])
    return out


def _frames_no_warn(params: HandParams):
    frames = []
    for k in range(params.n_fingers):
        phi = k * params.fingertip_angle
        geom = params.fingers[k]
        rho = params.coupling_link_length + geom.base_radius
        frames.append(
            (
                rotation_z(phi + math.pi),
                np.array([rho * math.cos(phi), rho * math.sin(phi), params.actuation_height]),
            )
        )
    return frames


# ===================== coupling topology =====================


@dataclass(frozen=True)
class CouplingTopology:
    """Assignment of the hand's 3N links to m reduced actuators.

    link_to_actuator[l] is the reduced index driving link l, where link
    l = 3 * finger + rail.  Every reduced actuator must drive at least one
    link.
    """

    n_reduced: int
    link_to_actuator: tuple[int, ...]
    name: str = "custom"

    def __post_init__(self):
        if self.n_reduced < 1:
            raise InvalidTopologyError("need at least one reduced actuator")
        used = set()
        for l, j in enumerate(self.link_to_actuator):
            if not (0 <= j < self.n_reduced):
                raise InvalidTopologyError(
                    f"link {l} mapped to unknown actuator {j}"
                )
            used.add(j)
        if used != set(range(self.n_reduced)):
            raise InvalidTopologyError("every reduced actuator must drive some link")

    @property
    def n_links(self) -> int:
        return len(self.link_to_actuator)

    @property
    def actuator_to_links(self) -> tuple[tuple[int, ...], ...]:
        groups = [[] for _ in range(self.n_reduced)]
        for l, j in enumerate(self.link_to_actuator):
            groups[j].append(l)
        return tuple(tuple(g) for g in groups)

    def to_dict(self) -> dict:
        return {
            "n_reduced": self.n_reduced,
            "link_to_actuator": list(self.link_to_actuator),
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CouplingTopology":
        return cls(
            n_reduced=int(d["n_reduced"]),
            link_to_actuator=tuple(int(v) for v in d["link_to_actuator"]),
            name=str(d.get("name", "custom")),
        )


def identity_topology(n_fingers: int = 4) -> CouplingTopology:
    """One actuator per link (m = 3N)."""
    n = 3 * n_fingers
    return CouplingTopology(n, tuple(range(n)), name=str(n))


def center_coupled_topology(n_fingers: int = 4) -> CouplingTopology:
    """All inner links share actuator 0; boundary links stay independent.

    m = 2N + 1.  Actuator 0 is the open/close drive; the remaining indices
    enumerate the boundary links finger-major.
    """
    mapping = []
    nxt = 1
    for k in range(n_fingers):
        mapping.append(0)
        mapping.append(nxt)
        nxt += 1
        mapping.append(nxt)
        nxt += 1
    return CouplingTopology(2 * n_fingers + 1, tuple(mapping), name=str(2 * n_fingers + 1))


def paired_boundary_topology(params: HandParams) -> CouplingTopology:
    """Center coupling plus nearest boundary rails of adjacent fingers paired.

    m = N + 1.  For each adjacent finger pair the two geometrically closest
    boundary rails share one actuator, the physical arrangement that lets a
    single carriage plate drive both.
    """
    n = params.n_fingers
    xy = rail_positions_xy(params, _frames_no_warn(params))
    mapping = [-1] * (3 * n)
    for k in range(n):
        mapping[3 * k] = 0  # inner links on the shared drive
    for k in range(n):
        k2 = (k + 1) % n
        best = None
        for r1 in (1, 2):
            for r2 in (1, 2):
                d = float(np.linalg.norm(xy[k][r1] - xy[k2][r2]))
                if best is None or d < best[0]:
                    best = (d, r1, r2)
        _, r1, r2 = best
        idx = 1 + k
        if mapping[3 * k + r1] != -1 or mapping[3 * k2 + r2] != -1:
            raise InvalidTopologyError(
                "boundary pairing produced conflicting assignments; "
                "finger placement is too irregular to pair neighbours"
            )
        mapping[3 * k + r1] = idx
        mapping[3 * k2 + r2] = idx
    if any(v == -1 for v in mapping):
        raise InvalidTopologyError("boundary pairing left unassigned links")
    return CouplingTopology(n + 1, tuple(mapping), name=str(n + 1))


def preset_topology(params: HandParams, name: str) -> CouplingTopology:
    """Look up a preset by its actuator-count name, e.g. '12', '9', '5'."""
    n = params.n_fingers
    presets = {
        str(3 * n): lambda: identity_topology(n),
        str(2 * n + 1): lambda: center_coupled_topology(n),
        str(n + 1): lambda: paired_boundary_topology(params),
    }
    if name not in presets:
        raise InvalidTopologyError(f"unknown preset {name!r} for {n} fingers")
    return presets[name]()


def validate_topology(params: HandParams, topology: CouplingTopology) -> None:
    """Check the coupling against the hand geometry.

    Rails sharing an actuator must be drivable by one rigid carriage: all
    parallel (they are, by construction — tilted rails are out of scope) and
    placed symmetrically, i.e. at equal lateral distance from the group's
    centroid axis within GROUP_GEOMETRY_TOL.  A centred group of inner rails
    and a facing pair of boundary rails both satisfy this; an arbitrary
    lopsided grouping does not.
    """
    if topology.n_links != params.n_links:
        raise InvalidTopologyError(
            f"topology maps {topology.n_links} links, hand has {params.n_links}"
        )
    xy = rail_positions_xy(params, _frames_no_warn(params))
    flat = np.concatenate(xy, axis=0)  # (3N, 2) rail xy by link index
    for j, links in enumerate(topology.actuator_to_links):
        pts = flat[list(links)]
        centroid = pts.mean(axis=0)
        offsets = np.linalg.norm(pts - centroid, axis=1)
        if offsets.size > 1 and np.ptp(offsets) > GROUP_GEOMETRY_TOL:
            raise InvalidTopologyError(
                f"actuator {j} couples rails at unequal offsets "
                f"{offsets.round(6).tolist()} from their common axis"
            )


# ===================== synergy matrices =====================


@dataclass(frozen=True)
class SynergyMaps:
    """Expansion C (3N x m) and projection P = (C^T C)^-1 C^T (m x 3N).

    C has exactly one 1 per row; P averages each coupling group, so P C is
    the identity on the reduced space.
    """

    expansion: np.ndarray
    projection: np.ndarray

    @property
    def n_reduced(self) -> int:
        return self.expansion.shape[1]

    @property
    def n_links(self) -> int:
        return self.expansion.shape[0]

    def expand(self, reduced: np.ndarray) -> np.ndarray:
        return np.asarray(reduced, dtype=float) @ self.expansion.T

    def reduce(self, full: np.ndarray) -> np.ndarray:
        return np.asarray(full, dtype=float) @ self.projection.T


def build_synergy(params: HandParams, topology: CouplingTopology) -> SynergyMaps:
    """Validate the topology and build its expansion/projection pair."""
    validate_topology(params, topology)
    n_links = topology.n_links
    m = topology.n_reduced
    C = np.zeros((n_links, m))
    for l, j in enumerate(topology.link_to_actuator):
        C[l, j] = 1.0
    P = np.zeros((m, n_links))
    for j, links in enumerate(topology.actuator_to_links):
        P[j, list(links)] = 1.0 / len(links)
    return SynergyMaps(expansion=C, projection=P)


# ===================== hand FK / IK =====================


def hand_fk(
    params: HandParams,
    topology: CouplingTopology,
    reduced,
    *,
    synergy: SynergyMaps | None = None,
    frames=None,
) -> np.ndarray:
    """Fingertip positions (..., N, 3) in the hand frame for reduced actuation."""
    syn = synergy or build_synergy(params, topology)
    if frames is None:
        frames = _frames_no_warn(params)
    reduced = np.asarray(reduced, dtype=float)
    full = syn.expand(reduced)  # (..., 3N)
    offs = params.offsets_array()
    tips = np.empty(full.shape[:-1] + (params.n_fingers, 3))
    for k, (R, t) in enumerate(frames):
        a = full[..., 3 * k : 3 * k + 3]
        p = forward_kinematics(params.fingers[k], a, check_stroke=False)
        tips[..., k, :] = (p + offs[k]) @ R.T + t
    return tips


@dataclass(frozen=True)
class HandIKResult:
    reduced: np.ndarray        # (m,) actuation after projection
    requested_full: np.ndarray  # (3N,) per-link request before projection
    residuals: np.ndarray      # (N,) fingertip position error, mm
    tips: np.ndarray           # (N, 3) fingertips realised at ``reduced``


def hand_ik(
    params: HandParams,
    topology: CouplingTopology,
    targets,
    *,
    synergy: SynergyMaps | None = None,
    enforce_stroke: bool = True,
) -> HandIKResult:
    """Reduced actuation realising the fingertip targets as well as possible.

    Per-finger closed-form IK yields the per-link request; projecting it with
    P gives the actuation-space least-squares fit over the coupling.  The
    residuals report how far each fingertip lands from its target — zero
    exactly when the target pattern is compatible with the coupling.

    Raises UnreachableError (with the finger index) when a finger's Delta
    cannot reach its target at any carriage height, and OutOfStrokeError
    (with the actuator index) when the projected actuation leaves the stroke.
    """
    syn = synergy or build_synergy(params, topology)
    frames = _frames_no_warn(params)
    offs = params.offsets_array()
    targets = np.asarray(targets, dtype=float).reshape(params.n_fingers, 3)

    full = np.empty(params.n_links)
    for k, (R, t) in enumerate(frames):
        local = (targets[k] - t) @ R - offs[k]
        try:
            a, _ = inverse_kinematics(params.fingers[k], local, enforce_stroke=False)
        except UnreachableError as e:
            raise UnreachableError(f"finger {k}: {e}") from None
        full[3 * k : 3 * k + 3] = a

    reduced = syn.reduce(full)
    stroke = np.array([params.fingers[k].stroke for k in range(params.n_fingers)])
    lo, hi = 0.0, float(stroke.min())
    # snap round-off, then enforce
    reduced = np.where(np.abs(reduced) < 1e-9, 0.0, reduced)
    reduced = np.where(np.abs(reduced - hi) < 1e-9, hi, reduced)
    if enforce_stroke:
        bad = np.where((reduced < lo) | (reduced > hi))[0]
        if bad.size:
            raise OutOfStrokeError(
                f"reduced actuator {int(bad[0])} = {reduced[bad[0]]:.6f} mm "
                f"outside [0, {hi}]"
            )
    tips = hand_fk(params, topology, reduced, synergy=syn, frames=frames)
    residuals = np.linalg.norm(tips - targets, axis=-1)
    return HandIKResult(reduced=reduced, requested_full=full, residuals=residuals, tips=tips)


# ===================== hand workspace =====================


@dataclass
class FingerWorkspace:
    """Fingertip reachability of one finger, expressed in the hand frame."""

    finger: int
    actuations: np.ndarray  # (L, 3) per-link values for this finger
    points: np.ndarray      # (L, 3) fingertip positions, NaN where missed
    reachable: np.ndarray   # (L,) bool

    @property
    def reachable_points(self) -> np.ndarray:
        return self.points[self.reachable]


@dataclass
class HandWorkspace:
    per_finger: list
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    overlap: dict  # (i, j) -> overlap volume, mm^3

    @property
    def extents(self) -> np.ndarray:
        return self.bbox_max - self.bbox_min

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "bbox_min": self.bbox_min.tolist(),
            "bbox_max": self.bbox_max.tolist(),
            "extents": self.extents.tolist(),
            "overlap": {f"{i}-{j}": v for (i, j), v in sorted(self.overlap.items())},
            "per_finger": [
                {
                    "finger": fw.finger,
                    "reachable_count": int(fw.reachable.sum()),
                    "points": fw.reachable_points.tolist(),
                }
                for fw in self.per_finger
            ],
        }


def hand_workspace(
    params: HandParams,
    topology: CouplingTopology,
    *,
    grid_per_axis: int = 5,
    overlap_resolution: float = 1.0,
    compute_overlap: bool = True,
) -> HandWorkspace:
    """Fingertip workspaces over the reduced-actuation lattice.

    Each finger's reachable set depends only on the reduced actuators driving
    its own links, so the product lattice factorises per finger and the cost
    stays at N * grid^3 instead of grid^m.  Overlap volumes are estimated by
    counting voxel centres (at ``overlap_resolution``) inside both fingers'
    fingertip hulls.
    """
    frames = _frames_no_warn(params)
    offs = params.offsets_array()
    link_map = topology.link_to_actuator

    per_finger = []
    for k in range(params.n_fingers):
        geom = params.fingers[k]
        acts = [link_map[3 * k + r] for r in range(3)]
        distinct = sorted(set(acts))
        axes = [np.linspace(0.0, geom.stroke, grid_per_axis) for _ in distinct]
        mesh = np.meshgrid(*axes, indexing="ij")
        reduced_vals = np.stack([m.ravel() for m in mesh], axis=-1)
        col = {j: i for i, j in enumerate(distinct)}
        triples = np.stack([reduced_vals[:, col[acts[r]]] for r in range(3)], axis=-1)
        pts, ok = forward_kinematics_masked(geom, triples)
        R, t = frames[k]
        pts = (pts + offs[k]) @ R.T + t
        per_finger.append(
            FingerWorkspace(finger=k, actuations=triples, points=pts, reachable=ok)
        )

    all_pts = np.concatenate([fw.reachable_points for fw in per_finger], axis=0)
    bbox_min = all_pts.min(axis=0)
    bbox_max = all_pts.max(axis=0)

    overlap = {}
    if compute_overlap:
        for i in range(params.n_fingers):
            for j in range(i + 1, params.n_fingers):
                overlap[(i, j)] = _hull_overlap_volume(
                    per_finger[i].reachable_points,
                    per_finger[j].reachable_points,
                    overlap_resolution,
                )
    return HandWorkspace(
        per_finger=per_finger, bbox_min=bbox_min, bbox_max=bbox_max, overlap=overlap
    )


def _hull_overlap_volume(pts_a: np.ndarray, pts_b: np.ndarray, resolution: float) -> float:
    """Volume of hull(A) intersect hull(B) by voxel-centre counting."""
    from scipy.spatial import Delaunay, QhullError

    lo = np.maximum(pts_a.min(axis=0), pts_b.min(axis=0))
    hi = np.minimum(pts_a.max(axis=0), pts_b.max(axis=0))
    if np.any(hi <= lo):
        return 0.0
    try:
        tri_a = Delaunay(pts_a)
        tri_b = Delaunay(pts_b)
    except QhullError:
        return 0.0
    axes = [np.arange(l + 0.5 * resolution, h, resolution) for l, h in zip(lo, hi)]
    if any(len(ax) == 0 for ax in axes):
        return 0.0
    g = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([x.ravel() for x in g], axis=-1)
    inside = (tri_a.find_simplex(centers) >= 0) & (tri_b.find_simplex(centers) >= 0)
    return float(inside.sum()) * resolution**3


# ===================== serialization =====================


def hand_to_json(params: HandParams, topology: CouplingTopology) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "hand_params": params.to_dict(),
        "topology": topology.to_dict(),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def hand_from_json(text: str) -> tuple[HandParams, CouplingTopology]:
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {version!r}")
    params = HandParams.from_dict(doc["hand_params"])
    topology = CouplingTopology.from_dict(doc["topology"])
    validate_topology(params, topology)
    return params, topology
