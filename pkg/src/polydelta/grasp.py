"""Grasp synthesis and wrench-space quality for the coupled hand.

Contact forces live in discretised Coulomb friction cones.  A grasp's unit
wrenches (force, torque scaled by the object's characteristic radius) feed
two evaluations: force closure — the origin lies strictly inside the 6-D
convex hull of the wrench set — and the largest-ball quality, the distance
from the origin to the nearest facet of that hull.  Closure is decided by a
rank guard (a wrench set spanning fewer than six dimensions has no interior)
plus a feasibility linear program searching for a separating certificate.

Grasps are synthesised kinematically: fingertip spheres advance along the
coupled closing schedule until each touches the object, and a two-stage
sampler (pre-grasp pose grid, then truncated-normal actuation perturbations)
estimates closure statistics for a hand/object pairing.  Sampling is
reproducible: sample i draws from a generator seeded with seed + i, so
results are identical regardless of thread count.
"""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError
from scipy.stats import truncnorm

from .hand import CouplingTopology, HandParams, SynergyMaps, _frames_no_warn, build_synergy, hand_fk
from .kinematics import rotation_z
from .objects import ObjectModel

CLOSURE_MARGIN = 1e-6
NORMAL_TOL = 1e-6
RANK_TOL = 1e-9
GRASP_CSV_HEADER = ("height_mm", "yaw_deg", "sample", "closure", "q_lrw", "seed")
DEFAULT_YAW_SET = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)


class GraspError(RuntimeError):
    """Base class for grasp-evaluation failures."""


class DegenerateNormalError(GraspError):
    """Contact normal is not a unit vector within tolerance."""


class NotClosureError(GraspError):
    """Strict quality query on a wrench set without force closure."""


class StartPenetrationError(GraspError):
    """A fingertip already penetrates the object before closing starts."""


class GraspCancelled(GraspError):
    """A sampling run was stopped through its cancel_check hook."""


# ===================== contacts and wrenches =====================


@dataclass(frozen=True)
class ContactPoint:
    """A frictional point contact: where a fingertip touches the object."""

    position: tuple[float, float, float]
    normal: tuple[float, float, float]  # unit, pointing into the object
    mu: float = 0.5
    finger_index: int = -1

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > NORMAL_TOL:
            raise DegenerateNormalError(f"|normal| = {np.linalg.norm(n):.6f} is not 1")
        if self.mu < 0:
            raise ValueError("friction coefficient must be non-negative")


def tangent_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    """Right-handed orthonormal (t1, t2) spanning the plane normal to n.

    The reference axis is chosen deterministically (the world axis least
    aligned with n), so equal normals always produce equal bases.
    """
    n = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > NORMAL_TOL:
        raise DegenerateNormalError(f"|normal| = {norm:.6f} is not 1")
    n = n / norm
    ref = np.zeros(3)
    ref[int(np.argmin(np.abs(n)))] = 1.0
    t1 = np.cross(n, ref)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2


def equivariant_basis(index: int, positions, normals, centroid) -> tuple[np.ndarray, np.ndarray]:
    """Tangent basis for contact ``index`` that co-rotates with the set.

    The azimuth is seeded from contact-set geometry — the contact's own
    centroid arm, then the mean of the other arms, then the arm-ring plane
    normal — falling back to a world axis only for sets degenerate enough
    that quality is zero regardless.  Because every seed rotates rigidly
    with the contacts, so do the cone edges, making the wrench hull (and
    with it q_lrw) exactly rotation-invariant.
    """
    P = np.asarray(positions, dtype=float).reshape(-1, 3)
    N = np.asarray(normals, dtype=float).reshape(-1, 3)
    n = N[index] / np.linalg.norm(N[index])
    arms = P - np.asarray(centroid, dtype=float)
    seeds = [arms[index]]
    if len(P) > 1:
        seeds.append(np.delete(arms, index, axis=0).mean(axis=0))
        seeds.append(np.cross(arms, np.roll(arms, -1, axis=0)).sum(axis=0))
    seeds.extend(np.eye(3))
    for s in seeds:
        t_raw = s - (s @ n) * n
        norm = np.linalg.norm(t_raw)
        if norm > 1e-6 * max(np.linalg.norm(s), 1.0):
            t1 = t_raw / norm
            return t1, np.cross(n, t1)
    raise DegenerateNormalError("no tangent direction found")  # pragma: no cover


def cone_edges(normal, mu: float, n_edges: int = 8, basis=None) -> np.ndarray:
    """Unit force directions spanning the Coulomb cone around ``normal``.

    Edge j points along n + mu*(cos(2*pi*j/m) t1 + sin(...) t2); every edge
    sits at atan(mu) from the normal, and mu = 0 collapses the cone to the
    normal itself.  ``basis`` overrides the tangent frame (any orthonormal
    pair works; downstream quality is insensitive to the choice).
    """
    if n_edges < 3:
        raise ValueError("need at least 3 cone edges")
    if mu < 0:
        raise ValueError("friction coefficient must be non-negative")
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    if mu == 0.0:
        return n[None, :]
    t1, t2 = tangent_basis(n) if basis is None else basis
    phi = 2.0 * np.pi * np.arange(n_edges) / n_edges
    edges = n[None, :] + mu * (np.cos(phi)[:, None] * t1 + np.sin(phi)[:, None] * t2)
    return edges / np.linalg.norm(edges, axis=1, keepdims=True)


def discretize_cone(
    contact: ContactPoint,
    n_edges: int = 8,
    *,
    centroid,
    rho: float,
    basis=None,
) -> np.ndarray:
    """Primitive wrenches (n_edges, 6) of one contact's friction cone.

    Each row is (f, ((p - centroid)/rho) x f): unit force edge, then torque
    about the object centroid with the arm scaled by the characteristic
    radius so both halves are commensurate.
    """
    forces = cone_edges(contact.normal, contact.mu, n_edges, basis=basis)
    arm = (np.asarray(contact.position, dtype=float) - np.asarray(centroid, dtype=float)) / rho
    torques = np.cross(np.broadcast_to(arm, forces.shape), forces)
    return np.hstack([forces, torques])


@dataclass(frozen=True)
class WrenchSet:
    """Primitive wrenches of a grasp, with their source contacts."""

    wrenches: np.ndarray  # (K * m_e, 6)
    contacts: tuple[ContactPoint, ...]
    n_edges: int


def build_wrench_set(
    contacts,
    *,
    centroid,
    rho: float,
    n_edges: int = 8,
    basis_fn=None,
) -> WrenchSet:
    """Stack the friction-cone wrenches of every contact.

    Tangent bases default to the rotation-equivariant construction;
    ``basis_fn(index, contacts) -> (t1, t2)`` overrides it per contact.
    """
    contacts = tuple(contacts)
    if contacts:
        positions = [c.position for c in contacts]
        normals = [c.normal for c in contacts]
        W = np.vstack(
            [
                discretize_cone(
                    c,
                    n_edges,
                    centroid=centroid,
                    rho=rho,
                    basis=(
                        basis_fn(i, contacts)
                        if basis_fn is not None
                        else equivariant_basis(i, positions, normals, centroid)
                    ),
                )
                for i, c in enumerate(contacts)
            ]
        )
    else:
        W = np.zeros((0, 6))
    return WrenchSet(wrenches=W, contacts=contacts, n_edges=n_edges)


def wrench_set(contacts, normals, *, mu: float = 0.5, n_edges: int = 8, centroid, rho: float) -> np.ndarray:
    """Array-level convenience: wrenches for paired contact points/normals."""
    contacts = np.asarray(contacts, dtype=float).reshape(-1, 3)
    normals = np.asarray(normals, dtype=float).reshape(-1, 3)
    pts = [
        ContactPoint(tuple(p), tuple(n), mu=mu, finger_index=i)
        for i, (p, n) in enumerate(zip(contacts, normals))
    ]
    return build_wrench_set(pts, centroid=centroid, rho=rho, n_edges=n_edges).wrenches


def _as_wrench_array(ws) -> np.ndarray:
    if isinstance(ws, WrenchSet):
        return ws.wrenches
    return np.asarray(ws, dtype=float).reshape(-1, 6)


def force_closure(ws, margin: float = CLOSURE_MARGIN) -> bool:
    """Whether the origin lies strictly inside the 6-D wrench hull.

    A hull with interior needs at least 7 wrenches spanning all six
    dimensions (rank guard), and no separating certificate may exist: the
    linear program max t s.t. w_i . d >= t, |d|_inf <= 1 finds the best
    uniform offset of any half-space containing every wrench, which is zero
    exactly when the origin cannot be pushed off the hull.  Closure holds
    when that offset stays below ``margin``.
    """
    W = _as_wrench_array(ws)
    if W.shape[0] < 7:
        return False
    svals = np.linalg.svd(W, compute_uv=False)
    if svals[-1] < RANK_TOL * svals[0]:
        return False  # wrenches span < 6 dimensions: no interior
    # variables x = (d, t); minimise -t subject to t - w.d <= 0
    A_ub = np.hstack([-W, np.ones((W.shape[0], 1))])
    c = np.zeros(7)
    c[6] = -1.0
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(W.shape[0]),
        bounds=[(-1.0, 1.0)] * 6 + [(None, None)],
        method="highs",
    )
    if not res.success:  # pragma: no cover - bounded feasible LP
        raise GraspError(f"closure LP failed: {res.message}")
    return bool(res.x[6] < margin)


def q_lrw(ws, *, strict: bool = False) -> float:
    """Largest-ball grasp quality: radius of the biggest origin-centred ball
    inside the wrench hull.

    Equals the smallest origin-to-facet distance of the 6-D convex hull, and
    0 whenever the grasp lacks closure (fewer than 7 wrenches, degenerate
    hull, or origin outside).  With ``strict`` a non-closure set raises
    NotClosureError instead of scoring 0.
    """
    W = _as_wrench_array(ws)
    if strict and not force_closure(W):
        raise NotClosureError("wrench set does not achieve force closure")
    if W.shape[0] < 7:
        return 0.0  # a 6-D hull with interior needs at least 7 vertices
    try:
        hull = ConvexHull(W)
    except QhullError:
        return 0.0  # degenerate: wrenches span less than 6 dimensions
    # facet planes n.x + b <= 0 hold inside; -b is the origin-facet distance
    return max(0.0, float(-hull.equations[:, -1].max()))


@dataclass(frozen=True)
class GraspReport:
    """Evaluation of one grasp candidate."""

    is_force_closure: bool
    q_lrw: float
    contacts: tuple[ContactPoint, ...]
    hand_pose: "HandPose | None" = None
    reduced: np.ndarray | None = None
    rng_seed: int | None = None


def evaluate_contacts(
    contacts,
    obj: ObjectModel,
    *,
    n_edges: int = 8,
    hand_pose: "HandPose | None" = None,
    reduced=None,
    rng_seed: int | None = None,
) -> GraspReport:
    """Closure flag and quality for ContactPoints on an object (q is 0
    without closure, keeping q > 0 equivalent to the closure flag)."""
    contacts = tuple(contacts)
    ws = build_wrench_set(
        contacts, centroid=obj.centroid, rho=obj.characteristic_radius, n_edges=n_edges
    )
    closure = force_closure(ws)
    q = q_lrw(ws) if closure else 0.0
    return GraspReport(
        is_force_closure=closure,
        q_lrw=q,
        contacts=contacts,
        hand_pose=hand_pose,
        reduced=None if reduced is None else np.asarray(reduced, dtype=float),
        rng_seed=rng_seed,
    )


# ===================== kinematic closing =====================


@dataclass(frozen=True)
class HandPose:
    """Placement of the hand over the object: the hand frame is yawed about
    and translated along the world z-axis."""

    height: float = 0.0
    yaw: float = 0.0

    def transform(self, points: np.ndarray) -> np.ndarray:
        R = rotation_z(self.yaw)
        return points @ R.T + np.array([0.0, 0.0, self.height])


def closing_actuators(topology: CouplingTopology) -> tuple[int, ...]:
    """Actuators that drive at least one rail-0 (axis-facing) link — the
    open/close synergy coordinate of the topology."""
    return tuple(
        sorted({topology.link_to_actuator[l] for l in range(0, topology.n_links, 3)})
    )


@dataclass(frozen=True)
class ContactResult:
    """Outcome of a closing run: which fingers touched, where, and when."""

    contacts: tuple[ContactPoint, ...]
    touched: np.ndarray       # (N,) per finger
    touch_advance: np.ndarray  # (N,) closing advance at first touch, mm (nan if none)
    onset_reduced: np.ndarray  # (m,) actuation at the first touch overall
    final_reduced: np.ndarray  # (m,) actuation at the end of the schedule

    def __len__(self) -> int:
        return len(self.contacts)

    def __iter__(self):
        return iter(self.contacts)

    @property
    def positions(self) -> np.ndarray:
        return np.array([c.position for c in self.contacts]).reshape(-1, 3)

    @property
    def normals(self) -> np.ndarray:
        return np.array([c.normal for c in self.contacts]).reshape(-1, 3)


def close_until_contact(
    params: HandParams,
    topology: CouplingTopology,
    pose: HandPose,
    obj: ObjectModel,
    schedule=None,
    *,
    start=None,
    tip_radius: float = 5.0,
    step: float = 0.5,
    mu: float = 0.5,
    synergy: SynergyMaps | None = None,
) -> ContactResult:
    """Advance the closing group until each fingertip sphere touches.

    The closing actuators move inward together from ``start`` (default fully
    open) along ``schedule`` — advances in mm from the start, monotone with
    steps no coarser than 0.5 mm (default: uniform steps of ``step``).  Each
    finger's first touch is bisected to sub-micron precision and recorded as
    a ContactPoint at the closest surface point, normal pointing into the
    object.  Fingers model a breakaway drive: one holds its first-touch
    contact while the rest keep closing.  Fingers that never touch produce
    no contact; an empty result is a valid outcome, not a failure.

    Raises StartPenetrationError when a fingertip sphere already overlaps
    the object at the start configuration.
    """
    syn = synergy or build_synergy(params, topology)
    frames = _frames_no_warn(params)
    m = topology.n_reduced
    stroke = float(min(g.stroke for g in params.fingers))
    v0 = np.zeros(m) if start is None else np.asarray(start, dtype=float).copy()
    if v0.shape != (m,):
        raise ValueError(f"start must have {m} entries")
    group = np.array(closing_actuators(topology))

    travel = float(np.max(stroke - v0[group])) if group.size else 0.0
    travel = max(travel, 0.0)
    if schedule is None:
        n_steps = max(2, int(math.ceil(travel / step)) + 1)
        sched = np.linspace(0.0, travel, n_steps)
    else:
        sched = np.asarray(schedule, dtype=float)
        d = np.diff(sched)
        if sched.ndim != 1 or sched.size < 2 or sched[0] != 0.0:
            raise ValueError("schedule must start at advance 0")
        if np.any(d <= 0.0) or np.any(d > 0.5 + 1e-12):
            raise ValueError("schedule must increase in steps of at most 0.5 mm")

    def tips_at(advance: np.ndarray) -> np.ndarray:
        """Fingertips (..., N, 3) in world frame for closing advance in mm."""
        adv = np.asarray(advance, dtype=float)
        v = np.broadcast_to(v0, adv.shape + (m,)).copy()
        v[..., group] = np.minimum(v0[group] + adv[..., None], stroke)
        return pose.transform(hand_fk(params, topology, v, synergy=syn, frames=frames))

    def reduced_at(advance: float) -> np.ndarray:
        v = v0.copy()
        v[group] = np.minimum(v0[group] + advance, stroke)
        return v

    tips = tips_at(sched)  # (S, N, 3)
    sd = obj.signed_distance(tips.reshape(-1, 3)).reshape(len(sched), params.n_fingers)
    if np.any(sd[0] < tip_radius - 1e-9):
        k = int(np.argmin(sd[0]))
        raise StartPenetrationError(
            f"finger {k} starts {tip_radius - sd[0, k]:.3f} mm inside the "
            "inflated surface"
        )

    touching = sd <= tip_radius + 1e-12
    touched = touching.any(axis=0)
    touch_advance = np.full(params.n_fingers, np.nan)
    contacts: list[ContactPoint] = []
    hit = np.where(touched)[0]
    if hit.size:
        s_hit = np.argmax(touching[:, hit], axis=0)
        lo = np.where(s_hit > 0, sched[np.maximum(s_hit - 1, 0)], 0.0)
        hi = sched[s_hit]
        # bisect every touching finger at once (20 halvings of a <=0.5 mm
        # bracket resolve the touch advance to well under a micron)
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            t = tips_at(mid)[np.arange(hit.size), hit]
            inside = obj.signed_distance(t) <= tip_radius
            hi = np.where(inside, mid, hi)
            lo = np.where(inside, lo, mid)
        touch_advance[hit] = hi
        centers = tips_at(hi)[np.arange(hit.size), hit]
        cp, n_out, _ = obj.closest_surface(centers)
        for j, k in enumerate(hit):
            contacts.append(
                ContactPoint(
                    position=tuple(cp[j]),
                    normal=tuple(-n_out[j]),  # finger presses into the object
                    mu=mu,
                    finger_index=int(k),
                )
            )
    end = float(sched[-1])
    onset = reduced_at(float(np.nanmin(touch_advance))) if hit.size else reduced_at(end)
    return ContactResult(
        contacts=tuple(contacts),
        touched=touched,
        touch_advance=touch_advance,
        onset_reduced=onset,
        final_reduced=reduced_at(end),
    )


# ===================== grasp sampling =====================


@dataclass(frozen=True)
class GraspSample:
    """One row of the per-pose table."""

    height: float
    yaw: float
    index: int
    closure: bool
    quality: float
    n_contacts: int
    rejected: bool = False  # perturbed start penetrated; scored as failure


@dataclass
class GraspStudy:
    """Outcome of a sampling run, with the exact grid and seed used."""

    samples: list[GraspSample]
    heights: np.ndarray
    yaws: np.ndarray
    seed: int
    mu: float
    n_edges: int

    @property
    def closure_count(self) -> int:
        return sum(s.closure for s in self.samples)

    @property
    def n_rejected(self) -> int:
        return sum(s.rejected for s in self.samples)

    def summary(self) -> dict:
        """Aggregate in the shape of the sampling study's result table: the
        closure count and the mean quality, both over closure grasps only
        (the headline score) and over every sample."""
        qs = np.array([s.quality for s in self.samples], dtype=float)
        mask = np.array([s.closure for s in self.samples], dtype=bool)
        closed = qs[mask] if qs.size else qs
        return {
            "n_samples": len(self.samples),
            "closure_count": self.closure_count,
            "closure_rate": self.closure_count / len(self.samples) if self.samples else 0.0,
            "n_rejected": self.n_rejected,
            "mean_q_lrw": float(closed.mean()) if closed.size else 0.0,
            "mean_q_lrw_all": float(qs.mean()) if qs.size else 0.0,
            "max_q_lrw": float(qs.max()) if qs.size else 0.0,
            "seed": self.seed,
            "mu": self.mu,
            "n_edges": self.n_edges,
            "heights_mm": [float(h) for h in self.heights],
            "yaws_deg": [math.degrees(float(y)) for y in self.yaws],
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(GRASP_CSV_HEADER) + "\n")
        for s in self.samples:
            buf.write(
                "%.6g,%.6g,%d,%d,%.10g,%d\n"
                % (s.height, math.degrees(s.yaw), s.index, int(s.closure), s.quality, self.seed)
            )
        return buf.getvalue()


def default_heights(
    params: HandParams,
    obj: ObjectModel,
    n_heights: int = 20,
    *,
    inset: float = 0.05,
) -> np.ndarray:
    """Hand heights whose fingertip z-band overlaps the object's z-extent."""
    from .kinematics import forward_kinematics

    geom = params.fingers[0]
    z_a = forward_kinematics(geom, np.zeros(3))[2]
    z_b = forward_kinematics(geom, np.full(3, geom.stroke))[2]
    off_z = params.offsets_array()[:, 2]
    tip_lo = min(z_a, z_b) + params.actuation_height + min(off_z.min(), 0.0)
    tip_hi = max(z_a, z_b) + params.actuation_height + max(off_z.max(), 0.0)
    oz_lo, oz_hi = obj.z_interval()
    lo, hi = oz_lo - tip_hi, oz_hi - tip_lo
    span = hi - lo
    return np.linspace(lo + inset * span, hi - inset * span, n_heights)


def sample_grasps(
    params: HandParams,
    topology: CouplingTopology,
    obj: ObjectModel,
    n_samples: int = 20000,
    n_heights: int = 20,
    yaw_set=DEFAULT_YAW_SET,
    seed: int = 0,
    *,
    heights=None,
    sigma: float = 2.0,
    mu: float = 0.5,
    n_edges: int = 8,
    tip_radius: float = 5.0,
    step: float = 0.5,
    threads: int = 1,
    cancel_check=None,
    progress=None,
) -> GraspStudy:
    """Two-stage grasp sampling: pose grid, then actuation perturbations.

    Stage one closes the hand from open — moving only the open/close synergy
    coordinate — at every (height, yaw) cell of the grid and records the
    actuation at contact onset.  Stage two assigns samples round-robin to
    cells and perturbs every reduced actuator of the cell's onset vector
    independently with a truncated normal (``sigma`` mm, clipped to the
    stroke); the hand re-closes from the perturbed vector, and the contact
    set is scored for closure and largest-ball quality.  Samples whose
    perturbed start already penetrates the object are rejected and scored as
    failures, keeping indices aligned.

    Sample i draws from default_rng(seed + i) via inverse-CDF, so the row
    stream is identical for any ``threads``; heights default to the band
    where the fingertip z-range overlaps the object's z-extent, and yaws to
    0/45/90/135 degrees.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    syn = build_synergy(params, topology)
    stroke = float(min(g.stroke for g in params.fingers))
    heights = (
        default_heights(params, obj, n_heights)
        if heights is None
        else np.asarray(heights, dtype=float)
    )
    yaws = np.asarray(tuple(yaw_set), dtype=float)

    # stage one: contact-onset actuation for every pose cell
    cells = [(float(h), float(y)) for h in heights for y in yaws]
    onsets = []
    for h, y in cells:
        try:
            pre = close_until_contact(
                params, topology, HandPose(h, y), obj,
                tip_radius=tip_radius, step=step, mu=mu, synergy=syn,
            )
            onsets.append(pre.onset_reduced)
        except StartPenetrationError:
            # even fully open the hand overlaps the object here; stage two
            # will reject every sample drawn around the open posture
            onsets.append(np.zeros(topology.n_reduced))

    def run_one(i: int) -> GraspSample:
        if cancel_check is not None and cancel_check():
            raise GraspCancelled(f"cancelled before sample {i}")
        h, y = cells[i % len(cells)]
        onset = onsets[i % len(cells)]
        rng = np.random.default_rng(seed + i)
        a = (0.0 - onset) / sigma
        b = (stroke - onset) / sigma
        start = truncnorm.ppf(rng.random(onset.size), a, b, loc=onset, scale=sigma)
        try:
            res = close_until_contact(
                params, topology, HandPose(h, y), obj,
                start=start, tip_radius=tip_radius, step=step, mu=mu, synergy=syn,
            )
        except StartPenetrationError:
            return GraspSample(h, y, i, False, 0.0, 0, rejected=True)
        report = evaluate_contacts(res.contacts, obj, n_edges=n_edges)
        return GraspSample(
            h, y, i, report.is_force_closure, report.q_lrw, len(res.contacts)
        )

    def run_counted(i: int) -> GraspSample:
        out = run_one(i)
        if progress is not None:
            progress(1)
        return out

    if threads <= 1:
        samples = [run_counted(i) for i in range(n_samples)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(run_counted, range(n_samples)))
    return GraspStudy(
        samples=samples, heights=heights, yaws=yaws, seed=seed, mu=mu, n_edges=n_edges
    )
