"""Operator hand-tracking to hand-actuation mapping.

Three mappings turn a tracked operator sample (wrist plus four digit
positions, millimeters in a frame aligned with the hand frame) into
fingertip targets and reduced actuation:

* direct — each assigned digit's displacement from its calibration
  neutral, scaled, moves the matching finger off its home position;
* principal — like direct, but each displacement is first snapped to the
  dominant of two reference axes (motion stabilization), with plain
  orthogonal projection onto the axis plane available as a variant;
* polar — the left thumb–index aperture sets a shared radius, the right
  index's azimuth about the wrist sets a twist angle, and every
  fingertip is placed on that circle at its own angular slot, producing
  a coordinated twisting motion.

Out-of-workspace targets are clamped to the nearest point of a
precomputed per-finger reachability cloud; in-workspace targets (exact
membership via closed-form finger IK) pass through unquantized.  The
reduced actuation returned is always clipped to stroke bounds.
Clamping absorbs out-of-range motion, so ``residual`` reports how well
the emitted actuation realizes the *emitted* targets (nonzero when the
coupling cannot satisfy them all); the raw request-to-realized gap,
including whatever the clamp absorbed, is kept separately as
``tracking_error``.  ``replay`` runs a recorded JSON Lines stream
through a mapping with a fingertip rate limiter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .hand import (
    CouplingTopology,
    HandParams,
    _frames_no_warn,
    build_synergy,
    hand_fk,
    hand_ik,
)
from .kinematics import (
    UnreachableError,
    forward_kinematics_masked,
    inverse_kinematics,
)

DIGITS = ("left_thumb", "left_index", "right_thumb", "right_index")
DEFAULT_MAX_SPEED = 100.0  # mm/s fingertip rate limit in replay


class TeleopError(ValueError):
    """Base class for teleoperation failures."""


class MalformedStreamError(TeleopError):
    """A recorded stream violates the JSONL schema or time ordering."""


def _point(v, what: str) -> tuple[float, float, float]:
    try:
        x, y, z = (float(c) for c in v)
    except (TypeError, ValueError):
        raise MalformedStreamError(f"{what} must be a 3-vector, got {v!r}") from None
    if not all(math.isfinite(c) for c in (x, y, z)):
        raise MalformedStreamError(f"{what} contains non-finite values")
    return (x, y, z)


@dataclass(frozen=True)
class PoseSample:
    """One tracked operator sample: wrist plus four digit tips, mm."""

    t: float
    wrist: tuple[float, float, float]
    left_thumb: tuple[float, float, float]
    left_index: tuple[float, float, float]
    right_thumb: tuple[float, float, float]
    right_index: tuple[float, float, float]

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise MalformedStreamError("timestamp must be finite")
        for name in ("wrist",) + DIGITS:
            object.__setattr__(self, name, _point(getattr(self, name), name))

    def digit(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    @classmethod
    def from_dict(cls, d: dict) -> "PoseSample":
        try:
            return cls(
                t=float(d["t"]),
                wrist=d["wrist"],
                left_thumb=d["left_thumb"],
                left_index=d["left_index"],
                right_thumb=d["right_thumb"],
                right_index=d["right_index"],
            )
        except KeyError as e:
            raise MalformedStreamError(f"sample missing field {e.args[0]!r}") from None
        except TypeError:
            raise MalformedStreamError(f"sample must be an object, got {d!r}") from None

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "wrist": list(self.wrist),
            "left_thumb": list(self.left_thumb),
            "left_index": list(self.left_index),
            "right_thumb": list(self.right_thumb),
            "right_index": list(self.right_index),
        }


def parse_stream(text: str) -> list[PoseSample]:
    """Parse a JSON Lines recording, enforcing non-decreasing timestamps."""
    samples = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedStreamError(f"line {lineno}: invalid JSON ({e.msg})") from None
        sample = PoseSample.from_dict(obj)
        if samples and sample.t < samples[-1].t:
            raise MalformedStreamError(
                f"line {lineno}: timestamp {sample.t} goes backwards"
            )
        samples.append(sample)
    return samples


def dump_stream(samples) -> str:
    return "".join(json.dumps(s.to_dict()) + "\n" for s in samples)


def default_neutral() -> PoseSample:
    """A symmetric rest sample: 60 mm left aperture, right index forward."""
    return PoseSample(
        t=0.0,
        wrist=(0.0, 0.0, 0.0),
        left_thumb=(-30.0, 0.0, 0.0),
        left_index=(30.0, 0.0, 0.0),
        right_thumb=(0.0, -30.0, 0.0),
        right_index=(60.0, 0.0, 0.0),
    )


def default_assignment(n_fingers: int) -> dict[str, int]:
    """Digits in canonical order onto the first fingers; extras unassigned."""
    return {d: k for k, d in enumerate(DIGITS[: min(4, n_fingers)])}


@dataclass(frozen=True)
class Calibration:
    """Operator-to-hand conversion constants."""

    scale: float = 1.0
    neutral: PoseSample = field(default_factory=default_neutral)
    assignment: dict = field(default_factory=lambda: default_assignment(4))
    aperture_range: tuple[float, float] = (20.0, 120.0)  # mm between left digits

    def __post_init__(self):
        if not (self.scale > 0):
            raise TeleopError("scale must be positive")
        lo, hi = self.aperture_range
        if not (0 <= lo < hi):
            raise TeleopError("aperture_range must satisfy 0 <= min < max")
        for d in self.assignment:
            if d not in DIGITS:
                raise TeleopError(f"unknown digit {d!r} in assignment")


@dataclass(frozen=True)
class TeleopCommand:
    """One mapped step: arm motion, fingertip targets, and actuation."""

    arm_delta: tuple[float, float, float]  # mm
    fingertip_targets: np.ndarray  # (N, 3) hand frame, post-clamp
    reduced_actuation: np.ndarray  # (m,) within stroke bounds
    residual: np.ndarray  # (N,) mm, emitted target vs realized tip
    tracking_error: np.ndarray  # (N,) mm, raw request vs realized tip


class TeleopMapper:
    """Precomputed workspace clouds and IK plumbing for one hand config.

    ``resolution`` is the actuation grid step (mm) used to sample each
    finger's reachable fingertip cloud; a target within one cloud spacing
    of the cloud counts as reachable and passes through unclamped.
    """

    def __init__(
        self,
        params: HandParams,
        topology: CouplingTopology,
        *,
        resolution: float = 1.0,
    ):
        if resolution <= 0:
            raise TeleopError("resolution must be positive")
        self.params = params
        self.topology = topology
        self.synergy = build_synergy(params, topology)
        self.stroke = float(min(g.stroke for g in params.fingers))
        self.home_reduced = np.full(topology.n_reduced, self.stroke / 2.0)
        self.home_tips = hand_fk(
            params, topology, self.home_reduced, synergy=self.synergy
        )  # (N, 3)

        frames = _frames_no_warn(params)
        offs = params.offsets_array()
        self._frames = frames
        self._offs = offs
        self.clouds: list[np.ndarray] = []
        self.trees: list[cKDTree] = []
        self.pass_radius: list[float] = []
        for k, (R, t) in enumerate(frames):
            geom = params.fingers[k]
            axis = np.arange(0.0, geom.stroke + 1e-9, resolution)
            g1, g2, g3 = np.meshgrid(axis, axis, axis, indexing="ij")
            acts = np.stack([g1.ravel(), g2.ravel(), g3.ravel()], axis=-1)
            pts, ok = forward_kinematics_masked(geom, acts)
            cloud = (pts[ok] + offs[k]) @ R.T + t
            tree = cKDTree(cloud)
            spacing, _ = tree.query(cloud, k=2)
            self.clouds.append(cloud)
            self.trees.append(tree)
            self.pass_radius.append(float(spacing[:, 1].max()) * 1.05)

        xy = np.linalg.norm(self.clouds[0][:, :2], axis=1)
        self.r_max = 0.9 * float(xy.max())
        self.r_min = 1.1 * float(xy.min())

    @property
    def n_fingers(self) -> int:
        return self.params.n_fingers

    def reachable(self, finger: int, target) -> bool:
        """Exact stroke-workspace membership via closed-form finger IK."""
        R, t = self._frames[finger]
        geom = self.params.fingers[finger]
        local = (np.asarray(target, dtype=float) - t) @ R - self._offs[finger]
        try:
            a, in_bounds = inverse_kinematics(geom, local, enforce_stroke=False)
        except UnreachableError:
            return False
        return bool(np.all(in_bounds))

    def clamp(self, finger: int, target) -> tuple[np.ndarray, bool]:
        """Nearest-cloud projection; identity for in-workspace targets."""
        p = np.asarray(target, dtype=float)
        if self.reachable(finger, p):
            return p, False
        _, idx = self.trees[finger].query(p)
        return self.clouds[finger][idx].copy(), True

    def solve(self, arm_delta, raw_targets) -> TeleopCommand:
        """Clamp, run coupled IK, clip to stroke, and report residuals."""
        raw = np.asarray(raw_targets, dtype=float).reshape(self.n_fingers, 3)
        targets = np.stack([self.clamp(k, raw[k])[0] for k in range(self.n_fingers)])
        result = None
        for attempt in (targets, self._snap_all(raw), np.array(self.home_tips)):
            try:
                result = hand_ik(
                    self.params,
                    self.topology,
                    attempt,
                    synergy=self.synergy,
                    enforce_stroke=False,
                )
                targets = attempt
                break
            except UnreachableError:
                continue
        reduced = np.clip(result.reduced, 0.0, self.stroke)
        tips = hand_fk(self.params, self.topology, reduced, synergy=self.synergy)
        return TeleopCommand(
            arm_delta=tuple(float(v) for v in np.asarray(arm_delta, dtype=float)),
            fingertip_targets=targets,
            reduced_actuation=reduced,
            residual=np.linalg.norm(targets - tips, axis=-1),
            tracking_error=np.linalg.norm(raw - tips, axis=-1),
        )

    def _snap_all(self, raw: np.ndarray) -> np.ndarray:
        return np.stack(
            [
                self.clouds[k][self.trees[k].query(raw[k])[1]]
                for k in range(self.n_fingers)
            ]
        )


# ===================== mapping constructions =====================


def _direct_targets(sample: PoseSample, calib: Calibration, mapper: TeleopMapper):
    arm = (sample.digit("wrist") - calib.neutral.digit("wrist")) * calib.scale
    targets = np.array(mapper.home_tips, dtype=float)
    for digit, finger in calib.assignment.items():
        if not (0 <= finger < mapper.n_fingers):
            raise TeleopError(f"assignment {digit!r} -> {finger} outside hand")
        disp = (sample.digit(digit) - calib.neutral.digit(digit)) * calib.scale
        targets[finger] = mapper.home_tips[finger] + disp
    return arm, targets


def _dominant_axis(disp: np.ndarray, u1: np.ndarray, u2: np.ndarray, mode: str):
    c1, c2 = float(disp @ u1), float(disp @ u2)
    if mode == "plane":
        return c1 * u1 + c2 * u2
    return c1 * u1 if abs(c1) >= abs(c2) else c2 * u2  # ties go to the first axis


def _principal_targets(sample, calib, mapper, axes, mode):
    u1 = np.asarray(axes[0], dtype=float)
    u2 = np.asarray(axes[1], dtype=float)
    if (
        abs(np.linalg.norm(u1) - 1.0) > 1e-9
        or abs(np.linalg.norm(u2) - 1.0) > 1e-9
        or abs(float(u1 @ u2)) > 1e-9
    ):
        raise TeleopError("axes must be two orthonormal vectors")
    if mode not in ("dominant", "plane"):
        raise TeleopError(f"unknown principal mode {mode!r}")
    arm = (sample.digit("wrist") - calib.neutral.digit("wrist")) * calib.scale
    targets = np.array(mapper.home_tips, dtype=float)
    for digit, finger in calib.assignment.items():
        if not (0 <= finger < mapper.n_fingers):
            raise TeleopError(f"assignment {digit!r} -> {finger} outside hand")
        disp = (sample.digit(digit) - calib.neutral.digit(digit)) * calib.scale
        targets[finger] = mapper.home_tips[finger] + _dominant_axis(disp, u1, u2, mode)
    return arm, targets


def polar_state(sample: PoseSample, calib: Calibration, mapper: TeleopMapper):
    """(radius, twist angle) encoded by an operator sample.

    The left thumb-index aperture maps affinely from the calibration
    range onto [r_min, r_max]; the twist is the azimuth of the right
    index about the wrist, relative to the same azimuth at neutral.
    """
    aperture = float(np.linalg.norm(sample.digit("left_index") - sample.digit("left_thumb")))
    lo, hi = calib.aperture_range
    frac = min(1.0, max(0.0, (aperture - lo) / (hi - lo)))
    r = mapper.r_min + frac * (mapper.r_max - mapper.r_min)

    rel = sample.digit("right_index") - sample.digit("wrist")
    rel0 = calib.neutral.digit("right_index") - calib.neutral.digit("wrist")
    theta = math.atan2(rel[1], rel[0]) - math.atan2(rel0[1], rel0[0])
    return r, theta


def polar_targets(r: float, theta: float, mapper: TeleopMapper) -> np.ndarray:
    """Fingertips on a shared circle, finger k at its own angular slot."""
    spacing = mapper.params.fingertip_angle
    out = np.empty((mapper.n_fingers, 3))
    for k in range(mapper.n_fingers):
        ang = theta + k * spacing
        out[k] = (r * math.cos(ang), r * math.sin(ang), mapper.home_tips[k][2])
    return out


def _polar_targets(sample, calib, mapper):
    arm = (sample.digit("wrist") - calib.neutral.digit("wrist")) * calib.scale
    r, theta = polar_state(sample, calib, mapper)
    return arm, polar_targets(r, theta, mapper)


def map_direct(sample: PoseSample, calib: Calibration, mapper: TeleopMapper) -> TeleopCommand:
    """Digit displacements applied directly to the assigned fingertips."""
    return mapper.solve(*_direct_targets(sample, calib, mapper))


def map_principal(
    sample: PoseSample,
    calib: Calibration,
    mapper: TeleopMapper,
    axes=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    *,
    mode: str = "dominant",
) -> TeleopCommand:
    """Direct mapping with displacements snapped to the dominant axis."""
    return mapper.solve(*_principal_targets(sample, calib, mapper, axes, mode))


def map_polar(sample: PoseSample, calib: Calibration, mapper: TeleopMapper) -> TeleopCommand:
    """Aperture-radius / azimuth-twist mapping across all fingers."""
    return mapper.solve(*_polar_targets(sample, calib, mapper))


MAPPINGS = {
    "direct": _direct_targets,
    "principal": lambda s, c, m: _principal_targets(
        s, c, m, ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), "dominant"
    ),
    "polar": _polar_targets,
}


def replay(
    stream,
    mapping: str,
    params: HandParams,
    topology: CouplingTopology,
    *,
    calib: Calibration | None = None,
    mapper: TeleopMapper | None = None,
    max_speed: float = DEFAULT_MAX_SPEED,
) -> list[TeleopCommand]:
    """Run a recorded stream through one mapping with a rate limiter.

    The first sample is emitted as mapped; afterwards each fingertip
    target may move at most ``max_speed * dt`` from the previously
    emitted target, interpolating along the straight segment toward the
    new request.  Raises MalformedStreamError on non-monotone timestamps.
    """
    if mapping not in MAPPINGS:
        raise TeleopError(f"unknown mapping {mapping!r}; pick from {sorted(MAPPINGS)}")
    if max_speed <= 0:
        raise TeleopError("max_speed must be positive")
    construction = MAPPINGS[mapping]
    calib = calib or Calibration(assignment=default_assignment(params.n_fingers))
    mapper = mapper or TeleopMapper(params, topology)

    commands: list[TeleopCommand] = []
    prev_targets = None
    prev_t = None
    for sample in stream:
        if prev_t is not None and sample.t < prev_t:
            raise MalformedStreamError(f"timestamp {sample.t} goes backwards")
        arm, raw = construction(sample, calib, mapper)
        if prev_targets is not None:
            budget = max_speed * (sample.t - prev_t)
            step = raw - prev_targets
            dist = np.linalg.norm(step, axis=-1)
            over = dist > budget
            if np.any(over):
                scale = np.where(over, budget / np.where(dist > 0, dist, 1.0), 1.0)
                raw = prev_targets + step * scale[:, None]
        cmd = mapper.solve(arm, raw)
        commands.append(cmd)
        prev_targets = raw
        prev_t = sample.t
    return commands
