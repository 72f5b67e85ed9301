"""URDF export with a loop-closure sidecar.

A linear Delta finger is a closed-chain mechanism, which URDF cannot
express.  The emitted tree therefore contains, per finger, the three
prismatic carriages and the platform rigidly attached to carriage 0 at
its zero-actuation pose; the two arms URDF cannot hold are declared in a
JSON sidecar as point-to-point closure constraints (anchor on the
carriage, anchor on the platform, rest distance = the arm length) for a
physics engine to re-impose.  Reduced-actuation couplings are declared
alongside as mimic-style groups (one driver joint, followers at
coefficient 1).

Geometry uses the standard Delta reduction: each carriage anchor is
moved inboard by the platform attachment radius so the platform can be
treated as a point.  Joint placement comes straight from the kinematic
model, so a consumer that enforces the sidecar constraints reproduces
``hand_fk`` exactly.  Lengths are converted from model millimeters to
URDF meters and printed with six decimals, making regeneration
byte-identical for equal inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .hand import CouplingTopology, HandParams, _frames_no_warn, validate_topology
from .kinematics import forward_kinematics

MM = 1e-3  # model unit -> URDF unit

# default dynamics; URDF requires effort/velocity bounds on active joints
_EFFORT_N = 10.0
_VELOCITY_M_S = 0.1
_CARRIAGE_MASS_KG = 0.02
_PLATFORM_MASS_KG = 0.01
_BASE_MASS_KG = 0.1


def _num(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _vec(v) -> str:
    return " ".join(_num(float(x)) for x in v)


def _inertial(mass: float) -> list[str]:
    i = _num(1e-6)
    return [
        "    <inertial>",
        f'      <mass value="{_num(mass)}"/>',
        f'      <inertia ixx="{i}" ixy="0.000000" ixz="0.000000" iyy="{i}" iyz="0.000000" izz="{i}"/>',
        "    </inertial>",
    ]


def _box_visual(size_m) -> list[str]:
    return [
        "    <visual>",
        "      <geometry>",
        f'        <box size="{_vec(size_m)}"/>',
        "      </geometry>",
        "    </visual>",
    ]


def _cylinder_visual(radius_m: float, length_m: float) -> list[str]:
    return [
        "    <visual>",
        "      <geometry>",
        f'        <cylinder radius="{_num(radius_m)}" length="{_num(length_m)}"/>',
        "      </geometry>",
        "    </visual>",
    ]


def joint_name(link_index: int) -> str:
    """Stable joint name for hand link index l = 3*finger + rail."""
    return f"f{link_index // 3}_rail{link_index % 3}"


@dataclass(frozen=True)
class UrdfBundle:
    """Generated robot description and its loop-closure sidecar."""

    urdf: str
    sidecar: dict

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar, indent=2, sort_keys=True) + "\n"

    def write(self, urdf_path, sidecar_path) -> None:
        with open(urdf_path, "w", encoding="utf-8") as fh:
            fh.write(self.urdf)
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            fh.write(self.sidecar_json())


def generate(params: HandParams, topology: CouplingTopology) -> UrdfBundle:
    """Emit the URDF tree and closure sidecar for a hand.

    Per finger k: prismatic joints ``f{k}_rail0..2`` (parent ``hand_base``,
    axis +z, limits [0, stroke]), carriage links ``f{k}_link0..2``, and the
    platform ``ee_{k}`` fixed to carriage 0.  Raises InvalidTopologyError
    when the topology does not fit the hand.
    """
    validate_topology(params, topology)
    frames = _frames_no_warn(params)

    lines = ['<?xml version="1.0"?>', '<robot name="polydelta_hand">']

    # root link: a plate big enough to span the rail circle
    plate_r = max(
        params.coupling_link_length + 2.0 * g.base_radius for g in params.fingers
    )
    lines.append('  <link name="hand_base">')
    lines.extend(_inertial(_BASE_MASS_KG))
    lines.extend(_cylinder_visual(plate_r * MM, 2.0 * MM))
    lines.append("  </link>")

    closures = []
    for k in range(params.n_fingers):
        geom = params.fingers[k]
        R, t = frames[k]
        ang = np.asarray(geom.rail_angles, dtype=float)
        r_eff = geom.effective_radius
        local = np.stack(
            [r_eff * np.cos(ang), r_eff * np.sin(ang), np.zeros(3)], axis=-1
        )
        anchors_world = local @ R.T + t  # (3, 3) reduced carriage anchors, mm

        for i in range(3):
            jname = f"f{k}_rail{i}"
            lname = f"f{k}_link{i}"
            lines.append(f'  <joint name="{jname}" type="prismatic">')
            lines.append('    <parent link="hand_base"/>')
            lines.append(f'    <child link="{lname}"/>')
            lines.append(f'    <origin xyz="{_vec(anchors_world[i] * MM)}" rpy="0.000000 0.000000 0.000000"/>')
            lines.append('    <axis xyz="0.000000 0.000000 1.000000"/>')
            lines.append(
                f'    <limit lower="0.000000" upper="{_num(geom.stroke * MM)}" '
                f'effort="{_num(_EFFORT_N)}" velocity="{_num(_VELOCITY_M_S)}"/>'
            )
            lines.append("  </joint>")
            lines.append(f'  <link name="{lname}">')
            lines.extend(_inertial(_CARRIAGE_MASS_KG))
            lines.extend(_box_visual((6.0 * MM, 6.0 * MM, 4.0 * MM)))
            lines.append("  </link>")

        # platform rigidly follows carriage 0 at its zero-actuation offset;
        # the closure constraints below restore the true parallel behavior
        p0_local = forward_kinematics(geom, np.zeros(3))
        p0_world = R @ p0_local + t
        ee_offset = (p0_world - anchors_world[0]) * MM
        lines.append(f'  <joint name="f{k}_ee" type="fixed">')
        lines.append(f'    <parent link="f{k}_link0"/>')
        lines.append(f'    <child link="ee_{k}"/>')
        lines.append(f'    <origin xyz="{_vec(ee_offset)}" rpy="0.000000 0.000000 0.000000"/>')
        lines.append("  </joint>")
        lines.append(f'  <link name="ee_{k}">')
        lines.extend(_inertial(_PLATFORM_MASS_KG))
        lines.extend(_cylinder_visual(geom.ee_radius * MM, 2.0 * MM))
        lines.append("  </link>")

        for i in (1, 2):
            closures.append(
                {
                    "parent": f"f{k}_link{i}",
                    "child": f"ee_{k}",
                    "parent_point": [0.0, 0.0, 0.0],
                    "child_point": [0.0, 0.0, 0.0],
                    "distance": round(geom.link_length * MM, 9),
                }
            )

    lines.append("</robot>")

    mimic_groups = []
    for links in topology.actuator_to_links:
        ordered = sorted(links)
        mimic_groups.append(
            {
                "driver": joint_name(ordered[0]),
                "followers": [joint_name(l) for l in ordered[1:]],
            }
        )

    sidecar = {
        "closures": closures,
        "mimic_groups": mimic_groups,
        "units": "meters",
    }
    return UrdfBundle(urdf="\n".join(lines) + "\n", sidecar=sidecar)
