"""Parametric multi-finger hands built from linear-rail Delta fingers.

The package covers the full pipeline: per-finger closed-form kinematics
(`kinematics`), hand assembly with coupling synergies (`hand`), object
models (`objects`), wrench-space grasp scoring and contact-driven closing
(`grasp`), URDF export with a closed-loop sidecar (`urdf`), hardware log
ingestion (`characterize`), hand-pose teleoperation mappings (`teleop`),
an HTTP + WebSocket session service (`service`), and a command-line
front end (`cli`).

All linear dimensions are millimetres, angles radians unless a name says
degrees, forces newtons.
"""

from .kinematics import (
    DeltaGeometry,
    KinematicsError,
    NoIntersectionError,
    OutOfStrokeError,
    UnreachableError,
    WorkspaceGrid,
    WorkspaceMetrics,
    forward_kinematics,
    inverse_kinematics,
    numeric_jacobian,
    sample_workspace,
    workspace_metrics,
    workspace_sweep,
)
from .hand import (
    SCHEMA_VERSION,
    CouplingTopology,
    HandIKResult,
    HandParams,
    HandWorkspace,
    InvalidTopologyError,
    SynergyMaps,
    build_synergy,
    hand_fk,
    hand_from_json,
    hand_ik,
    hand_to_json,
    hand_workspace,
    identity_topology,
    preset_topology,
    standard_hand,
    validate_topology,
)
from .objects import Box, ConvexMesh, Cylinder, ObjectModel, Pose, Sphere, object_from_dict
from .grasp import (
    ContactPoint,
    GraspError,
    GraspReport,
    GraspStudy,
    HandPose,
    close_until_contact,
    evaluate_contacts,
    force_closure,
    q_lrw,
    sample_grasps,
)
from .urdf import UrdfBundle, generate as generate_urdf
from .characterize import ForceLog, PoseLog, force_fit, kinematics_mae, sweep_report
from .teleop import (
    Calibration,
    PoseSample,
    TeleopCommand,
    TeleopMapper,
    default_assignment,
    default_neutral,
    dump_stream,
    map_direct,
    map_polar,
    map_principal,
    parse_stream,
    replay,
)

__version__ = "0.1.0"

__all__ = [
    "SCHEMA_VERSION",
    "__version__",
    "Box",
    "Calibration",
    "ContactPoint",
    "ConvexMesh",
    "CouplingTopology",
    "Cylinder",
    "DeltaGeometry",
    "ForceLog",
    "GraspError",
    "GraspReport",
    "GraspStudy",
    "HandIKResult",
    "HandParams",
    "HandPose",
    "HandWorkspace",
    "InvalidTopologyError",
    "KinematicsError",
    "NoIntersectionError",
    "ObjectModel",
    "OutOfStrokeError",
    "Pose",
    "PoseLog",
    "PoseSample",
    "Sphere",
    "SynergyMaps",
    "TeleopCommand",
    "TeleopMapper",
    "UnreachableError",
    "UrdfBundle",
    "WorkspaceGrid",
    "WorkspaceMetrics",
    "build_synergy",
    "close_until_contact",
    "default_assignment",
    "default_neutral",
    "dump_stream",
    "evaluate_contacts",
    "force_closure",
    "force_fit",
    "forward_kinematics",
    "generate_urdf",
    "hand_fk",
    "hand_from_json",
    "hand_ik",
    "hand_to_json",
    "hand_workspace",
    "identity_topology",
    "inverse_kinematics",
    "kinematics_mae",
    "map_direct",
    "map_polar",
    "map_principal",
    "numeric_jacobian",
    "object_from_dict",
    "parse_stream",
    "preset_topology",
    "q_lrw",
    "replay",
    "sample_grasps",
    "sample_workspace",
    "standard_hand",
    "sweep_report",
    "validate_topology",
    "workspace_metrics",
    "workspace_sweep",
]
