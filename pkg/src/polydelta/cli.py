"""Command-line front door for all batch operations.

Every subcommand reads the shared hand-configuration JSON (the format
``hand_to_json`` writes and the service consumes), emits deterministic
bytes for a given input + seed, and accepts ``--out -`` to write to
stdout.  Exit codes: 0 on success, 1 on validation errors (bad values,
malformed content, infeasible requests), 2 on I/O errors (missing or
unwritable files).  All lengths are millimetres.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from itertools import product
from pathlib import Path

import numpy as np

from .characterize import ForceLog, PoseLog, force_fit, kinematics_mae, sweep_report
from .grasp import GraspError, sample_grasps
from .hand import (
    SCHEMA_VERSION,
    CouplingTopology,
    HandParams,
    build_synergy,
    hand_fk,
    hand_from_json,
    hand_to_json,
    hand_workspace,
    identity_topology,
    preset_topology,
    standard_hand,
    validate_topology,
)
from .kinematics import DeltaGeometry, _fmt6
from .objects import object_from_dict
from .teleop import MAPPINGS, TeleopMapper, parse_stream, replay

PROG = "polydelta"


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, per the CLI contract."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_hand(path: str | None) -> tuple[HandParams, CouplingTopology]:
    if path is None:
        params = standard_hand(4)
        return params, identity_topology(params.n_fingers)
    return hand_from_json(Path(path).read_text())


def _load_json(path: str):
    return json.loads(Path(path).read_text())


def _parse_floats(text: str) -> np.ndarray:
    vals = [float(v) for v in text.replace(",", " ").split()]
    return np.asarray(vals, dtype=float)


# ===================== subcommands =====================


def cmd_fk(args) -> int:
    params, topology = _load_hand(args.hand)
    syn = build_synergy(params, topology)
    stroke = min(g.stroke for g in params.fingers)
    if args.actuation is None:
        reduced = np.full(syn.n_reduced, stroke / 2.0)  # home: mid-stroke
    else:
        reduced = _parse_floats(args.actuation)
        if reduced.size != syn.n_reduced:
            raise ValueError(
                f"actuation has {reduced.size} values, topology expects {syn.n_reduced}"
            )
    full = syn.expand(reduced)
    for k, geom in enumerate(params.fingers):
        seg = full[3 * k : 3 * k + 3]
        if np.any(seg < -1e-9) or np.any(seg > geom.stroke + 1e-9):
            raise ValueError(
                f"finger {k} actuation {seg.tolist()} outside [0, {geom.stroke}]"
            )
    tips = hand_fk(params, topology, reduced, synergy=syn)
    _emit(
        _dumps(
            {
                "schema_version": SCHEMA_VERSION,
                "reduced_actuation": reduced.tolist(),
                "full_actuation": full.tolist(),
                "fingertips": tips.tolist(),
            }
        ),
        args.out,
    )
    return 0


def cmd_ik(args) -> int:
    from .hand import hand_ik

    params, topology = _load_hand(args.hand)
    doc = _load_json(args.targets)
    targets = doc["targets"] if isinstance(doc, dict) else doc
    result = hand_ik(params, topology, np.asarray(targets, dtype=float))
    _emit(
        _dumps(
            {
                "schema_version": SCHEMA_VERSION,
                "reduced_actuation": result.reduced.tolist(),
                "requested_full": result.requested_full.tolist(),
                "residuals": result.residuals.tolist(),
                "fingertips": result.tips.tolist(),
            }
        ),
        args.out,
    )
    return 0


def cmd_workspace(args) -> int:
    params, topology = _load_hand(args.hand)
    if args.grid < 2:
        raise ValueError("--grid must be at least 2")
    ws = hand_workspace(
        params, topology, grid_per_axis=args.grid, compute_overlap=False
    )
    if args.csv is not None:
        buf = io.StringIO()
        buf.write("finger,a1,a2,a3,x,y,z,reachable\n")
        for fw in ws.per_finger:
            for a, p, r in zip(fw.actuations, fw.points, fw.reachable):
                cells = [str(fw.finger)]
                cells += [_fmt6(v) for v in a]
                cells += [_fmt6(v) for v in p]
                cells.append("1" if r else "0")
                buf.write(",".join(cells) + "\n")
        _emit(buf.getvalue(), args.csv)
        if args.out is None:
            return 0
    doc = ws.to_json()
    doc.pop("overlap", None)
    _emit(_dumps(doc), args.out)
    return 0


def cmd_synergy(args) -> int:
    params, topology = _load_hand(args.hand)
    if args.topology is not None:
        spec = args.topology
        if spec.isdigit():
            topology = preset_topology(params, spec)
        else:
            topology = CouplingTopology.from_dict(_load_json(spec))
    try:
        validate_topology(params, topology)
    except ValueError as exc:
        _emit(
            _dumps(
                {
                    "schema_version": SCHEMA_VERSION,
                    "topology": topology.to_dict(),
                    "validation": {"valid": False, "error": str(exc)},
                }
            ),
            args.out,
        )
        return 1
    syn = build_synergy(params, topology)
    _emit(
        _dumps(
            {
                "schema_version": SCHEMA_VERSION,
                "topology": topology.to_dict(),
                "n_reduced": syn.n_reduced,
                "n_links": syn.n_links,
                "P": syn.projection.tolist(),
                "C": syn.expansion.tolist(),
                "validation": {"valid": True},
            }
        ),
        args.out,
    )
    return 0


def cmd_grasp(args) -> int:
    params, topology = _load_hand(args.hand)
    obj = object_from_dict(_load_json(args.object))
    study = sample_grasps(
        params,
        topology,
        obj,
        n_samples=args.samples,
        n_heights=args.n_heights,
        seed=args.seed,
        sigma=args.sigma,
        mu=args.mu,
        n_edges=args.edges,
        threads=args.threads,
    )
    if args.out in (None, "-"):
        _emit(study.to_json() + "\n", "-")
    else:
        report_dir = Path(args.out)
        report_dir.mkdir(parents=True, exist_ok=True)
        (report_dir / "samples.csv").write_text(study.to_csv())
        (report_dir / "summary.json").write_text(study.to_json() + "\n")
    return 0


def cmd_urdf(args) -> int:
    from .urdf import generate

    params, topology = _load_hand(args.hand)
    bundle = generate(params, topology)
    if args.out in (None, "-"):
        _emit(
            _dumps(
                {
                    "schema_version": SCHEMA_VERSION,
                    "urdf": bundle.urdf,
                    "sidecar": bundle.sidecar,
                }
            ),
            "-",
        )
    else:
        urdf_path = Path(args.out)
        sidecar_path = urdf_path.parent / (urdf_path.stem + ".sidecar.json")
        bundle.write(urdf_path, sidecar_path)
    return 0


def _sweep_geometries(doc) -> list[DeltaGeometry]:
    if isinstance(doc, dict) and "geometries" in doc:
        return [DeltaGeometry.from_dict(d) for d in doc["geometries"]]
    if isinstance(doc, dict):
        fields = ("base_radius", "ee_radius", "link_length", "stroke")
        unknown = set(doc) - set(fields)
        if unknown:
            raise ValueError(f"unknown sweep fields {sorted(unknown)}")
        axes = []
        for f in fields:
            vals = doc.get(f)
            if vals is None:
                axes.append([None])
            elif isinstance(vals, (int, float)):
                axes.append([float(vals)])
            else:
                axes.append([float(v) for v in vals])
        geoms = []
        for combo in product(*axes):
            kwargs = {f: v for f, v in zip(fields, combo) if v is not None}
            geoms.append(DeltaGeometry(**kwargs))
        return geoms
    raise ValueError("sweep input must list 'geometries' or parameter ranges")


SWEEP_CSV_COLUMNS = (
    "base_radius",
    "ee_radius",
    "link_length",
    "stroke",
    "reachable_count",
    "hull_volume",
    "extent_x",
    "extent_y",
    "extent_z",
)


def cmd_characterize(args) -> int:
    if args.mode == "mae":
        params, _ = _load_hand(args.hand) if args.hand else (None, None)
        geom = params.fingers[0] if params is not None else DeltaGeometry()
        log = PoseLog.load(args.infile)
        report = kinematics_mae(log, geom)
        _emit(_dumps(report.to_dict()), args.out)
        return 0
    if args.mode == "force":
        log = ForceLog.load(args.infile)
        fits = force_fit(log)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "fits": {d: fit.to_dict() for d, fit in fits.items()},
        }
        _emit(_dumps(doc), args.out)
        return 0
    # sweep
    geoms = _sweep_geometries(_load_json(args.infile))
    rows = sweep_report(geoms, grid_shape=(args.grid,) * 3)
    if args.csv is not None:
        buf = io.StringIO()
        buf.write(",".join(SWEEP_CSV_COLUMNS) + "\n")
        for row in rows:
            cells = [
                _fmt6(row["base_radius"]),
                _fmt6(row["ee_radius"]),
                _fmt6(row["link_length"]),
                _fmt6(row["stroke"]),
                str(row["reachable_count"]),
                _fmt6(row["hull_volume"]),
            ] + [_fmt6(v) for v in row["extents"]]
            buf.write(",".join(cells) + "\n")
        _emit(buf.getvalue(), args.csv)
        if args.out is None:
            return 0
    _emit(_dumps({"schema_version": SCHEMA_VERSION, "rows": rows}), args.out)
    return 0


def cmd_teleop_replay(args) -> int:
    params, topology = _load_hand(args.hand)
    stream = parse_stream(Path(args.stream).read_text())
    mapper = TeleopMapper(params, topology)
    commands = replay(
        stream,
        args.mapping,
        params,
        topology,
        mapper=mapper,
        max_speed=args.max_speed,
    )
    lines = []
    for sample, cmd in zip(stream, commands):
        lines.append(
            json.dumps(
                {
                    "t": sample.t,
                    "arm_delta": list(cmd.arm_delta),
                    "fingertip_targets": np.asarray(cmd.fingertip_targets).tolist(),
                    "reduced_actuation": np.asarray(cmd.reduced_actuation).tolist(),
                    "residual": np.asarray(cmd.residual).tolist(),
                    "tracking_error": np.asarray(cmd.tracking_error).tolist(),
                }
            )
        )
    _emit("".join(line + "\n" for line in lines), args.out)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(host=args.host, port=args.port, hand_path=args.hand, ui_dir=args.ui_dir)
    return 0


def cmd_hand_template(args) -> int:
    params = standard_hand(args.fingers)
    _emit(hand_to_json(params, identity_topology(args.fingers)) + "\n", args.out)
    return 0


# ===================== parser =====================


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, func, help_text, with_hand=True):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        if with_hand:
            p.add_argument("--hand", metavar="f.json", help="hand configuration JSON "
                           "(shared with the service; default: built-in 4-finger hand)")
        return p

    p = add("fk", cmd_fk, "Fingertips for a reduced actuation vector.")
    p.add_argument("--actuation", metavar="'a1 a2 ...'",
                   help="reduced actuation, comma or space separated mm "
                        "(default: mid-stroke home)")
    p.add_argument("--out", metavar="path", help="output JSON path or -")

    p = add("ik", cmd_ik, "Reduced actuation realising fingertip targets.")
    p.add_argument("--targets", metavar="t.json", required=True,
                   help="JSON with 'targets': N x 3 mm, or a bare array")
    p.add_argument("--out", metavar="path", help="output JSON path or -")

    p = add("workspace", cmd_workspace, "Per-finger reachable fingertip lattice.")
    p.add_argument("--grid", type=int, default=5, metavar="n",
                   help="lattice points per actuation axis (default 5)")
    p.add_argument("--csv", metavar="out.csv",
                   help="also write the tabular lattice (finger,a1..z,reachable)")
    p.add_argument("--out", metavar="path", help="output JSON path or -")

    p = add("synergy", cmd_synergy, "Projection/expansion matrices and validation.")
    p.add_argument("--topology", metavar="9|5|custom.json",
                   help="preset name (actuator count) or topology JSON path "
                        "(default: the hand file's topology)")
    p.add_argument("--out", metavar="path", help="output JSON path or -")

    p = add("grasp", cmd_grasp, "Sample grasps on an object and score closure.")
    p.add_argument("--object", metavar="o.json", required=True,
                   help="object descriptor JSON (shape, dimensions, pose)")
    p.add_argument("--samples", type=int, default=200, metavar="n")
    p.add_argument("--seed", type=int, default=0, metavar="s")
    p.add_argument("--n-heights", type=int, default=20, metavar="n",
                   help="hand heights in the pose grid (default 20)")
    p.add_argument("--sigma", type=float, default=2.0, metavar="mm",
                   help="actuation perturbation scale (default 2.0)")
    p.add_argument("--mu", type=float, default=0.5, metavar="mu",
                   help="friction coefficient (default 0.5)")
    p.add_argument("--edges", type=int, default=8, metavar="k",
                   help="friction cone edges (default 8)")
    p.add_argument("--threads", type=int, default=1, metavar="t",
                   help="worker threads; results are identical for any t")
    p.add_argument("--out", metavar="report/",
                   help="report directory (samples.csv + summary.json); "
                        "- prints the summary JSON")

    p = add("urdf", cmd_urdf, "URDF tree plus closed-loop sidecar.")
    p.add_argument("--out", metavar="hand.urdf",
                   help="URDF path; the sidecar lands next to it as "
                        "<stem>.sidecar.json; - prints one combined JSON")

    p = add("characterize", cmd_characterize,
            "Ingest hardware logs: kinematic error, force fits, design sweeps.")
    p.add_argument("mode", choices=("mae", "force", "sweep"),
                   help="mae: pose log accuracy; force: per-direction "
                        "force/advance fits; sweep: workspace metrics over "
                        "a geometry grid")
    p.add_argument("--in", dest="infile", metavar="log.csv", required=True,
                   help="input CSV (mae/force) or sweep-spec JSON")
    p.add_argument("--grid", type=int, default=5, metavar="n",
                   help="sweep lattice points per axis (default 5)")
    p.add_argument("--csv", metavar="out.csv", help="sweep rows as CSV")
    p.add_argument("--out", metavar="path", help="output JSON path or -")

    p = add("teleop-replay", cmd_teleop_replay,
            "Map a recorded hand-pose stream to actuation commands.")
    p.add_argument("--stream", metavar="s.jsonl", required=True,
                   help="JSON Lines pose samples (t, wrist, four digit tips)")
    p.add_argument("--mapping", required=True, choices=sorted(MAPPINGS),
                   help="teleoperation construction")
    p.add_argument("--max-speed", type=float, default=100.0, metavar="mm/s",
                   help="fingertip rate limit during replay (default 100)")
    p.add_argument("--out", metavar="cmds.jsonl", help="output JSONL path or -")

    p = add("serve", cmd_serve, "Run the HTTP + WebSocket session service.")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", metavar="dir",
                   help="static browser UI bundle (default: ./frontend/dist)")

    p = add("hand-template", cmd_hand_template,
            "Print a starter hand configuration JSON.", with_hand=False)
    p.add_argument("--fingers", type=int, default=4, metavar="n")
    p.add_argument("--out", metavar="path", help="output JSON path or -")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) or usage error (1)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except (GraspError, KeyError, TypeError, ValueError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
