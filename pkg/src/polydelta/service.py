"""HTTP + WebSocket service around a single live hand session.

One process owns one authoritative hand configuration (parameters,
coupling topology, synergy maps, teleop mapper) and one actuation state.
Commands — fingertip targets, teleoperation samples, mapping and synergy
switches — are applied sequentially under a lock, last writer wins.
Read-only endpoints snapshot the state; grasp sampling runs on a worker
pool and never mutates the session.

WebSocket clients at ``/ws`` receive ``state`` frames: immediately after
each command they send (throttled to at most 60 Hz) and from a
background ticker at 10 Hz while connected.  Malformed frames get an
``error`` reply and the connection stays open.

Wire format: JSON, millimetres / degrees / seconds, and every message —
HTTP response or WebSocket frame — carries ``schema_version``.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .grasp import GraspCancelled, sample_grasps
from .hand import (
    SCHEMA_VERSION,
    CouplingTopology,
    HandParams,
    InvalidTopologyError,
    build_synergy,
    hand_fk,
    hand_from_json,
    hand_workspace,
    identity_topology,
    preset_topology,
    standard_hand,
)
from .objects import object_from_dict
from .teleop import (
    MAPPINGS,
    Calibration,
    PoseSample,
    TeleopError,
    TeleopMapper,
    default_assignment,
)

BROADCAST_MIN_INTERVAL = 1.0 / 60.0  # cap: at most 60 state frames/s
TICK_INTERVAL = 0.1                  # floor: 10 Hz while clients are connected
MAX_WORKSPACE_GRID = 15


def _stamp(payload: dict) -> dict:
    payload.setdefault("schema_version", SCHEMA_VERSION)
    return payload


class Session:
    """The single authoritative state owner.

    Every mutation happens inside ``self.lock`` and replaces the affected
    fields together, so a concurrent snapshot never sees parameters from
    one configuration and synergy maps from another.
    """

    def __init__(self, params: HandParams, topology: CouplingTopology):
        self.lock = threading.Lock()
        with self.lock:
            self._install(params, topology)

    # -- configuration ------------------------------------------------

    def _install(self, params: HandParams, topology: CouplingTopology) -> None:
        """Swap in a validated configuration; caller holds the lock."""
        synergy = build_synergy(params, topology)  # validates the pairing
        mapper = TeleopMapper(params, topology)
        self.params = params
        self.topology = topology
        self.synergy = synergy
        self.mapper = mapper
        self.calib = Calibration(assignment=default_assignment(params.n_fingers))
        self.mapping = "direct"
        self.reduced = mapper.home_reduced.copy()
        self.residuals = np.zeros(params.n_fingers)
        self.tracking_error = np.zeros(params.n_fingers)
        self.last_teleop_t = -np.inf
        self._workspace_summary = None

    def replace(self, params: HandParams | None, topology) -> None:
        """Atomically adopt new parameters and/or a new topology.

        ``topology`` may be a CouplingTopology, a preset name ("12", "9",
        "5" for a four-finger hand), a topology dict, or None to keep the
        current one (falling back to the identity coupling when the link
        count changes).
        """
        with self.lock:
            new_params = params if params is not None else self.params
            if topology is None:
                new_topology = (
                    self.topology
                    if self.topology.n_links == new_params.n_links
                    else identity_topology(new_params.n_fingers)
                )
            elif isinstance(topology, CouplingTopology):
                new_topology = topology
            elif isinstance(topology, str):
                new_topology = preset_topology(new_params, topology)
            else:
                try:
                    new_topology = CouplingTopology.from_dict(topology)
                except (KeyError, TypeError, ValueError) as exc:
                    raise InvalidTopologyError(f"bad topology document: {exc!r}")
            self._install(new_params, new_topology)

    def switch_topology(self, spec) -> None:
        self.replace(None, spec)

    # -- state --------------------------------------------------------

    def snapshot(self) -> dict:
        """A complete ``state`` frame; consistent because it runs locked."""
        with self.lock:
            full = self.synergy.expand(self.reduced)
            tips = hand_fk(
                self.params, self.topology, self.reduced, synergy=self.synergy
            )
            return _stamp(
                {
                    "type": "state",
                    "timestamp": time.time(),
                    "mapping": self.mapping,
                    "n_fingers": self.params.n_fingers,
                    "n_reduced": int(self.synergy.n_reduced),
                    "reduced_actuation": self.reduced.tolist(),
                    "full_actuation": full.tolist(),
                    "fingertips": tips.tolist(),
                    "residuals": self.residuals.tolist(),
                    "tracking_error": self.tracking_error.tolist(),
                }
            )

    def apply_targets(self, raw_targets) -> None:
        """Drive fingertips toward raw world targets (total: clamps first)."""
        try:
            targets = np.asarray(raw_targets, dtype=float)
        except (TypeError, ValueError):
            targets = np.empty(0)
        if targets.shape != (self.params.n_fingers, 3) or not np.all(
            np.isfinite(targets)
        ):
            raise ValueError(
                f"targets must be a finite {self.params.n_fingers}x3 array of mm"
            )
        with self.lock:
            cmd = self.mapper.solve(np.zeros(3), targets)
            self.reduced = np.asarray(cmd.reduced_actuation, dtype=float)
            self.residuals = np.asarray(cmd.residual, dtype=float)
            self.tracking_error = np.asarray(cmd.tracking_error, dtype=float)

    def apply_teleop(self, sample_doc: dict) -> bool:
        """Apply one teleoperation sample; returns False when stale."""
        sample = PoseSample.from_dict(sample_doc)
        with self.lock:
            if sample.t <= self.last_teleop_t:
                return False  # stale frame: the live session drops it
            self.last_teleop_t = sample.t
            construction = MAPPINGS[self.mapping]
            cmd = self.mapper.solve(*construction(sample, self.calib, self.mapper))
            self.reduced = np.asarray(cmd.reduced_actuation, dtype=float)
            self.residuals = np.asarray(cmd.residual, dtype=float)
            self.tracking_error = np.asarray(cmd.tracking_error, dtype=float)
            return True

    def set_mapping(self, name: str) -> None:
        if name not in MAPPINGS:
            raise TeleopError(f"unknown mapping {name!r}; pick from {sorted(MAPPINGS)}")
        with self.lock:
            self.mapping = name

    def workspace_summary(self) -> dict:
        with self.lock:
            if self._workspace_summary is None:
                ws = hand_workspace(
                    self.params, self.topology, grid_per_axis=4, compute_overlap=False
                )
                self._workspace_summary = {
                    "bbox_min": ws.bbox_min.tolist(),
                    "bbox_max": ws.bbox_max.tolist(),
                    "extents": ws.extents.tolist(),
                }
            return dict(self._workspace_summary)

    def hand_doc(self) -> dict:
        with self.lock:
            params, topology, synergy = self.params, self.topology, self.synergy
        doc = {
            "hand_params": params.to_dict(),
            "topology": topology.to_dict(),
            "n_reduced": int(synergy.n_reduced),
            "synergy": {
                "projection": synergy.projection.tolist(),
                "expansion": synergy.expansion.tolist(),
            },
            "workspace_summary": self.workspace_summary(),
        }
        return _stamp(doc)


# ===================== grasp jobs =====================


@dataclass
class GraspJob:
    id: str
    config: dict
    status: str = "queued"  # queued | running | done | failed | cancelled
    total: int = 0
    completed: int = 0
    result: dict | None = None
    error: str | None = None
    cancel_event: threading.Event = field(default_factory=threading.Event)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def bump(self, k: int) -> None:
        with self._lock:
            self.completed += k

    def to_doc(self) -> dict:
        with self._lock:
            progress = self.completed / self.total if self.total else 0.0
            return _stamp(
                {
                    "id": self.id,
                    "status": self.status,
                    "progress": round(min(progress, 1.0), 4),
                    "config": self.config,
                    "result": self.result,
                    "error": self.error,
                }
            )


_SAMPLING_KEYS = {
    "n_samples",
    "n_heights",
    "seed",
    "sigma",
    "mu",
    "n_edges",
    "tip_radius",
    "step",
}


class JobStore:
    """Grasp sampling jobs on a worker pool, isolated from the session."""

    def __init__(self, max_workers: int = 2):
        self._pool = ThreadPoolExecutor(max_workers=max_workers)
        self._jobs: dict[str, GraspJob] = {}
        self._lock = threading.Lock()

    def submit(self, session: Session, body: dict) -> GraspJob:
        if not isinstance(body, dict) or "object" not in body:
            raise ValueError("body must be an object with an 'object' descriptor")
        obj = object_from_dict(body["object"])
        sampling = body.get("sampling", {})
        if not isinstance(sampling, dict):
            raise ValueError("'sampling' must be an object")
        unknown = set(sampling) - _SAMPLING_KEYS
        if unknown:
            raise ValueError(f"unknown sampling keys {sorted(unknown)}")
        kwargs = {k: sampling[k] for k in _SAMPLING_KEYS if k in sampling}
        n_samples = int(kwargs.pop("n_samples", 200))
        if n_samples < 1:
            raise ValueError("n_samples must be at least 1")

        # the job runs against the configuration at submission time
        with session.lock:
            params, topology = session.params, session.topology

        job = GraspJob(
            id=uuid.uuid4().hex[:12],
            config={"object": body["object"], "sampling": dict(sampling)},
            total=n_samples,
        )
        with self._lock:
            self._jobs[job.id] = job

        def run() -> None:
            with job._lock:
                if job.status == "cancelled":
                    return
                job.status = "running"
            try:
                study = sample_grasps(
                    params,
                    topology,
                    obj,
                    n_samples=n_samples,
                    cancel_check=job.cancel_event.is_set,
                    progress=job.bump,
                    **kwargs,
                )
            except GraspCancelled:
                with job._lock:
                    job.status = "cancelled"
            except Exception as exc:  # surface config errors to the poller
                with job._lock:
                    job.status = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
            else:
                with job._lock:
                    job.status = "done"
                    job.result = study.summary()

        self._pool.submit(run)
        return job

    def get(self, job_id: str) -> GraspJob:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise KeyError(job_id)
        return job

    def cancel(self, job_id: str) -> GraspJob:
        job = self.get(job_id)
        with job._lock:
            if job.status in ("queued", "running"):
                job.cancel_event.set()
                if job.status == "queued":
                    job.status = "cancelled"
            # done / failed / cancelled jobs are immutable
        return job

    def list_docs(self) -> list[dict]:
        with self._lock:
            jobs = list(self._jobs.values())
        return [j.to_doc() for j in jobs]

    def shutdown(self) -> None:
        with self._lock:
            jobs = list(self._jobs.values())
        for job in jobs:
            job.cancel_event.set()
        self._pool.shutdown(wait=False, cancel_futures=True)


# ===================== websocket hub =====================


class Hub:
    """Connected sockets plus the shared broadcast throttle."""

    def __init__(self, session: Session):
        self.session = session
        self.clients: set[WebSocket] = set()
        self._send_lock = asyncio.Lock()
        self._last_broadcast = 0.0

    async def broadcast(self) -> None:
        """Send one state frame to every client, capped at 60 Hz."""
        async with self._send_lock:
            now = time.monotonic()
            wait = BROADCAST_MIN_INTERVAL - (now - self._last_broadcast)
            if wait > 0:
                await asyncio.sleep(wait)
            state = self.session.snapshot()
            text = json.dumps(state)
            for ws in list(self.clients):
                try:
                    await ws.send_text(text)
                except Exception:
                    self.clients.discard(ws)
            self._last_broadcast = time.monotonic()

    async def ticker(self) -> None:
        """Keep state flowing at >= 10 Hz while anyone is connected."""
        while True:
            await asyncio.sleep(TICK_INTERVAL)
            if self.clients and (
                time.monotonic() - self._last_broadcast >= TICK_INTERVAL
            ):
                await self.broadcast()


def _ws_error(detail: str) -> dict:
    return _stamp({"type": "error", "detail": detail})


def handle_ws_message(session: Session, text: str) -> dict | None:
    """Apply one client frame; returns an error frame or None on success."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        return _ws_error(f"invalid JSON: {exc}")
    if not isinstance(msg, dict) or "type" not in msg:
        return _ws_error("message must be an object with a 'type' field")
    version = msg.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        return _ws_error(f"unsupported schema_version {version!r}")

    kind = msg["type"]
    try:
        if kind == "targets":
            session.apply_targets(msg.get("targets"))
        elif kind == "teleop_sample":
            sample = msg.get("sample")
            if not isinstance(sample, dict):
                return _ws_error("teleop_sample needs a 'sample' object")
            session.apply_teleop(sample)
        elif kind == "mapping":
            session.set_mapping(msg.get("mapping", ""))
        elif kind == "synergy":
            if "topology" not in msg:
                return _ws_error("synergy needs a 'topology' preset name or object")
            session.switch_topology(msg["topology"])
        else:
            return _ws_error(f"unknown message type {kind!r}")
    except (TypeError, ValueError) as exc:  # covers Teleop/InvalidTopology errors
        return _ws_error(str(exc))
    return None


# ===================== application =====================


_FALLBACK_UI = """<!doctype html>
<title>polydelta</title>
<h1>polydelta service</h1>
<p>The browser UI bundle is not built. Run <code>npm run build</code> in
<code>frontend/</code> and restart, or use the JSON API under
<code>/api</code> and the WebSocket at <code>/ws</code>.</p>
"""


def create_app(
    params: HandParams | None = None,
    topology: CouplingTopology | None = None,
    *,
    ui_dir: str | None = None,
    job_workers: int = 2,
) -> FastAPI:
    params = params or standard_hand(4)
    topology = topology or identity_topology(params.n_fingers)
    session = Session(params, topology)
    jobs = JobStore(max_workers=job_workers)
    hub = Hub(session)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(hub.ticker())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
            jobs.shutdown()

    app = FastAPI(title="polydelta", version="0.1.0", lifespan=lifespan)
    app.state.session = session
    app.state.jobs = jobs
    app.state.hub = hub

    # -- hand configuration --------------------------------------------

    @app.get("/api/hand")
    def get_hand():
        return session.hand_doc()

    @app.put("/api/hand")
    def put_hand(body: dict):
        try:
            new_params = (
                HandParams.from_dict(body["hand_params"])
                if "hand_params" in body
                else None
            )
            session.replace(new_params, body.get("topology"))
        except InvalidTopologyError as exc:
            raise HTTPException(status_code=422, detail=f"InvalidTopology: {exc}")
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"InvalidParams: {exc}")
        return session.hand_doc()

    # -- read-only geometry ---------------------------------------------

    @app.get("/api/workspace")
    def get_workspace(resolution: int = 5):
        if not 2 <= resolution <= MAX_WORKSPACE_GRID:
            raise HTTPException(
                status_code=422,
                detail=f"resolution must be within 2..{MAX_WORKSPACE_GRID}",
            )
        with session.lock:
            params_now, topology_now = session.params, session.topology
        ws = hand_workspace(
            params_now, topology_now, grid_per_axis=resolution, compute_overlap=False
        )
        doc = ws.to_json()
        doc.pop("overlap", None)
        return _stamp(doc)

    @app.post("/api/ik")
    def post_ik(body: dict):
        targets = body.get("targets") if isinstance(body, dict) else None
        if targets is None:
            raise HTTPException(status_code=422, detail="body needs 'targets'")
        try:
            session.apply_targets(targets)
        except (ValueError, TeleopError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return session.snapshot()

    @app.get("/api/urdf")
    def get_urdf():
        from .urdf import generate

        with session.lock:
            params_now, topology_now = session.params, session.topology
        bundle = generate(params_now, topology_now)
        return _stamp({"urdf": bundle.urdf, "sidecar": bundle.sidecar})

    # -- grasp jobs ------------------------------------------------------

    @app.post("/api/grasp/jobs", status_code=202)
    def post_job(body: dict):
        try:
            job = jobs.submit(session, body)
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return job.to_doc()

    @app.get("/api/grasp/jobs")
    def list_jobs():
        return _stamp({"jobs": jobs.list_docs()})

    @app.get("/api/grasp/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            return jobs.get(job_id).to_doc()
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")

    @app.post("/api/grasp/jobs/{job_id}/cancel")
    def cancel_job(job_id: str):
        try:
            return jobs.cancel(job_id).to_doc()
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no job {job_id!r}")

    # -- websocket --------------------------------------------------------

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        hub.clients.add(ws)
        try:
            await ws.send_text(json.dumps(session.snapshot()))
            while True:
                try:
                    text = await ws.receive_text()
                except WebSocketDisconnect:
                    raise
                except Exception:
                    await ws.send_text(json.dumps(_ws_error("expected a text frame")))
                    continue
                error = handle_ws_message(session, text)
                if error is not None:
                    await ws.send_text(json.dumps(error))
                else:
                    await hub.broadcast()
        except WebSocketDisconnect:
            pass
        finally:
            hub.clients.discard(ws)

    # -- browser UI --------------------------------------------------------

    resolved_ui = Path(ui_dir) if ui_dir else Path.cwd() / "frontend" / "dist"
    if resolved_ui.is_dir():
        app.mount("/ui", StaticFiles(directory=str(resolved_ui), html=True), name="ui")
    else:

        @app.get("/ui", response_class=HTMLResponse)
        def ui_fallback():
            return _FALLBACK_UI

    return app


def serve(
    host: str = "127.0.0.1",
    port: int = 8000,
    *,
    hand_path: str | None = None,
    ui_dir: str | None = None,
) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    if hand_path:
        params, topology = hand_from_json(Path(hand_path).read_text())
    else:
        params, topology = standard_hand(4), identity_topology(4)
    app = create_app(params, topology, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
