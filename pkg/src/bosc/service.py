"""HTTP backend exposing the full labeling pipeline.

Synchronous endpoints cover project CRUD, mask edits, classes,
georeferencing, tiles, stats and exports; automatic segmentation and
clustering run as asynchronous jobs polled via /jobs/{id}.  Concurrency
contract: concurrent readers per project, one exclusive writer, and no
edit is acknowledged while a job for that project is queued or running
(ProjectLocked).  Every mutation bumps the project revision; raster and
stats responses carry the revision they were computed from.
"""

from __future__ import annotations

import io
import json
import logging
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image

from . import FORMAT_VERSION
from .classification import (
    assign_classes,
    cluster,
    default_classification,
    extract_features,
    ingest_external_features,
)
from .errors import (
    BadFormat,
    BoscError,
    InvalidArgument,
    IoFailure,
    NotGeoreferenced,
    ProjectLocked,
    ProjectNotFound,
    UnknownClass,
    UnknownSegmentId,
)
from .mapping import (
    ControlPointPair,
    estimate_affine,
    export_geojson,
    render_overlay_tile,
)
from .project import ClusterParams, Project
from .raster import ClassDef, ClassSet, RasterImage
from .segmentation import (
    BrushStroke,
    SegmenterParams,
    create_segment_from_polygon,
    fill_unassigned,
    ingest_external_mask,
    merge_segments,
    paint,
    segment_auto,
)
from .stats import compute_stats, segment_areas_m2, stats_to_dict
from .store import load_project, read_segment_raster, save_project, write_segment_raster

log = logging.getLogger("bosc.service")

_STATUS_BY_CODE = {
    "ProjectNotFound": 404,
    "UnknownSegmentId": 404,
    "UnknownClass": 404,
    "ProjectLocked": 409,
    "IoFailure": 500,
    "RegistryInconsistent": 500,
}


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_root: Path = Path("./bosc-data")
    overlay_alpha: int = 160
    log_level: str = "info"
    static_dir: Path | None = None
    job_workers: int = 2
    job_delay_s: float = 0.0  # test hook: lets tests observe RUNNING jobs


def config_from_env() -> ServiceConfig:
    cfg = ServiceConfig()
    cfg.host = os.environ.get("BOSC_HOST", cfg.host)
    cfg.port = int(os.environ.get("BOSC_PORT", cfg.port))
    cfg.data_root = Path(os.environ.get("BOSC_DATA_ROOT", str(cfg.data_root)))
    cfg.overlay_alpha = int(os.environ.get("BOSC_OVERLAY_ALPHA", cfg.overlay_alpha))
    cfg.log_level = os.environ.get("BOSC_LOG_LEVEL", cfg.log_level)
    static = os.environ.get("BOSC_STATIC_DIR")
    if static:
        cfg.static_dir = Path(static)
    return cfg


@dataclass
class Job:
    job_id: str
    project_id: str
    kind: str  # "segment" | "cluster"
    status: str = "QUEUED"  # QUEUED -> RUNNING -> DONE | FAILED
    progress: float = 0.0
    error: str | None = None
    result: dict | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "project_id": self.project_id,
            "kind": self.kind,
            "status": self.status,
            "progress": self.progress,
            "error": self.error,
            "result": self.result,
        }


@dataclass
class ProjectState:
    """A project plus its service-side bookkeeping."""

    project: Project
    revision: int = 1
    lock: threading.RLock = field(default_factory=threading.RLock)
    active_job: str | None = None
    applied_batches: dict[str, dict] = field(default_factory=dict)


class Workbench:
    """All mutable service state: projects, jobs and the worker pool."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.projects: dict[str, ProjectState] = {}
        self.jobs: dict[str, Job] = {}
        self._registry_lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=config.job_workers)
        self._load_existing()

    def _load_existing(self) -> None:
        root = Path(self.config.data_root)
        if not root.is_dir():
            return
        for path in sorted(root.iterdir()):
            if (path / "project.json").exists():
                try:
                    project = load_project(path)
                except BoscError as exc:
                    log.warning("skipping %s: %s", path, exc)
                    continue
                self.projects[project.project_id] = ProjectState(project)

    def create_project(self, name: str) -> ProjectState:
        project = Project(project_id=uuid.uuid4().hex[:12], name=name)
        state = ProjectState(project)
        with self._registry_lock:
            self.projects[project.project_id] = state
        return state

    def get(self, project_id: str) -> ProjectState:
        try:
            return self.projects[project_id]
        except KeyError:
            raise ProjectNotFound(f"no project {project_id}") from None

    def require_unlocked(self, state: ProjectState) -> None:
        if state.active_job is not None:
            raise ProjectLocked(f"job {state.active_job} is active for this project")

    # -- async jobs ---------------------------------------------------------

    def submit_job(self, state: ProjectState, kind: str, body) -> Job:
        with state.lock:
            self.require_unlocked(state)
            job = Job(job_id=uuid.uuid4().hex[:12], project_id=state.project.project_id, kind=kind)
            self.jobs[job.job_id] = job
            state.active_job = job.job_id
        self._pool.submit(self._run_job, state, job, body)
        return job

    def _run_job(self, state: ProjectState, job: Job, body) -> None:
        job.status = "RUNNING"
        job.progress = 0.1
        if self.config.job_delay_s:
            time.sleep(self.config.job_delay_s)
        try:
            if job.kind == "segment":
                result = self._segment_job(state, job, body)
            else:
                result = self._cluster_job(state, job, body)
            job.result = result
            job.progress = 1.0
            job.status = "DONE"
        except Exception as exc:  # report, never crash the worker
            job.error = f"{type(exc).__name__}: {exc}"
            job.status = "FAILED"
            log.warning("job %s failed: %s", job.job_id, job.error)
        finally:
            with state.lock:
                state.active_job = None

    def _segment_job(self, state: ProjectState, job: Job, body: dict) -> dict:
        project = state.project
        if project.image is None:
            raise InvalidArgument("upload an image first")
        params = SegmenterParams(
            k=float(body.get("k", project.segmenter_params.k)),
            min_region_size=int(
                body.get("min_region_size", project.segmenter_params.min_region_size)
            ),
        )
        segmap = segment_auto(project.image, params)
        job.progress = 0.8
        with state.lock:
            project.segmap = segmap
            project.segmenter_params = params
            project.classmap = default_classification(segmap, project.class_set)
            project.features = None
            project.touch()
            state.revision += 1
            return {"revision": state.revision, "segments": len(segmap.registry)}

    def _cluster_job(self, state: ProjectState, job: Job, body: dict) -> dict:
        project = state.project
        if project.image is None or project.segmap is None or not project.segmap.registry:
            raise InvalidArgument("segment the image first")
        source = body.get("source", "builtin")
        if source == "external":
            if project.features is None:
                raise InvalidArgument("no external features uploaded")
            features = project.features
        elif source == "builtin":
            features = extract_features(project.image, project.segmap)
        else:
            raise InvalidArgument(f"unknown feature source {source!r}")
        job.progress = 0.5

        k = body.get("k")
        t = body.get("t")
        params = ClusterParams(
            k=None if k is None else int(k),
            t=None if t is None else float(t),
            standardize=bool(body.get("standardize", False)),
        )
        _, assignment = cluster(features, k=params.k, t=params.t, standardize=params.standardize)
        seeds = {int(sid): int(cid) for sid, cid in (body.get("seeds") or {}).items()}
        classmap, class_set = assign_classes(
            assignment,
            features,
            state.project.class_set,
            seeds=seeds,
            propagate=bool(body.get("propagate", False)),
        )
        with state.lock:
            project.classmap = classmap
            project.class_set = class_set
            project.cluster_params = params
            project.features = features
            project.touch()
            state.revision += 1
            clusters = len(set(assignment.values()))
            return {"revision": state.revision, "clusters": clusters}


def _summary(state: ProjectState) -> dict:
    p = state.project
    return {
        "project_id": p.project_id,
        "name": p.name,
        "created": p.created,
        "modified": p.modified,
        "revision": state.revision,
        "width": p.image.width if p.image else None,
        "height": p.image.height if p.image else None,
        "segment_count": len(p.segmap.registry) if p.segmap else 0,
        "georeferenced": p.georef is not None,
        "locked": state.active_job is not None,
    }


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidArgument(f"request body is not valid JSON: {exc}") from None
    if not isinstance(body, dict):
        raise InvalidArgument("request body must be a JSON object")
    return body


def _apply_edit_op(project: Project, op: dict):
    kind = op.get("op")
    if kind == "paint":
        stroke = BrushStroke(
            polyline=tuple((float(x), float(y)) for x, y in op["polyline"]),
            radius=float(op["radius"]),
            target_segment_id=int(op["target"]),
        )
        return paint(project.segmap, stroke)
    if kind == "merge":
        return merge_segments(project.segmap, [int(v) for v in op["ids"]])
    if kind == "polygon":
        return create_segment_from_polygon(
            project.segmap, [(float(x), float(y)) for x, y in op["ring"]]
        )
    if kind == "fill":
        return fill_unassigned(project.segmap)
    raise InvalidArgument(f"unknown edit op {kind!r}")


def _parse_feature_table(text: str) -> tuple[list[int], np.ndarray]:
    """Columnar text table: one segment per line, 'id v1 v2 ... vd'."""
    ids: list[int] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            ids.append(int(parts[0]))
            rows.append([float(v) for v in parts[1:]])
        except ValueError as exc:
            raise BadFormat(f"feature table line {lineno}: {exc}") from None
    if not ids:
        raise BadFormat("feature table is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths == {0}:
        raise BadFormat("feature rows must all have the same positive width")
    return ids, np.asarray(rows, dtype=np.float64)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    bench = Workbench(config)
    app = FastAPI(title="bosc", docs_url=None, redoc_url=None)
    app.state.bench = bench

    @app.exception_handler(BoscError)
    async def _bosc_error(request: Request, exc: BoscError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse({"code": exc.code, "message": str(exc)}, status_code=status)

    @app.get("/health")
    def health():
        return {"service": "bosc", "format_version": FORMAT_VERSION}

    @app.get("/projects")
    def list_projects():
        return [_summary(s) for s in bench.projects.values()]

    @app.post("/projects", status_code=201)
    async def create_project(request: Request):
        body = await _json_body(request)
        name = str(body.get("name") or "untitled")
        return _summary(bench.create_project(name))

    @app.get("/projects/{pid}")
    def get_project(pid: str):
        return _summary(bench.get(pid))

    # -- imagery and segment rasters ---------------------------------------

    @app.put("/projects/{pid}/image")
    async def put_image(pid: str, request: Request):
        state = bench.get(pid)
        data = await request.body()
        try:
            with Image.open(io.BytesIO(data)) as img:
                pixels = np.asarray(img.convert("RGB"))
        except Exception as exc:
            raise BadFormat(f"cannot decode image: {exc}") from None
        with state.lock:
            bench.require_unlocked(state)
            state.project.set_image(RasterImage(pixels))
            state.revision += 1
            return {
                "revision": state.revision,
                "width": state.project.image.width,
                "height": state.project.image.height,
            }

    @app.get("/projects/{pid}/image")
    def get_image(pid: str):
        state = bench.get(pid)
        with state.lock:
            if state.project.image is None:
                raise InvalidArgument("project has no image")
            buf = io.BytesIO()
            Image.fromarray(state.project.image.pixels).save(buf, format="PNG")
            rev = state.revision
        return Response(
            buf.getvalue(), media_type="image/png", headers={"X-Project-Revision": str(rev)}
        )

    @app.get("/projects/{pid}/segments")
    def get_segments(pid: str):
        state = bench.get(pid)
        with state.lock:
            if state.project.segmap is None:
                raise InvalidArgument("project has no segment raster")
            blob = write_segment_raster(state.project.segmap)
            rev = state.revision
        return Response(
            blob,
            media_type="application/octet-stream",
            headers={"X-Project-Revision": str(rev)},
        )

    @app.put("/projects/{pid}/segments")
    async def put_segments(pid: str, request: Request):
        state = bench.get(pid)
        data = await request.body()
        incoming = read_segment_raster(data)
        with state.lock:
            bench.require_unlocked(state)
            project = state.project
            if project.image is None:
                raise InvalidArgument("upload an image first")
            project.segmap = ingest_external_mask(project.image, incoming.ids)
            project.classmap = default_classification(project.segmap, project.class_set)
            project.features = None
            project.touch()
            state.revision += 1
            return {"revision": state.revision, "segments": len(project.segmap.registry)}

    @app.patch("/projects/{pid}/segments")
    async def patch_segments(pid: str, request: Request):
        state = bench.get(pid)
        body = await _json_body(request)
        batch_id = body.get("batch_id")
        if not isinstance(batch_id, str) or not batch_id:
            raise InvalidArgument("batch_id is required")
        ops = body.get("ops")
        if not isinstance(ops, list) or not ops:
            raise InvalidArgument("ops must be a non-empty list")
        with state.lock:
            if batch_id in state.applied_batches:
                return state.applied_batches[batch_id]
            bench.require_unlocked(state)
            project = state.project
            if project.segmap is None:
                raise InvalidArgument("upload an image first")
            for op in ops:
                project.segmap = _apply_edit_op(project, op)
            # keep the class map total: drop vanished segments, default new ones
            project.classmap = {
                sid: project.classmap.get(sid, 1) for sid in project.segmap.registry
            }
            project.features = None
            project.touch()
            state.revision += 1
            response = {"revision": state.revision, "applied": len(ops)}
            state.applied_batches[batch_id] = response
            return response

    # -- jobs ----------------------------------------------------------------

    @app.post("/projects/{pid}/segment/auto", status_code=202)
    async def start_segment(pid: str, request: Request):
        state = bench.get(pid)
        body = await _json_body(request) if int(request.headers.get("content-length") or 0) else {}
        if state.project.image is None:
            raise InvalidArgument("upload an image first")
        job = bench.submit_job(state, "segment", body)
        return job.to_dict()

    @app.post("/projects/{pid}/cluster", status_code=202)
    async def start_cluster(pid: str, request: Request):
        state = bench.get(pid)
        body = await _json_body(request) if int(request.headers.get("content-length") or 0) else {}
        if state.project.segmap is None or not state.project.segmap.registry:
            raise InvalidArgument("segment the image first")
        job = bench.submit_job(state, "cluster", body)
        return job.to_dict()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = bench.jobs.get(job_id)
        if job is None:
            raise ProjectNotFound(f"no job {job_id}")
        return job.to_dict()

    # -- features, classes, georeference -------------------------------------

    @app.put("/projects/{pid}/features")
    async def put_features(pid: str, request: Request):
        state = bench.get(pid)
        text = (await request.body()).decode("utf-8", errors="replace")
        ids, vectors = _parse_feature_table(text)
        with state.lock:
            bench.require_unlocked(state)
            if state.project.segmap is None:
                raise InvalidArgument("segment the image first")
            state.project.features = ingest_external_features(
                state.project.segmap, ids, vectors
            )
            state.project.touch()
            state.revision += 1
            return {"revision": state.revision, "rows": len(ids), "dim": vectors.shape[1]}

    @app.get("/projects/{pid}/classes")
    def get_classes(pid: str):
        state = bench.get(pid)
        with state.lock:
            p = state.project
            return {
                "revision": state.revision,
                "classes": [
                    {"class_id": c.class_id, "name": c.name, "color": list(c.color)}
                    for c in p.class_set.classes
                ],
                "assignment": {str(sid): cid for sid, cid in sorted(p.classmap.items())},
            }

    @app.put("/projects/{pid}/classes")
    async def put_classes(pid: str, request: Request):
        state = bench.get(pid)
        body = await _json_body(request)
        with state.lock:
            bench.require_unlocked(state)
            project = state.project
            class_set = project.class_set
            if "classes" in body:
                class_set = ClassSet(
                    [
                        ClassDef(
                            int(c["class_id"]),
                            str(c["name"]),
                            tuple(int(v) for v in c["color"]),
                        )
                        for c in body["classes"]
                    ]
                )
            classmap = project.classmap
            if "assignment" in body:
                registry = set(project.segmap.registry) if project.segmap else set()
                classmap = {int(k): int(v) for k, v in body["assignment"].items()}
                for sid in classmap:
                    if sid not in registry:
                        raise UnknownSegmentId(f"segment {sid} is not registered")
                for cid in classmap.values():
                    if cid not in class_set.ids():
                        raise UnknownClass(f"class {cid} does not exist")
                missing = registry - set(classmap)
                if missing:
                    raise InvalidArgument(f"assignment misses segments {sorted(missing)[:5]}")
            else:
                for cid in classmap.values():
                    if cid not in class_set.ids():
                        raise UnknownClass(f"class {cid} used by assignment was removed")
            project.class_set = class_set
            project.classmap = classmap
            project.touch()
            state.revision += 1
            return {"revision": state.revision}

    @app.get("/projects/{pid}/georef")
    def get_georef(pid: str):
        state = bench.get(pid)
        with state.lock:
            georef = state.project.georef
            if georef is None:
                return {"revision": state.revision, "georef": None}
            return {
                "revision": state.revision,
                "georef": {
                    "transform": list(georef.transform.coefficients()),
                    "anchor_zoom": georef.anchor_zoom,
                },
            }

    @app.put("/projects/{pid}/georef")
    async def put_georef(pid: str, request: Request):
        state = bench.get(pid)
        body = await _json_body(request)
        pairs = [
            ControlPointPair(
                image_point=(float(p["image"][0]), float(p["image"][1])),
                geo_point=(float(p["geo"][0]), float(p["geo"][1])),
            )
            for p in body.get("pairs", [])
        ]
        anchor_zoom = int(body.get("anchor_zoom", 18))
        georef = estimate_affine(pairs, anchor_zoom=anchor_zoom)
        with state.lock:
            bench.require_unlocked(state)
            state.project.georef = georef
            state.project.touch()
            state.revision += 1
            return {
                "revision": state.revision,
                "georef": {
                    "transform": list(georef.transform.coefficients()),
                    "anchor_zoom": georef.anchor_zoom,
                },
            }

    # -- read-only derived views ---------------------------------------------

    @app.get("/projects/{pid}/tiles/{z}/{x}/{y}")
    def get_tile(pid: str, z: int, x: int, y: int, alpha: int | None = None):
        state = bench.get(pid)
        with state.lock:
            p = state.project
            if p.segmap is None:
                raise NotGeoreferenced("project has no segment raster")
            tile = render_overlay_tile(
                p.segmap,
                p.classmap,
                p.class_set,
                p.georef,
                z,
                x,
                y,
                alpha=config.overlay_alpha if alpha is None else alpha,
            )
            rev = state.revision
        buf = io.BytesIO()
        Image.fromarray(tile).save(buf, format="PNG")
        return Response(
            buf.getvalue(), media_type="image/png", headers={"X-Project-Revision": str(rev)}
        )

    @app.get("/projects/{pid}/stats")
    def get_stats(pid: str):
        state = bench.get(pid)
        with state.lock:
            p = state.project
            if p.segmap is None:
                raise InvalidArgument("project has no segment raster")
            stats = compute_stats(p.segmap, p.classmap, p.georef)
            doc = stats_to_dict(stats)
            doc["revision"] = state.revision
            return doc

    @app.get("/projects/{pid}/export/geojson")
    def get_geojson(pid: str):
        state = bench.get(pid)
        with state.lock:
            p = state.project
            if p.segmap is None:
                raise NotGeoreferenced("project has no segment raster")
            areas = segment_areas_m2(p.segmap, p.georef) if p.georef else None
            return export_geojson(p.segmap, p.classmap, p.class_set, p.georef, areas)

    @app.get("/projects/{pid}/export/bundle")
    def get_bundle(pid: str):
        from .store import export_bundle

        state = bench.get(pid)
        with state.lock:
            tmp = Path(config.data_root) / f".bundle-{pid}.zip"
            tmp.parent.mkdir(parents=True, exist_ok=True)
            export_bundle(state.project, tmp)
            blob = tmp.read_bytes()
            tmp.unlink()
            rev = state.revision
        return Response(
            blob,
            media_type="application/zip",
            headers={
                "Content-Disposition": f'attachment; filename="{pid}.zip"',
                "X-Project-Revision": str(rev),
            },
        )

    @app.post("/projects/{pid}/save")
    def save(pid: str):
        state = bench.get(pid)
        with state.lock:
            bench.require_unlocked(state)
            directory = Path(config.data_root) / pid
            save_project(state.project, directory)
            return {"revision": state.revision, "path": str(directory)}

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig | None = None) -> None:
    """Run the service until interrupted (blocking)."""
    import uvicorn

    config = config or config_from_env()
    Path(config.data_root).mkdir(parents=True, exist_ok=True)
    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level=config.log_level)
