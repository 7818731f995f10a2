"""Embedded HTTP service exposing the pipeline.

Jobs are plain directories under a workspace root; every artifact is a
file, so a restarted service re-lists completed jobs.  At most K jobs
execute at once; each job is internally sequential.  Stage transitions are
written atomically (temp file + rename) under a per-process lock.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from . import pipeline, recordio
from .config import AppConfig, load_config
from .planner import PlannerInfeasible
from .sim import SimulationDiverged
from .strokes import StrokeFormatError, parse_strokes

STAGES = ("queued", "planning", "planned", "simulating", "done", "failed")
STREAM_DECIMATION = 4          # 100 Hz control rate -> 25 events/s
MAX_WORKERS = 2


class SimulateRequest(BaseModel):
    seed: int | None = None
    no_contact_compensation: bool = False


class JobStore:
    """File-backed job registry."""

    def __init__(self, root: Path, cfg: AppConfig):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.lock = threading.Lock()
        self.pool = ThreadPoolExecutor(max_workers=MAX_WORKERS)
        # in-memory cache of planned trajectories to avoid re-parsing
        self._trajectories = {}

    def job_dir(self, job_id: str) -> Path:
        d = self.root / job_id
        if not d.is_dir():
            raise HTTPException(status_code=404, detail=f"no job {job_id}")
        return d

    def state(self, job_id: str) -> dict:
        return json.loads((self.job_dir(job_id) / "state.json").read_text())

    def _write_state(self, job_id: str, state: dict):
        d = self.root / job_id
        tmp = d / "state.json.tmp"
        tmp.write_text(json.dumps(state, indent=2, sort_keys=True) + "\n")
        tmp.rename(d / "state.json")

    def transition(self, job_id: str, stage: str, **extra):
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage}")
        with self.lock:
            state = self.state(job_id)
            state["stage"] = stage
            state.update(extra)
            self._write_state(job_id, state)

    def create(self, doc: dict, baseline: bool, max_speed: float | None) -> str:
        job_id = uuid.uuid4().hex[:12]
        d = self.root / job_id
        d.mkdir()
        (d / "strokes.json").write_text(json.dumps(doc, sort_keys=True) + "\n")
        self._write_state(
            job_id,
            {
                "id": job_id,
                "stage": "queued",
                "baseline_planning": baseline,
                "max_speed": max_speed,
                "artifacts": [],
                "error": None,
            },
        )
        self.pool.submit(self._plan_job, job_id)
        return job_id

    def _artifact_done(self, job_id: str, name: str):
        with self.lock:
            state = self.state(job_id)
            if name not in state["artifacts"]:
                state["artifacts"].append(name)
            self._write_state(job_id, state)

    def _plan_job(self, job_id: str):
        d = self.root / job_id
        try:
            self.transition(job_id, "planning")
            state = self.state(job_id)
            sset = parse_strokes((d / "strokes.json").read_text())
            res = pipeline.plan_strokes(
                sset,
                self.cfg,
                baseline=state["baseline_planning"],
                max_speed=state["max_speed"],
            )
            (d / "trajectory.txt").write_text(
                recordio.dump_trajectory(res.trajectory)
            )
            self._trajectories[job_id] = (res.trajectory, res.waypoints)
            self._artifact_done(job_id, "trajectory")
            self.transition(job_id, "planned")
        except PlannerInfeasible as e:
            self.transition(
                job_id, "failed", error={"kind": "infeasible", "report": e.report}
            )
        except Exception as e:  # surfaced to the client, job marked failed
            self.transition(job_id, "failed", error={"kind": "error", "detail": str(e)})

    def simulate(self, job_id: str, req: SimulateRequest):
        state = self.state(job_id)
        if state["stage"] not in ("planned", "done"):
            raise HTTPException(
                status_code=409, detail=f"job is {state['stage']}, not planned"
            )
        self.transition(job_id, "simulating")
        self.pool.submit(self._sim_job, job_id, req)

    def _load_traj(self, job_id: str):
        if job_id in self._trajectories:
            return self._trajectories[job_id]
        d = self.root / job_id
        traj = recordio.load_trajectory((d / "trajectory.txt").read_text())
        sset = parse_strokes((d / "strokes.json").read_text())
        pwps = pipeline.strokes.to_waypoints(
            sset,
            self.cfg.surface.build(),
            self.cfg.pen.build(),
            ds=self.cfg.planner.waypoint_spacing,
            lift=self.cfg.planner.lift,
        )
        self._trajectories[job_id] = (traj, pwps)
        return traj, pwps

    def _sim_job(self, job_id: str, req: SimulateRequest):
        d = self.root / job_id
        stream_path = d / "stream.ndjson"
        try:
            traj, pwps = self._load_traj(job_id)
            stream_file = stream_path.open("w")
            count = [0]

            def on_record(rec):
                if count[0] % STREAM_DECIMATION == 0:
                    stream_file.write(
                        json.dumps(
                            {
                                "t": rec.t,
                                "tip": list(rec.meas.ee.p),
                                "F_true": rec.meas.F,
                                "F_hat": rec.F_hat,
                                "pen_width": rec.pen_width,
                            }
                        )
                        + "\n"
                    )
                    stream_file.flush()
                count[0] += 1

            try:
                log = pipeline.simulate(
                    traj,
                    self.cfg,
                    seed=req.seed,
                    contact_compensation=not req.no_contact_compensation,
                    on_record=on_record,
                )
            finally:
                stream_file.write(json.dumps({"done": True}) + "\n")
                stream_file.close()
            (d / "log.txt").write_text(recordio.dump_log(log))
            self._artifact_done(job_id, "log")
            target = pipeline.target_raster(pwps, self.cfg)
            from . import metrics
            from .cli import raster_png

            written = metrics.render(
                log,
                self.cfg.surface.build(),
                self.cfg.pen.build(),
                window=target,
            )
            raster_png(written, d / "render.png")
            self._artifact_done(job_id, "render")
            report = pipeline.evaluate(log, traj, target, self.cfg)
            (d / "metrics.json").write_text(
                json.dumps(report, indent=2, sort_keys=True) + "\n"
            )
            self._artifact_done(job_id, "metrics")
            self.transition(job_id, "done")
        except SimulationDiverged as e:
            (d / "log.txt").write_text(recordio.dump_log(e.log))
            self._artifact_done(job_id, "log")
            self.transition(
                job_id, "failed", error={"kind": "diverged", "detail": str(e)}
            )
        except Exception as e:
            self.transition(job_id, "failed", error={"kind": "error", "detail": str(e)})


def create_app(
    config_path: str | None = None, workspace: str | Path = "jobs"
) -> FastAPI:
    cfg = load_config(config_path)
    store = JobStore(Path(workspace), cfg)
    app = FastAPI(title="wallscribe")
    app.state.store = store

    @app.post("/api/jobs", status_code=202)
    def create_job(
        doc: dict, baseline_planning: bool = False, max_speed: float | None = None
    ):
        try:
            parse_strokes(json.dumps(doc))
        except StrokeFormatError as e:
            raise HTTPException(status_code=422, detail=str(e))
        job_id = store.create(doc, baseline_planning, max_speed)
        return {"id": job_id}

    @app.get("/api/jobs")
    def list_jobs():
        out = []
        for d in sorted(store.root.iterdir()):
            if (d / "state.json").is_file():
                out.append(json.loads((d / "state.json").read_text()))
        return out

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        return store.state(job_id)

    @app.post("/api/jobs/{job_id}/simulate", status_code=202)
    def simulate_job(job_id: str, req: SimulateRequest | None = None):
        store.simulate(job_id, req or SimulateRequest())
        return {"id": job_id, "stage": "simulating"}

    def _artifact(job_id: str, name: str) -> Path:
        path = store.job_dir(job_id) / name
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"{name} not ready")
        return path

    @app.get("/api/jobs/{job_id}/trajectory")
    def get_trajectory(job_id: str):
        return Response(
            _artifact(job_id, "trajectory.txt").read_text(),
            media_type="text/plain",
        )

    @app.get("/api/jobs/{job_id}/log")
    def get_log(job_id: str):
        return Response(
            _artifact(job_id, "log.txt").read_text(), media_type="text/plain"
        )

    @app.get("/api/jobs/{job_id}/render.png")
    def get_render(job_id: str):
        return Response(
            _artifact(job_id, "render.png").read_bytes(), media_type="image/png"
        )

    @app.get("/api/jobs/{job_id}/metrics")
    def get_metrics(job_id: str):
        return json.loads(_artifact(job_id, "metrics.json").read_text())

    @app.get("/api/jobs/{job_id}/stream")
    def stream(job_id: str):
        d = store.job_dir(job_id)

        def gen():
            path = d / "stream.ndjson"
            # wait for the stream to start
            for _ in range(600):
                if path.is_file():
                    break
                time.sleep(0.05)
            else:
                yield "event: error\ndata: no stream\n\n"
                return
            pos = 0
            idle = 0.0
            while idle < 30.0:
                with path.open() as f:
                    f.seek(pos)
                    lines = f.readlines()
                    pos = f.tell()
                if not lines:
                    time.sleep(0.05)
                    idle += 0.05
                    continue
                idle = 0.0
                for ln in lines:
                    ln = ln.strip()
                    if not ln:
                        continue
                    if ln == '{"done": true}':
                        yield "event: done\ndata: {}\n\n"
                        return
                    yield f"data: {ln}\n\n"

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.get("/api/config")
    def get_config():
        return cfg.model_dump()

    return app
