"""HTTP face of the workbench: one instance served for interactive sessions.

Endpoints (all JSON unless noted):

    GET  /terrain                 grid metadata and the 900 altitude values
    POST /evaluate?session=ID     body {"vector": [15 reals]} -> fitness,
                                  covered count, and the coverage bitset
    GET  /session/log?session=ID  improvement log, runlog text format
    POST /session/reset?session=ID
    GET  /trajectories/{algo}.csv lower-median best-so-far curve of a
                                  benchmarked algorithm on this instance
                                  (requires a logs directory, else 404)

Every evaluation goes through the same code path as the batch objective, so
the numbers a session sees are exactly what the optimizers saw.  The bitset
packs voxel k = itheta*900 + iy*30 + ix into bit k (little-endian within each
byte), 3,375 bytes, then base64.
"""

from __future__ import annotations

import base64
import re
import threading

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import runlog
from .coverage import (EvaluationCounter, Instance, TOTAL_VOXELS, coverage)
from .radar import DecodeError, decode

SESSION_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class EvaluateRequest(BaseModel):
    vector: list[float]


def encode_coverage_map(cover: np.ndarray) -> str:
    """(30, 30, 30) bool map -> base64 of the packed little-endian bitset."""
    bits = np.packbits(cover.ravel().astype(np.uint8), bitorder="little")
    return base64.b64encode(bits.tobytes()).decode("ascii")


class Session:
    """One interactive player's evaluation history.

    Counts evaluations and records improvements exactly like an optimizer
    run, so the exported log is an ordinary trajectory file whose algorithm
    field is ``human_<session_id>``.
    """

    def __init__(self, session_id: str, instance_name: str):
        self.session_id = session_id
        self.instance_name = instance_name
        self.counter = EvaluationCounter(None, budget=None, name=instance_name)

    def record(self, value: float, vector) -> None:
        self.counter.observe(value, vector)

    def log_text(self) -> str:
        count = self.counter.count
        traj = runlog.RunTrajectory(
            algorithm=f"human_{self.session_id}",
            instance=self.instance_name, seed=0, budget=count,
            points=list(self.counter.improvements))
        # an untouched session exports a bare header
        return runlog.dumps_run(traj, validate=count > 0)


def _median_curve_csv(logs_dir: str, instance_name: str, algo: str) -> str:
    trajs = []
    for inst, found_algo, _, path in runlog.scan_logs(logs_dir):
        if inst == instance_name and found_algo == algo:
            trajs.append(runlog.read_run(path))
    if not trajs:
        raise HTTPException(
            status_code=404,
            detail=f"no logs for {instance_name}/{algo}")
    grid = sorted({ev for t in trajs for ev, _ in t.points})
    lines = ["evaluation,value"]
    for ev, val in runlog.median_trajectory(trajs, grid):
        lines.append(f"{ev},{val!r}")
    return "\n".join(lines) + "\n"


def create_app(instance: Instance, logs_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="radarbench")
    sessions: dict[str, Session] = {}
    lock = threading.Lock()

    def get_session(session: str) -> Session:
        if not SESSION_ID_RE.match(session):
            raise HTTPException(status_code=400,
                                detail="session id must match [A-Za-z0-9_-]{1,64}")
        with lock:
            if session not in sessions:
                sessions[session] = Session(session, instance.name)
            return sessions[session]

    @app.get("/terrain")
    def terrain():
        grid = instance.grid
        return {
            "name": grid.name,
            "width": grid.width,
            "height": grid.height,
            "cell_size": grid.cell_size,
            # row-major: all 30 columns of row 0, then row 1, ...
            "altitudes": [float(v) for v in grid.altitudes.ravel()],
        }

    @app.post("/evaluate")
    def evaluate(body: EvaluateRequest, session: str = "default"):
        state = get_session(session)
        try:
            config = decode(body.vector, instance.physics)
        except DecodeError as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        result = coverage(instance, config)
        fitness = float(TOTAL_VOXELS - result.covered)
        state.record(fitness, body.vector)
        return {
            "fitness": fitness,
            "covered": result.covered,
            "coverage_map": encode_coverage_map(result.map),
        }

    @app.get("/session/log", response_class=PlainTextResponse)
    def session_log(session: str = "default"):
        return get_session(session).log_text()

    @app.post("/session/reset")
    def session_reset(session: str = "default"):
        state = get_session(session)
        with lock:
            sessions[session] = Session(session, instance.name)
        return {"session": session, "evaluations_discarded": state.counter.count}

    @app.get("/trajectories/{algo}.csv", response_class=PlainTextResponse)
    def trajectory_csv(algo: str):
        if logs_dir is None:
            raise HTTPException(status_code=404,
                                detail="server started without a logs directory")
        return PlainTextResponse(
            _median_curve_csv(logs_dir, instance.name, algo),
            media_type="text/csv")

    return app
