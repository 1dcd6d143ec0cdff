"""HTTP API for the labeling loop and planner.

JSON over HTTP, one route per workflow step. Every error body carries a
machine code. Per-session mutations are serialized by an in-process lock
and persisted before the response goes out; reads never mutate state.
The storage root comes from the STYLE_OPT_DATA_DIR environment variable
unless a directory is passed explicitly.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .costs import FeaturizedCost, ObjectiveConfig
from .kinematics import ArmModel, fk_batch
from .learning import TrainerSettings
from .optimizer import OptimizerSettings, optimize
from .query import (
    AlreadyLabeledError,
    BatchPendingError,
    UnknownPairError,
    apply_label,
    next_batch,
    run_training_round,
)
from .seeding import TAG_TRAIN, derive_seed
from .store import Session, SessionStore, SessionNotFoundError, new_session
from .trajectory import PerturbationSpec, Task, Trajectory, time_trajectory

DEFAULT_DATA_DIR = "./styleopt_data"


class ApiError(Exception):
    """Error with an HTTP status and a machine-readable code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _trajectory_payload(session: Session, trajectory: Trajectory) -> dict:
    """Waypoints plus server-computed EE path and timestamps for rendering."""
    timed = time_trajectory(trajectory, session.duration)
    pos, point = fk_batch(session.arm.lengths, session.arm.base_height, trajectory.waypoints)
    return {
        "trajectory": trajectory.to_json(),
        "timestamps": timed.timestamps.tolist(),
        "ee_path": {"positions": pos.tolist(), "pointings": point.tolist()},
    }


def _cost_summary(session: Session) -> dict:
    if isinstance(session.cost, FeaturizedCost):
        return {
            "type": "featurized",
            "style": session.style,
            "uses_velocity": session.cost.uses_velocity,
            "w": session.cost.w.tolist(),
        }
    return {
        "type": "mlp",
        "style": session.style,
        "num_parameters": session.cost.num_parameters(),
        "weight_norm": float(np.sqrt(sum(float(np.sum(a * a)) for a in session.cost.weights))),
    }


def _parse_session_body(body: dict) -> Session:
    if not isinstance(body, dict):
        raise ValueError("body must be a JSON object")
    for key in ("style", "cost_type"):
        if key not in body:
            raise ValueError(f"missing required field {key!r}")
    settings = body.get("settings") or {}
    arm = ArmModel.from_json(body["arm"]) if body.get("arm") else None
    tasks = [Task.from_json(t) for t in body["tasks"]] if body.get("tasks") else None
    eval_task = Task.from_json(body["eval_task"]) if body.get("eval_task") else None
    trainer = None
    trainer_keys = {"learning_rate", "epochs_per_round", "augmentation_factor"}
    if trainer_keys & settings.keys():
        lr = settings.get("learning_rate")
        trainer = TrainerSettings(
            learning_rate=None if lr is None else float(lr),  # None keeps family defaults
            epochs_per_round=settings.get("epochs_per_round"),
            augmentation_factor=int(settings.get("augmentation_factor", 8)),
            rng_seed=int(settings.get("seed", 0)),
        )
    perturb = None
    if {"delta_magnitude", "variants_per_round"} & settings.keys():
        perturb = PerturbationSpec(
            delta_magnitude=float(settings.get("delta_magnitude", 0.35)),
            count=int(settings.get("variants_per_round", 7)),
            rng_seed=int(settings.get("seed", 0)),
        )
    return new_session(
        body["style"],
        body["cost_type"],
        arm=arm,
        tasks=tasks,
        eval_task=eval_task,
        seed=int(settings.get("seed", 0)),
        uses_velocity=bool(settings.get("uses_velocity", False)),
        lam=float(settings.get("lambda", 0.5)),
        T=int(settings.get("T", 10)),
        duration=float(settings.get("duration", 5.0)),
        pairs_per_batch=int(settings.get("pairs_per_batch", 4)),
        trainer=trainer,
        perturb=perturb,
    )


def create_app(data_dir=None, ui_dir=None) -> FastAPI:
    root = Path(data_dir or os.environ.get("STYLE_OPT_DATA_DIR", DEFAULT_DATA_DIR))
    store = SessionStore(root)
    sessions: dict[str, Session] = {}
    locks: dict[str, threading.RLock] = {}
    registry_lock = threading.Lock()

    app = FastAPI(title="styleopt service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    def session_lock(session_id: str) -> threading.RLock:
        with registry_lock:
            if session_id not in locks:
                locks[session_id] = threading.RLock()
            return locks[session_id]

    def get_session(session_id: str) -> Session:
        with registry_lock:
            if session_id in sessions:
                return sessions[session_id]
        try:
            session = store.load(session_id)
        except SessionNotFoundError:
            raise ApiError(404, "session_not_found", f"no session {session_id!r}")
        with registry_lock:
            sessions.setdefault(session_id, session)
            return sessions[session_id]

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        try:
            session = _parse_session_body(body)
            store.create(session)
        except (ValueError, TypeError, KeyError) as exc:
            raise ApiError(422, "invalid_config", str(exc))
        with registry_lock:
            sessions[session.session_id] = session
            locks[session.session_id] = threading.RLock()
        return {"session_id": session.session_id}

    def pair_payloads(session: Session, pairs) -> list:
        return [
            {
                "pair_id": p.pair_id,
                "a": _trajectory_payload(session, p.x_a),
                "b": _trajectory_payload(session, p.x_b),
            }
            for p in pairs
        ]

    @app.get("/sessions/{session_id}/queries/pending")
    async def queries_pending(session_id: str):
        # read-only view of the outstanding batch so a reloaded UI can
        # reconstruct mid-batch state without issuing a new batch
        session = get_session(session_id)
        with session_lock(session_id):
            return {
                "round_index": session.round_index,
                "style": session.style,
                "pairs": pair_payloads(session, session.pending),
            }

    @app.get("/sessions/{session_id}/queries/next")
    async def queries_next(session_id: str):
        session = get_session(session_id)
        with session_lock(session_id):
            if session.pending:
                raise ApiError(409, "batch_pending", "finish labeling the current batch first")
            batch = next_batch(session)
            store.append_event(
                session_id,
                "batch",
                {
                    "round": batch.round_index,
                    "batch_id": batch.batch_id,
                    "pairs": [p.to_json() for p in batch.pairs],
                },
            )
            store.save(session)
            return {
                "batch_id": batch.batch_id,
                "round_index": batch.round_index,
                "style": session.style,
                "pairs": pair_payloads(session, batch.pairs),
            }

    @app.post("/sessions/{session_id}/labels")
    async def post_label(session_id: str, body: dict):
        session = get_session(session_id)
        pair_id = body.get("pair_id")
        choice = body.get("choice")
        if not isinstance(pair_id, str):
            raise ApiError(422, "invalid_label", "pair_id must be a string")
        if choice not in ("A", "B"):
            raise ApiError(422, "invalid_label", f"choice must be A or B, got {choice!r}")
        with session_lock(session_id):
            try:
                remaining = apply_label(session, pair_id, choice)
            except UnknownPairError:
                raise ApiError(404, "pair_not_found", f"no pending pair {pair_id!r}")
            except AlreadyLabeledError as exc:
                raise ApiError(409, "already_labeled", str(exc))
            store.append_event(session_id, "label", {"pair_id": pair_id, "choice": choice})
            trained = False
            final_loss = None
            if remaining == 0:
                trained_round = session.round_index
                report = run_training_round(session)
                store.append_event(
                    session_id,
                    "training_round",
                    {
                        "round": trained_round,
                        "seed": derive_seed(session.master_seed, TAG_TRAIN, trained_round),
                        **report.to_json(),
                    },
                )
                trained = True
                final_loss = report.final_loss
            store.save(session)
            return {
                "remaining_in_batch": remaining,
                "trained": trained,
                "final_loss": final_loss,
                "round_index": session.round_index,
            }

    @app.get("/sessions/{session_id}/status")
    async def status(session_id: str):
        session = get_session(session_id)
        return {
            "session_id": session.session_id,
            "style": session.style,
            "cost_type": session.cost_type,
            "round_index": session.round_index,
            "labels_total": session.labels_total,
            "pending_pairs": len(session.pending),
            "last_loss": session.last_loss,
            "cost_snapshot_summary": _cost_summary(session),
        }

    @app.post("/sessions/{session_id}/plan")
    async def plan(session_id: str, body: dict):
        session = get_session(session_id)
        try:
            task = Task(
                start=np.asarray(body["start"], dtype=float),
                goal=np.asarray(body["goal"], dtype=float),
                duration=float(body.get("duration", session.duration)),
            )
            lam = float(body.get("lambda", session.lam))
            num_waypoints = int(body.get("T", session.T))
            if task.dof != session.arm.dof:
                raise ValueError(f"start/goal must have {session.arm.dof} joints")
            baseline = bool(body.get("baseline_only", False))
            cost = None if baseline else session.cost
            cfg = ObjectiveConfig(style_cost=cost, lam=lam)
            result = optimize(cfg, session.arm, task, num_waypoints, OptimizerSettings())
        except (ValueError, TypeError, KeyError) as exc:
            raise ApiError(422, "invalid_task", str(exc))
        payload = _trajectory_payload(session, result.trajectory)
        payload["objective_history"] = list(result.objective_history)
        payload["iterations"] = result.iterations
        payload["converged"] = result.converged
        return payload

    return app
