"""Session state, on-disk persistence and log replay.

Layout per session: <root>/<session_id>/session.json (current snapshot),
log.jsonl (append-only config/batch/label/training_round events) and an
exports/ directory. Snapshots are written to a temp file and renamed, so
readers only ever see complete documents. Floats round-trip exactly through
JSON, which is what makes log replay bit-identical.
"""

from __future__ import annotations

import csv
import json
import os
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .costs import FeaturizedCost, MlpCost, StyleCost, cost_from_json, cost_to_json
from .kinematics import ArmModel, default_arm
from .learning import PreferencePair, TrainerSettings, update_weights
from .optimizer import OptimizerSettings
from .presets import (
    DEFAULT_DURATION,
    DEFAULT_LAMBDA,
    DEFAULT_PAIRS_PER_BATCH,
    DEFAULT_T,
    default_eval_task,
    default_tasks,
)
from .seeding import TAG_INIT, derive_seed
from .trajectory import PerturbationSpec, Task, TimedTrajectory

SCHEMA_VERSION = 1


class SessionNotFoundError(KeyError):
    """No stored session with the requested id."""


@dataclass
class Session:
    """One style-learning run: configuration, label history, current cost."""

    session_id: str
    style: str
    cost_type: str
    cost: StyleCost
    arm: ArmModel
    tasks: list
    eval_task: Task | None
    trainer: TrainerSettings
    perturb: PerturbationSpec
    lam: float = DEFAULT_LAMBDA
    T: int = DEFAULT_T
    duration: float = DEFAULT_DURATION
    pairs_per_batch: int = DEFAULT_PAIRS_PER_BATCH
    master_seed: int = 0
    round_index: int = 0
    last_loss: float | None = None
    query_optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    history: list = field(default_factory=list)
    pending: list = field(default_factory=list)

    @property
    def labels_total(self) -> int:
        return len(self.history)


def new_session(
    style: str,
    cost_type: str,
    *,
    arm: ArmModel | None = None,
    tasks: list | None = None,
    eval_task: Task | None = None,
    seed: int = 0,
    uses_velocity: bool = False,
    lam: float = DEFAULT_LAMBDA,
    T: int = DEFAULT_T,
    duration: float = DEFAULT_DURATION,
    pairs_per_batch: int = DEFAULT_PAIRS_PER_BATCH,
    trainer: TrainerSettings | None = None,
    perturb: PerturbationSpec | None = None,
    query_optimizer: OptimizerSettings | None = None,
    dropout: float = 0.1,
    session_id: str | None = None,
) -> Session:
    """Fresh session with a deterministically initialized cost snapshot."""
    if cost_type not in ("featurized", "mlp"):
        raise ValueError(f"cost_type must be featurized or mlp, got {cost_type!r}")
    if seed < 0:
        raise ValueError("seed must be >= 0")
    if T < 4:
        raise ValueError("T must be >= 4 (query perturbations need interior waypoints)")
    arm = arm if arm is not None else default_arm()
    if tasks is None:
        if arm.dof != 3:
            raise ValueError("built-in tasks exist only for the default 3-joint arm")
        tasks = default_tasks()
    if eval_task is None:
        eval_task = default_eval_task() if arm.dof == 3 else None
    for t in tasks + ([eval_task] if eval_task else []):
        if t.dof != arm.dof:
            raise ValueError(f"task dof {t.dof} does not match arm dof {arm.dof}")
    if cost_type == "featurized":
        n_weights = 3 + (T - 1) if uses_velocity else 3
        cost: StyleCost = FeaturizedCost(style_name=style, w=np.zeros(n_weights), uses_velocity=uses_velocity)
    else:
        cost = MlpCost.initialize(style, arm.dof, rng_seed=derive_seed(seed, TAG_INIT), dropout_rate=dropout)
    return Session(
        session_id=session_id or f"{style}-{cost_type}-{uuid.uuid4().hex[:8]}",
        style=style,
        cost_type=cost_type,
        cost=cost,
        arm=arm,
        tasks=list(tasks),
        eval_task=eval_task,
        trainer=trainer or TrainerSettings(rng_seed=seed),
        perturb=perturb or PerturbationSpec(rng_seed=seed),
        lam=lam,
        T=T,
        duration=duration,
        pairs_per_batch=pairs_per_batch,
        master_seed=seed,
        query_optimizer=query_optimizer or OptimizerSettings(),
    )


def session_to_json(session: Session) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "session_id": session.session_id,
        "style": session.style,
        "cost_type": session.cost_type,
        "cost": cost_to_json(session.cost),
        "arm": session.arm.to_json(),
        "tasks": [t.to_json() for t in session.tasks],
        "eval_task": session.eval_task.to_json() if session.eval_task else None,
        "trainer": session.trainer.to_json(),
        "perturbation": {
            "delta_magnitude": session.perturb.delta_magnitude,
            "count": session.perturb.count,
            "rng_seed": session.perturb.rng_seed,
        },
        "lambda": session.lam,
        "query_optimizer": session.query_optimizer.to_json(),
        "T": session.T,
        "duration": session.duration,
        "pairs_per_batch": session.pairs_per_batch,
        "master_seed": session.master_seed,
        "round_index": session.round_index,
        "last_loss": session.last_loss,
        "history": [p.to_json() for p in session.history],
        "pending": [p.to_json() for p in session.pending],
    }


def session_from_json(data: dict) -> Session:
    arm = ArmModel.from_json(data["arm"])
    cost = cost_from_json(data["cost"])
    session = Session(
        session_id=data["session_id"],
        style=data["style"],
        cost_type=data["cost_type"],
        cost=cost,
        arm=arm,
        tasks=[Task.from_json(t) for t in data["tasks"]],
        eval_task=Task.from_json(data["eval_task"]) if data.get("eval_task") else None,
        trainer=TrainerSettings.from_json(data["trainer"]),
        perturb=PerturbationSpec(**data["perturbation"]),
        lam=float(data["lambda"]),
        query_optimizer=OptimizerSettings.from_json(data["query_optimizer"]),
        T=int(data["T"]),
        duration=float(data["duration"]),
        pairs_per_batch=int(data["pairs_per_batch"]),
        master_seed=int(data["master_seed"]),
        round_index=int(data["round_index"]),
        last_loss=data.get("last_loss"),
        history=[PreferencePair.from_json(p) for p in data["history"]],
        pending=[PreferencePair.from_json(p) for p in data["pending"]],
    )
    _check_consistency(session)
    return session


def _check_consistency(session: Session):
    """Cross-field dimension checks; raises before any state is exposed."""
    dof = session.arm.dof
    for t in session.tasks + ([session.eval_task] if session.eval_task else []):
        if t.dof != dof:
            raise ValueError(f"task dof {t.dof} does not match arm dof {dof}")
    if isinstance(session.cost, MlpCost) and session.cost.input_dim != 2 * dof + 7:
        raise ValueError("network input width does not match arm dof")
    for p in session.history + session.pending:
        if p.x_a.dof != dof:
            raise ValueError(f"stored pair {p.pair_id} has dof {p.x_a.dof}, arm has {dof}")


def _validate_finite(obj, path="$"):
    if isinstance(obj, float) and not np.isfinite(obj):
        raise ValueError(f"non-finite value at {path}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _validate_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _validate_finite(v, f"{path}[{i}]")


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


class SessionStore:
    """Directory-backed persistence; one writer per session."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def exists(self, session_id: str) -> bool:
        return (self.session_dir(session_id) / "session.json").is_file()

    def list_sessions(self) -> list[str]:
        return sorted(p.parent.name for p in self.root.glob("*/session.json"))

    def create(self, session: Session):
        d = self.session_dir(session.session_id)
        if (d / "session.json").exists():
            raise FileExistsError(f"session {session.session_id} already exists")
        d.mkdir(parents=True, exist_ok=True)
        (d / "exports").mkdir(exist_ok=True)
        self.append_event(session.session_id, "config", {"session": session_to_json(session)})
        self.save(session)

    def save(self, session: Session):
        data = session_to_json(session)
        _validate_finite(data)
        d = self.session_dir(session.session_id)
        d.mkdir(parents=True, exist_ok=True)
        _atomic_write(d / "session.json", json.dumps(data, indent=1, allow_nan=False))

    def load(self, session_id: str) -> Session:
        path = self.session_dir(session_id) / "session.json"
        if not path.is_file():
            raise SessionNotFoundError(session_id)
        return session_from_json(json.loads(path.read_text()))

    def append_event(self, session_id: str, kind: str, payload: dict):
        if kind not in ("config", "batch", "label", "training_round"):
            raise ValueError(f"unknown event kind {kind!r}")
        record = {"ts": datetime.now(timezone.utc).isoformat(), "kind": kind, **payload}
        _validate_finite(record)
        d = self.session_dir(session_id)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "log.jsonl", "a") as fh:
            fh.write(json.dumps(record, allow_nan=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def read_log(self, session_id: str) -> list[dict]:
        path = self.session_dir(session_id) / "log.jsonl"
        if not path.is_file():
            raise SessionNotFoundError(session_id)
        return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]

    def export_path(self, session_id: str, name: str) -> Path:
        d = self.session_dir(session_id) / "exports"
        d.mkdir(parents=True, exist_ok=True)
        return d / name


def load_session_dir(path) -> Session:
    """Load a session from its directory (as written by SessionStore)."""
    path = Path(path)
    file = path / "session.json" if path.is_dir() else path
    if not file.is_file():
        raise SessionNotFoundError(str(path))
    return session_from_json(json.loads(file.read_text()))


def replay_session(store: SessionStore, session_id: str) -> Session:
    """Rebuild a session purely from its event log.

    Training rounds rerun with the logged per-round seeds and epoch counts,
    so the resulting cost parameters are bit-identical to the live run's.
    """
    events = store.read_log(session_id)
    if not events or events[0]["kind"] != "config":
        raise ValueError("log must start with a config event")
    session = session_from_json(events[0]["session"])
    for event in events[1:]:
        kind = event["kind"]
        if kind == "batch":
            if session.pending:
                raise ValueError("batch event while pairs were still pending")
            session.pending = [PreferencePair.from_json(p) for p in event["pairs"]]
        elif kind == "label":
            pid = event["pair_id"]
            match = [i for i, p in enumerate(session.pending) if p.pair_id == pid]
            if not match:
                raise ValueError(f"label for unknown pair {pid}")
            pair = session.pending.pop(match[0])
            session.history.append(pair.with_label(event["choice"]))
        elif kind == "training_round":
            settings = replace(
                session.trainer,
                rng_seed=int(event["seed"]),
                epochs_per_round=int(event["epochs"]),
            )
            session.cost, report = update_weights(session.cost, session.arm, session.history, settings)
            session.last_loss = report.final_loss
            session.round_index = int(event["round"]) + 1
    return session


def export_trajectory(timed: TimedTrajectory, path, fmt: str | None = None):
    """Write a timed trajectory as json or csv (columns time,q1..qD)."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt == "json":
        data = timed.to_json()
        _validate_finite(data)
        _atomic_write(path, json.dumps(data, indent=1, allow_nan=False))
    elif fmt == "csv":
        w = timed.trajectory.waypoints
        if not np.all(np.isfinite(w)):
            raise ValueError("refusing to export non-finite waypoints")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time"] + [f"q{j + 1}" for j in range(w.shape[1])])
            for t in range(w.shape[0]):
                writer.writerow([repr(float(timed.timestamps[t]))] + [repr(float(v)) for v in w[t]])
    else:
        raise ValueError(f"unknown export format {fmt!r} (use json or csv)")
