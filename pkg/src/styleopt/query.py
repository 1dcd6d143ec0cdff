"""The active preference-query loop.

Each round: plan a locally optimal trajectory under the current cost
estimate for the round's task, draw smooth random variants of it so the
labeler sees genuinely different motions, pair the candidates up, collect
labels (from a human via the service, or from a synthetic oracle), then
retrain on every label gathered so far. Strictly alternating: a new batch
cannot be issued while unlabeled pairs remain.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .costs import ObjectiveConfig, StyleCost, style_cost_batch, style_cost_value
from .kinematics import ArmModel
from .learning import PreferencePair, TrainingReport, update_weights
from .optimizer import optimize
from .seeding import TAG_EVAL, TAG_PAIRS, TAG_QUERY, TAG_TRAIN, derive_rng, derive_seed
from .trajectory import PerturbationSpec, Task, linear_interpolation, smooth_perturbation


class BatchPendingError(RuntimeError):
    """A new batch was requested while unlabeled pairs remain."""


class NoTasksError(ValueError):
    """The session has no training tasks configured."""


class UnknownPairError(KeyError):
    """Label posted for a pair id that is not part of the pending batch."""


class AlreadyLabeledError(RuntimeError):
    """Label posted for a pair that already has one."""


@dataclass(frozen=True)
class QueryBatch:
    batch_id: str
    pairs: tuple
    round_index: int

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("a query batch cannot be empty")


class Oracle:
    """Synthetic labeler defined by a ground-truth style cost.

    deterministic mode prefers the lower-cost side (ties go to A);
    sampled mode draws from the logistic choice probability.
    """

    def __init__(self, ground_truth: StyleCost, mode: str = "deterministic", rng_seed: int = 0):
        if mode not in ("deterministic", "sampled"):
            raise ValueError(f"oracle mode must be deterministic or sampled, got {mode!r}")
        self.ground_truth = ground_truth
        self.mode = mode
        self.rng_seed = rng_seed
        self._rng = np.random.default_rng(rng_seed)


def oracle_label(oracle: Oracle, arm: ArmModel, pair: PreferencePair) -> str:
    """Label one pair the way the oracle's ground-truth cost orders it."""
    if pair.label is not None:
        raise AlreadyLabeledError(f"pair {pair.pair_id} is already labeled")
    c_a = style_cost_value(oracle.ground_truth, arm, pair.x_a)
    c_b = style_cost_value(oracle.ground_truth, arm, pair.x_b)
    if oracle.mode == "deterministic":
        return "A" if c_a <= c_b else "B"
    return "A" if oracle._rng.random() < expit(c_b - c_a) else "B"


def next_batch(session, pairs_per_batch: int | None = None) -> QueryBatch:
    """Generate and register the next batch of unlabeled query pairs.

    Deterministic given the session's master seed, round index and current
    cost snapshot. Every candidate keeps the round task's endpoints, so all
    queries stay feasible plans.
    """
    if session.pending:
        raise BatchPendingError("finish labeling the current batch first")
    if not session.tasks:
        raise NoTasksError("session has no training tasks")
    n_pairs = pairs_per_batch if pairs_per_batch is not None else session.pairs_per_batch
    if n_pairs < 1:
        raise ValueError("pairs_per_batch must be >= 1")
    task = session.tasks[session.round_index % len(session.tasks)]
    cfg = ObjectiveConfig(style_cost=session.cost, lam=session.lam)
    x0 = optimize(cfg, session.arm, task, session.T, session.query_optimizer).trajectory
    spec = replace(
        session.perturb,
        rng_seed=derive_seed(session.master_seed, TAG_QUERY, session.round_index),
    )
    candidates = [x0, *smooth_perturbation(x0, spec)]
    rng = derive_rng(session.master_seed, TAG_PAIRS, session.round_index)
    indices = []
    if len(candidates) >= 2 * n_pairs:
        order = rng.permutation(len(candidates))
        indices = [(int(order[2 * i]), int(order[2 * i + 1])) for i in range(n_pairs)]
    else:
        for _ in range(n_pairs):
            a, b = rng.choice(len(candidates), size=2, replace=False)
            indices.append((int(a), int(b)))
    pairs = tuple(
        PreferencePair(
            x_a=candidates[a],
            x_b=candidates[b],
            pair_id=f"r{session.round_index:03d}p{i}",
        )
        for i, (a, b) in enumerate(indices)
    )
    batch = QueryBatch(batch_id=f"r{session.round_index:03d}", pairs=pairs, round_index=session.round_index)
    session.pending = list(pairs)
    return batch


def apply_label(session, pair_id: str, choice: str) -> int:
    """Record a label for a pending pair; returns how many remain unlabeled."""
    if choice not in ("A", "B"):
        raise ValueError(f"choice must be A or B, got {choice!r}")
    for i, pair in enumerate(session.pending):
        if pair.pair_id == pair_id:
            session.history.append(pair.with_label(choice))
            del session.pending[i]
            return len(session.pending)
    if any(p.pair_id == pair_id for p in session.history):
        raise AlreadyLabeledError(f"pair {pair_id} is already labeled")
    raise UnknownPairError(pair_id)


def run_training_round(session) -> TrainingReport:
    """Retrain on the full label history; advances the round index."""
    if session.pending:
        raise BatchPendingError("unlabeled pairs remain")
    if not session.history:
        raise ValueError("no labeled pairs to train on")
    seed = derive_seed(session.master_seed, TAG_TRAIN, session.round_index)
    settings = replace(session.trainer, rng_seed=seed)
    session.cost, report = update_weights(session.cost, session.arm, session.history, settings)
    session.last_loss = report.final_loss
    session.round_index += 1
    return report


def heldout_agreement(
    learned: StyleCost | None,
    ground_truth: StyleCost,
    arm: ArmModel,
    task: Task,
    num_waypoints: int,
    n_pairs: int = 200,
    delta_magnitude: float = 0.35,
    rng_seed: int = 0,
) -> float:
    """Fraction of held-out pairs both costs order the same way.

    Pairs are smooth perturbations of the task's smoothness-optimal
    trajectory. A pair either side cannot order (exactly equal costs)
    counts half. Scale-invariant: only orderings matter.
    """
    base = linear_interpolation(task, num_waypoints)
    spec = PerturbationSpec(delta_magnitude=delta_magnitude, count=2 * n_pairs, rng_seed=rng_seed)
    stack = np.stack([v.waypoints for v in smooth_perturbation(base, spec)])
    c_learned = style_cost_batch(learned, arm, stack).reshape(-1, 2)
    c_truth = style_cost_batch(ground_truth, arm, stack).reshape(-1, 2)
    d_learned = np.sign(c_learned[:, 1] - c_learned[:, 0])
    d_truth = np.sign(c_truth[:, 1] - c_truth[:, 0])
    score = np.where(d_learned == d_truth, 1.0, 0.0)
    score[(d_learned == 0) | (d_truth == 0)] = 0.5
    return float(score.mean())


@dataclass(frozen=True)
class OracleRunReport:
    """Per-round losses and held-out agreements for an automated run."""

    rounds: tuple
    labels_total: int
    final_agreement: float

    def to_json(self) -> dict:
        return {
            "rounds": [dict(r) for r in self.rounds],
            "labels_total": self.labels_total,
            "final_agreement": self.final_agreement,
        }


def run_oracle_training(
    session,
    oracle: Oracle,
    rounds: int,
    store=None,
    eval_pairs: int = 200,
    progress=None,
) -> OracleRunReport:
    """Drive the full query -> label -> retrain loop with a synthetic labeler.

    Evaluates held-out pairwise agreement after every round on the session's
    evaluation task (fixed pair set per session). When a store is given,
    every batch, label and training round is persisted as it happens.
    """
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    eval_task = session.eval_task
    if eval_task is None:
        raise ValueError("session has no evaluation task")
    eval_seed = derive_seed(session.master_seed, TAG_EVAL)

    def agreement() -> float:
        return heldout_agreement(
            session.cost,
            oracle.ground_truth,
            session.arm,
            eval_task,
            session.T,
            n_pairs=eval_pairs,
            delta_magnitude=session.perturb.delta_magnitude,
            rng_seed=eval_seed,
        )

    rows = []
    for _ in range(rounds):
        batch = next_batch(session)
        if store is not None:
            store.append_event(
                session.session_id,
                "batch",
                {
                    "round": batch.round_index,
                    "batch_id": batch.batch_id,
                    "pairs": [p.to_json() for p in batch.pairs],
                },
            )
        for pair in batch.pairs:
            choice = oracle_label(oracle, session.arm, pair)
            apply_label(session, pair.pair_id, choice)
            if store is not None:
                store.append_event(session.session_id, "label", {"pair_id": pair.pair_id, "choice": choice})
        report = run_training_round(session)
        if store is not None:
            trained_round = session.round_index - 1
            store.append_event(
                session.session_id,
                "training_round",
                {
                    "round": trained_round,
                    "seed": derive_seed(session.master_seed, TAG_TRAIN, trained_round),
                    **report.to_json(),
                },
            )
            store.save(session)
        row = {
            "round": session.round_index - 1,
            "labels_total": len(session.history),
            "mean_loss": report.final_loss,
            "agreement": agreement(),
        }
        rows.append(row)
        if progress is not None:
            progress(row)
    return OracleRunReport(
        rounds=tuple(rows),
        labels_total=len(session.history),
        final_agreement=rows[-1]["agreement"] if rows else agreement(),
    )
