"""Command-line entry points.

Subcommands: train-oracle (automated preference training against a stored
ground-truth cost), serve (HTTP service for the labeling UI), plan (optimize
a task with a saved session's cost) and eval (held-out pairwise agreement).
Machine-readable results go to stdout, diagnostics to stderr; exit code 0
means full success and 2 means a configuration or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .costs import ObjectiveConfig, cost_from_json
from .learning import TrainerSettings
from .optimizer import OptimizerSettings, optimize
from .oracles import BUILTIN, load_oracle
from .presets import default_eval_task
from .query import Oracle, heldout_agreement, run_oracle_training
from .seeding import TAG_ORACLE, derive_seed
from .store import SessionStore, export_trajectory, load_session_dir, new_session
from .trajectory import PerturbationSpec, Task, time_trajectory


class CliError(Exception):
    pass


def _load_cost_file(source: str):
    """Cost snapshot from a JSON file path or a built-in oracle name."""
    path = Path(source)
    if path.is_file():
        try:
            return cost_from_json(json.loads(path.read_text()))
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot load cost from {source}: {exc}")
    if source in BUILTIN:
        return load_oracle(source)
    raise CliError(f"oracle {source!r} is neither a file nor a built-in ({', '.join(BUILTIN)})")


def _parse_config_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError:
        raise CliError(f"cannot parse joint vector from {text!r}")


def _merge_config_file(args: argparse.Namespace, parser_defaults: dict):
    """Apply a JSON config file under explicitly given flags."""
    if not getattr(args, "config", None):
        return
    path = Path(args.config)
    if not path.is_file():
        raise CliError(f"config file {path} not found")
    data = json.loads(path.read_text())
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise CliError(f"unknown config key {key!r}")
        # explicit flags (non-default values) win over the file
        if getattr(args, attr) == parser_defaults.get(attr):
            setattr(args, attr, value)


def _cmd_train_oracle(args) -> int:
    oracle_cost = _load_cost_file(args.oracle)
    uses_velocity = bool(getattr(oracle_cost, "uses_velocity", False)) if args.cost == "featurized" else False
    trainer = TrainerSettings(
        learning_rate=args.learning_rate,
        epochs_per_round=args.epochs,
        augmentation_factor=args.augmentation,
        rng_seed=args.seed,
    )
    session = new_session(
        args.style,
        args.cost,
        seed=args.seed,
        uses_velocity=uses_velocity,
        lam=args.objective_lambda,
        T=args.waypoints,
        pairs_per_batch=args.pairs_per_batch,
        trainer=trainer,
        perturb=PerturbationSpec(delta_magnitude=args.delta, count=args.variants, rng_seed=args.seed),
    )
    store = SessionStore(args.out)
    store.create(session)
    oracle = Oracle(oracle_cost, mode=args.oracle_mode, rng_seed=derive_seed(args.seed, TAG_ORACLE))
    print(f"session {session.session_id} -> {store.session_dir(session.session_id)}", file=sys.stderr)
    print("round\tlabels\tmean_loss\tagreement")

    def progress(row):
        print(f"{row['round']}\t{row['labels_total']}\t{row['mean_loss']:.6f}\t{row['agreement']:.4f}")

    report = run_oracle_training(session, oracle, args.rounds, store=store, eval_pairs=args.eval_pairs, progress=progress)
    print(f"final\t{report.labels_total}\t{session.last_loss if session.last_loss is not None else float('nan'):.6f}\t{report.final_agreement:.4f}")
    report_path = store.session_dir(session.session_id) / "report.json"
    report_path.write_text(json.dumps(report.to_json(), indent=1))
    print(f"report written to {report_path}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if args.port < 0 or args.port > 65535:
        raise CliError(f"invalid port {args.port}")
    if args.ui is not None and not Path(args.ui).is_dir():
        raise CliError(f"UI directory {args.ui} not found (build the frontend first)")
    app = create_app(args.data_dir, ui_dir=args.ui)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as exc:  # uvicorn exits via SystemExit when the port is busy
        if exc.code not in (0, None):
            raise CliError(f"server failed to start (port {args.port} busy?)")
    return 0


def _cmd_plan(args) -> int:
    try:
        session = load_session_dir(args.session)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot load session from {args.session}: {exc}")
    start = _parse_config_vector(args.start)
    goal = _parse_config_vector(args.goal)
    if start.shape[0] != session.arm.dof or goal.shape[0] != session.arm.dof:
        raise CliError(f"start/goal must have {session.arm.dof} joint values")
    task = Task(start=start, goal=goal, duration=args.duration or session.duration)
    lam = session.lam if args.objective_lambda is None else args.objective_lambda
    cfg = ObjectiveConfig(style_cost=session.cost, lam=lam)
    result = optimize(cfg, session.arm, task, args.waypoints or session.T, OptimizerSettings())
    timed = time_trajectory(result.trajectory, task.duration)
    export_trajectory(timed, args.out)
    print(
        json.dumps(
            {
                "objective_initial": result.objective_history[0],
                "objective_final": result.objective_history[-1],
                "iterations": result.iterations,
                "converged": result.converged,
                "out": str(args.out),
            }
        )
    )
    return 0


def _cmd_eval(args) -> int:
    target = Path(args.session)
    if target.is_dir() or target.name == "session.json":
        session = load_session_dir(target)
        learned = session.cost
        arm = session.arm
        task = session.eval_task or default_eval_task()
        num_waypoints = session.T
    else:
        learned = _load_cost_file(args.session)
        from .kinematics import default_arm

        arm = default_arm()
        task = default_eval_task()
        num_waypoints = args.waypoints or 10
    oracle_cost = _load_cost_file(args.oracle)
    agreement = heldout_agreement(
        learned,
        oracle_cost,
        arm,
        task,
        num_waypoints,
        n_pairs=args.pairs,
        rng_seed=args.seed,
    )
    print(json.dumps({"agreement": agreement, "pairs": args.pairs}))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="styleopt", description="Preference-learned motion style workbench")
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = {}

    def register(p, name):
        defaults[name] = {a.dest: a.default for a in p._actions}
        return p

    p = sub.add_parser("train-oracle", help="run automated preference training against a ground-truth cost")
    p.add_argument("--style", default="sad")
    p.add_argument("--cost", choices=("featurized", "mlp"), default="featurized")
    p.add_argument("--oracle", default="sad", help="cost JSON file or built-in name (happy/sad/hesitant)")
    p.add_argument("--oracle-mode", choices=("deterministic", "sampled"), default="deterministic")
    p.add_argument("--rounds", type=int, default=25)
    p.add_argument("--pairs-per-batch", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="./styleopt_data")
    p.add_argument("--lambda", dest="objective_lambda", type=float, default=0.5)
    p.add_argument("--waypoints", "--T", dest="waypoints", type=int, default=10)
    p.add_argument("--epochs", type=int, default=None, help="training epochs per round (default 200 featurized / 500 mlp)")
    p.add_argument("--learning-rate", type=float, default=None, help="step size (default 0.5 featurized / 1e-3 mlp)")
    p.add_argument("--augmentation", type=int, default=8, help="rotation copies per labeled pair (mlp only)")
    p.add_argument("--delta", type=float, default=0.35, help="perturbation magnitude (rad)")
    p.add_argument("--variants", type=int, default=7, help="perturbed candidates per round")
    p.add_argument("--eval-pairs", type=int, default=200)
    p.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    register(p, "train-oracle")
    p.set_defaults(func=_cmd_train_oracle)

    p = sub.add_parser("serve", help="run the labeling/planning HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--data-dir", default=None, help="session root (default: STYLE_OPT_DATA_DIR or ./styleopt_data)")
    p.add_argument("--ui", default=None, help="serve a built labeling UI from this directory at /ui")
    register(p, "serve")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("plan", help="optimize a task with a saved session's cost")
    p.add_argument("--session", required=True, help="session directory")
    p.add_argument("--start", required=True,
                   help='comma-separated joint values; write --start="-0.8,0.6,0.5" when the first one is negative')
    p.add_argument("--goal", required=True)
    p.add_argument("--lambda", dest="objective_lambda", type=float, default=None)
    p.add_argument("--waypoints", "--T", dest="waypoints", type=int, default=None)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--out", required=True, help="output file (.json or .csv)")
    register(p, "plan")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("eval", help="held-out pairwise agreement of a session (or cost file) vs an oracle")
    p.add_argument("--session", required=True, help="session directory or cost JSON file")
    p.add_argument("--oracle", required=True)
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--waypoints", "--T", dest="waypoints", type=int, default=None)
    register(p, "eval")
    p.set_defaults(func=_cmd_eval)

    return parser, defaults


def main(argv=None) -> int:
    parser, defaults = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config_file(args, defaults[args.command])
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
