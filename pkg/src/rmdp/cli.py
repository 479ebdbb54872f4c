"""Command-line interface: ``rmdp solve | generate | learn | validate``.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 iteration limit reached (the result is still written).
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import documents as D
from .generate import random_model
from .learn import PacConfig, contains, pac_pipeline
from .model import ModelError
from .solver import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITER,
    Mode,
    ValueVector,
    memdp_best_stationary,
    memdp_evaluate,
    policy_evaluation,
    solve,
)


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("RMDP_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"RMDP_THREADS must be a positive integer, got {raw!r}")
    return n


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise D.DocumentError([f"{path}: {exc.strerror or exc}"], D.EXIT_IO) from exc


def _add_objective_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--objective", required=True, choices=["reach-reward", "reachability", "discounted"])
    p.add_argument("--target", help="comma-separated target states (reach objectives)")
    p.add_argument("--discount", type=float, help="discount factor in [0, 1) (discounted objective)")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)


def _objective(args, model):
    if args.objective == "discounted":
        if args.target is not None:
            raise UsageError("--target cannot be combined with --objective discounted")
        if args.discount is None:
            raise UsageError("--objective discounted needs --discount")
        if not 0.0 <= args.discount < 1.0:
            raise UsageError("--discount must lie in [0, 1)")
        return D.objective_from_names(model, "discounted", None, args.discount)
    if args.discount is not None:
        raise UsageError(f"--discount cannot be combined with --objective {args.objective}")
    if not args.target:
        raise UsageError(f"--objective {args.objective} needs --target")
    names = [t.strip() for t in args.target.split(",") if t.strip()]
    unknown = [t for t in names if t not in model.states]
    if unknown:
        raise UsageError(f"unknown target state(s): {', '.join(unknown)}")
    return D.objective_from_names(model, args.objective, names, None)


def _check_numeric(args) -> None:
    if not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    if args.max_iter < 0:
        raise UsageError("--max-iter must be nonnegative")


def cmd_solve(args) -> int:
    _check_numeric(args)
    threads = _threads()
    model = D.parse_model(args.model)
    objective = _objective(args, model)
    mode = Mode(args.mode)
    method = args.method or "vi"

    if model.kind == "memdp":
        if mode is not Mode.ROBUST or args.method == "pi":
            raise UsageError("memdp models support only --mode robust with enumeration or --policy")
        if args.policy:
            policy = D.policy_from_document(model, D.read_json(args.policy))
            ev = memdp_evaluate(model, policy, objective)
            worst = np.min(np.vstack(ev.per_environment), axis=0)
            extra = {
                "environments": [
                    {name: D._number(v[s]) for s, name in enumerate(model.states)} for v in ev.per_environment
                ],
                "worst_environment": ev.worst_environment,
            }
            doc = D.result_document(model, ValueVector(worst, 0.0, 0, True), policy, mode, objective, "evaluate", extra)
        else:
            res = memdp_best_stationary(model, objective)
            doc = D.solve_result_document(model, res, "enumerate")
        _write(D.dumps(doc), args.output)
        return D.EXIT_OK

    if args.policy:
        if args.method is not None:
            raise UsageError("--policy evaluates a fixed policy; --method does not apply")
        policy = D.policy_from_document(model, D.read_json(args.policy))
        vv = policy_evaluation(model, policy, objective, mode, args.epsilon, args.max_iter, threads)
        doc = D.result_document(model, vv, policy, mode, objective, "evaluate")
        converged = vv.converged
    else:
        res = solve(model, objective, mode, method, args.epsilon, args.max_iter, threads)
        doc = D.solve_result_document(model, res, method)
        converged = res.values.converged
    _write(D.dumps(doc), args.output)
    return D.EXIT_OK if converged else D.EXIT_NOT_CONVERGED


def cmd_generate(args) -> int:
    width = args.width
    if width is None:
        width = 0.0 if args.kind == "mdp" else 0.1
    try:
        model = random_model(args.states, args.actions, args.kind, args.density, args.seed, width)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write(D.dumps(D.model_to_document(model)), args.output)
    return D.EXIT_OK


def cmd_learn(args) -> int:
    _check_numeric(args)
    truth = D.parse_model(args.truth)
    if truth.kind != "mdp":
        raise UsageError(f"--truth must be a point mdp, got kind={truth.kind!r}")
    objective = _objective(args, truth)
    try:
        cfg = PacConfig(args.delta, args.samples, args.eps_min)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = pac_pipeline(truth, cfg, objective, args.seed, args.epsilon, args.max_iter)
    learned = D.model_to_document(res.imdp)
    out = {
        "model": learned,
        "result": D.solve_result_document(res.imdp, res.robust, "vi"),
        "truth_result": D.solve_result_document(truth, res.nominal, "vi"),
        "learning": {
            "delta": cfg.delta,
            "delta_prime": res.delta_prime,
            "samples": cfg.n_per_sa,
            "seed": args.seed,
            "eps_min": cfg.eps_min,
            "contains_truth": contains(res.imdp, truth),
        },
    }
    if args.model_output:
        _write(D.dumps(learned), args.model_output)
    _write(D.dumps(out), args.output)
    ok = res.robust.values.converged and res.nominal.values.converged
    return D.EXIT_OK if ok else D.EXIT_NOT_CONVERGED


def cmd_validate(args) -> int:
    model = D.parse_model(args.model)
    sys.stdout.write(f"ok: {model.kind} with {model.n_states} states\n")
    return D.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmdp", description="Solve robust MDPs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve or evaluate a model")
    p.add_argument("--model", required=True)
    _add_objective_flags(p)
    p.add_argument("--mode", choices=[m.value for m in Mode], default="robust")
    p.add_argument("--method", choices=["vi", "pi"])
    p.add_argument("--policy", help="JSON policy to evaluate instead of optimizing")
    p.add_argument("--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="write a random model document")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--actions", type=int, required=True)
    p.add_argument("--kind", choices=["imdp", "mdp", "l1"], default="imdp")
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=float)
    p.add_argument("--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn a PAC interval MDP from a simulated ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-min", type=float, default=1e-6)
    _add_objective_flags(p)
    p.add_argument("--model-output")
    p.add_argument("--output")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("validate", help="check a model document")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rmdp: error: {exc}", file=sys.stderr)
        return D.EXIT_INVALID
    except D.DocumentError as exc:
        for line in exc.diagnostics:
            print(f"rmdp: {line}", file=sys.stderr)
        return exc.exit_code
    except (ModelError, ValueError, KeyError) as exc:
        print(f"rmdp: error: {exc}", file=sys.stderr)
        return D.EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
