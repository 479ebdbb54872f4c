"""JSON model and result documents."""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np

from . import __version__
from .model import Model, StationaryPolicy, validate
from .solver import Discounted, Objective, Reachability, ReachReward, SolveResult, ValueVector
from .uncertainty import IntervalRow, L1Row, PointRow

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 4

TOP_KEYS = {
    "mdp": {"kind", "states", "initial", "actions", "transitions", "rewards"},
    "imdp": {"kind", "states", "initial", "actions", "transitions", "rewards"},
    "l1": {"kind", "states", "initial", "actions", "transitions", "deviations", "rewards"},
    "memdp": {"kind", "states", "initial", "actions", "environments", "rewards"},
}
POINT_KEYS = ("from", "action", "to", "p")
INTERVAL_KEYS = ("from", "action", "to", "lower", "upper")


class DocumentError(Exception):
    """A document could not be turned into a valid model.

    ``exit_code`` is 3 for I/O failures and 2 for everything else.
    """

    def __init__(self, diagnostics: list[str], exit_code: int = EXIT_INVALID):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics
        self.exit_code = exit_code


def read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError([f"{path}: {exc.strerror or exc}"], EXIT_IO) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError([f"{path}:{exc.lineno}:{exc.colno}: syntax error: {exc.msg}"]) from exc


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


class _Reader:
    def __init__(self):
        self.errors: list[str] = []

    def entries(self, doc: dict, key: str, path: str) -> list:
        val = doc.get(key)
        if not isinstance(val, list):
            self.errors.append(f"{path}: expected a list")
            return []
        return val

    def entry(self, obj, path: str, required: tuple[str, ...]) -> dict | None:
        if not isinstance(obj, dict):
            self.errors.append(f"{path}: expected an object")
            return None
        unknown = sorted(set(obj) - set(required))
        missing = [k for k in required if k not in obj]
        if unknown:
            self.errors.append(f"{path}: unknown key(s) {unknown}")
        if missing:
            self.errors.append(f"{path}: missing key(s) {missing}")
        if unknown or missing:
            return None
        return obj

    def name(self, obj: dict, key: str, index: dict[str, int], path: str) -> int | None:
        val = obj[key]
        if not isinstance(val, str) or val not in index:
            self.errors.append(f"{path}.{key}: unknown name {val!r}")
            return None
        return index[val]

    def number(self, obj: dict, key: str, path: str) -> float | None:
        val = obj[key]
        if not _is_number(val):
            self.errors.append(f"{path}.{key}: expected a finite number, got {val!r}")
            return None
        return float(val)


def _names(r: _Reader, doc: dict, key: str) -> list[str]:
    val = doc.get(key)
    if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
        r.errors.append(f"{key}: expected a list of strings")
        return []
    if len(set(val)) != len(val):
        r.errors.append(f"{key}: duplicate names")
    return val


def _grouped(r: _Reader, items: list, path: str, keys: tuple[str, ...], s_ix, a_ix):
    """Group transition entries into per-(s,a) ordered successor lists."""
    groups: dict[tuple[int, int], list[tuple[int, tuple[float, ...]]]] = {}
    for i, raw in enumerate(items):
        p = f"{path}[{i}]"
        e = r.entry(raw, p, keys)
        if e is None:
            continue
        s = r.name(e, "from", s_ix, p)
        a = r.name(e, "action", a_ix, p)
        t = r.name(e, "to", s_ix, p)
        nums = [r.number(e, k, p) for k in keys[3:]]
        if None in (s, a, t) or None in nums:
            continue
        succ = groups.setdefault((s, a), [])
        if any(t == u for u, _ in succ):
            r.errors.append(f"{p}: duplicate transition to {e['to']!r}")
            continue
        succ.append((t, tuple(nums)))
    return groups


def model_from_document(doc: Any) -> Model:
    """Turn a decoded document into a validated model (raises DocumentError)."""
    r = _Reader()
    if not isinstance(doc, dict):
        raise DocumentError(["document: expected a JSON object"])
    kind = doc.get("kind")
    if kind not in TOP_KEYS:
        raise DocumentError([f"kind: expected one of {sorted(TOP_KEYS)}, got {kind!r}"])
    unknown = sorted(set(doc) - TOP_KEYS[kind])
    missing = sorted(TOP_KEYS[kind] - set(doc))
    if unknown:
        r.errors.append(f"document: unknown key(s) {unknown}")
    if missing:
        raise DocumentError(r.errors + [f"document: missing key(s) {missing}"])

    states = _names(r, doc, "states")
    actions = _names(r, doc, "actions")
    s_ix = {n: i for i, n in enumerate(states)}
    a_ix = {n: i for i, n in enumerate(actions)}
    if not isinstance(doc["initial"], str) or doc["initial"] not in s_ix:
        r.errors.append(f"initial: unknown state {doc['initial']!r}")

    envs: list[dict] = []
    rows: dict = {}
    if kind == "mdp":
        g = _grouped(r, r.entries(doc, "transitions", "transitions"), "transitions", POINT_KEYS, s_ix, a_ix)
        rows = {sa: PointRow(tuple(t for t, _ in v), tuple(x[0] for _, x in v)) for sa, v in g.items()}
    elif kind == "imdp":
        g = _grouped(r, r.entries(doc, "transitions", "transitions"), "transitions", INTERVAL_KEYS, s_ix, a_ix)
        rows = {
            sa: IntervalRow(tuple(t for t, _ in v), tuple(x[0] for _, x in v), tuple(x[1] for _, x in v))
            for sa, v in g.items()
        }
    elif kind == "l1":
        g = _grouped(r, r.entries(doc, "transitions", "transitions"), "transitions", POINT_KEYS, s_ix, a_ix)
        radii: dict[tuple[int, int], float] = {}
        for i, raw in enumerate(r.entries(doc, "deviations", "deviations")):
            p = f"deviations[{i}]"
            e = r.entry(raw, p, ("state", "action", "d"))
            if e is None:
                continue
            s, a, d = r.name(e, "state", s_ix, p), r.name(e, "action", a_ix, p), r.number(e, "d", p)
            if None in (s, a, d):
                continue
            if (s, a) in radii:
                r.errors.append(f"{p}: duplicate deviation")
            radii[(s, a)] = d
        for sa in sorted(set(radii) - set(g)):
            r.errors.append(f"deviations: ({states[sa[0]]},{actions[sa[1]]}) has no transitions")
        for sa, v in g.items():
            if sa not in radii:
                r.errors.append(f"deviations: missing d for ({states[sa[0]]},{actions[sa[1]]})")
                continue
            rows[sa] = L1Row(tuple(t for t, _ in v), tuple(x[0] for _, x in v), radii[sa])
    else:
        env_docs = r.entries(doc, "environments", "environments")
        for k, env in enumerate(env_docs):
            if not isinstance(env, list):
                r.errors.append(f"environments[{k}]: expected a list of transitions")
                continue
            g = _grouped(r, env, f"environments[{k}]", POINT_KEYS, s_ix, a_ix)
            envs.append({sa: PointRow(tuple(t for t, _ in v), tuple(x[0] for _, x in v)) for sa, v in g.items()})

    rewards: dict[tuple[int, int], float] = {}
    for i, raw in enumerate(r.entries(doc, "rewards", "rewards")):
        p = f"rewards[{i}]"
        e = r.entry(raw, p, ("state", "action", "value"))
        if e is None:
            continue
        s, a, v = r.name(e, "state", s_ix, p), r.name(e, "action", a_ix, p), r.number(e, "value", p)
        if None in (s, a, v):
            continue
        if (s, a) in rewards:
            r.errors.append(f"{p}: duplicate reward")
        rewards[(s, a)] = v

    if r.errors:
        raise DocumentError(r.errors)
    model = Model(
        kind=kind,
        states=tuple(states),
        actions=tuple(actions),
        initial=s_ix[doc["initial"]],
        rows=envs[0] if kind == "memdp" and envs else rows,
        rewards=rewards,
        environments=tuple(envs),
    )
    diags = validate(model)
    if diags:
        raise DocumentError([str(d) for d in diags])
    return model


def parse_model(path: str) -> Model:
    return model_from_document(read_json(path))


def model_to_document(model: Model) -> dict:
    S, A = model.states, model.actions
    doc: dict[str, Any] = {
        "kind": model.kind,
        "states": list(S),
        "initial": S[model.initial],
        "actions": list(A),
    }

    def point_entries(rows):
        out = []
        for (s, a), row in sorted(rows.items()):
            for t, p in zip(row.support, row.probs):
                out.append({"from": S[s], "action": A[a], "to": S[t], "p": float(p)})
        return out

    if model.kind == "mdp":
        doc["transitions"] = point_entries(model.rows)
    elif model.kind == "imdp":
        doc["transitions"] = [
            {"from": S[s], "action": A[a], "to": S[t], "lower": float(lo), "upper": float(hi)}
            for (s, a), row in sorted(model.rows.items())
            for t, lo, hi in zip(row.support, row.lower, row.upper)
        ]
    elif model.kind == "l1":
        doc["transitions"] = [
            {"from": S[s], "action": A[a], "to": S[t], "p": float(p)}
            for (s, a), row in sorted(model.rows.items())
            for t, p in zip(row.support, row.center)
        ]
        doc["deviations"] = [
            {"state": S[s], "action": A[a], "d": float(row.radius)} for (s, a), row in sorted(model.rows.items())
        ]
    else:
        doc["environments"] = [point_entries(env) for env in model.environments]
    doc["rewards"] = [
        {"state": S[s], "action": A[a], "value": float(v)} for (s, a), v in sorted(model.rewards.items())
    ]
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def model_hash(model: Model) -> str:
    canon = json.dumps(model_to_document(model), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _number(x: float) -> float | str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(float(x), ".12g"))


def objective_to_document(model: Model, objective: Objective) -> dict:
    if isinstance(objective, Discounted):
        return {"type": "discounted", "discount": objective.gamma}
    return {"type": objective.name, "target": [model.states[s] for s in sorted(objective.target)]}


def policy_to_document(model: Model, policy: StationaryPolicy) -> dict:
    out: dict[str, Any] = {}
    for s, name in enumerate(model.states):
        support = policy.support(s)
        if len(support) == 1 and policy.probs[s, support[0]] == 1.0:
            out[name] = model.actions[support[0]]
        else:
            out[name] = {model.actions[a]: _number(policy.probs[s, a]) for a in support}
    return out


def policy_from_document(model: Model, doc: Any) -> StationaryPolicy:
    if isinstance(doc, dict) and set(doc) == {"policy"}:
        doc = doc["policy"]
    if not isinstance(doc, dict):
        raise DocumentError(["policy: expected an object mapping states to actions"])
    errors = []
    unknown = sorted(set(doc) - set(model.states))
    if unknown:
        errors.append(f"policy: unknown state(s) {unknown}")
    P = np.zeros((model.n_states, model.n_actions))
    for s, name in enumerate(model.states):
        if name not in doc:
            errors.append(f"policy: no choice for state {name!r}")
            continue
        choice = doc[name]
        dist = {choice: 1.0} if isinstance(choice, str) else choice
        if not isinstance(dist, dict):
            errors.append(f"policy.{name}: expected an action name or an action->probability object")
            continue
        for act, w in dist.items():
            if act not in model.actions:
                errors.append(f"policy.{name}: unknown action {act!r}")
            elif not _is_number(w) or w < 0:
                errors.append(f"policy.{name}.{act}: expected a nonnegative number")
            else:
                P[s, model.actions.index(act)] = float(w)
    if errors:
        raise DocumentError(errors)
    return StationaryPolicy(P)


def result_document(
    model: Model,
    values: ValueVector,
    policy: StationaryPolicy,
    mode: str,
    objective: Objective,
    method: str,
    extra: dict | None = None,
) -> dict:
    doc = {
        "values": {name: _number(values.values[s]) for s, name in enumerate(model.states)},
        "policy": policy_to_document(model, policy),
        "iterations": int(values.iterations),
        "converged": bool(values.converged),
        "residual": _number(values.residual),
        "mode": str(getattr(mode, "value", mode)),
        "method": method,
        "objective": objective_to_document(model, objective),
        "tool_version": __version__,
        "model_hash": model_hash(model),
    }
    if extra:
        doc.update(extra)
    return doc


def solve_result_document(model: Model, result: SolveResult, method: str, extra: dict | None = None) -> dict:
    return result_document(model, result.values, result.policy, result.mode, result.objective, method, extra)


def objective_from_names(model: Model, kind: str, target: list[str] | None, discount: float | None) -> Objective:
    if kind == "discounted":
        return Discounted(discount)
    idx = [model.state_index(t) for t in target or []]
    return ReachReward(frozenset(idx)) if kind == "reach-reward" else Reachability(frozenset(idx))
