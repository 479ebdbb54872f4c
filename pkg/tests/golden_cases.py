"""Fixed-seed CLI invocations whose output is checked against stored files.

Set RMDP_UPDATE_GOLDEN=1 to rewrite the stored outputs.
"""
import io
import os
from contextlib import redirect_stdout
from pathlib import Path

from rmdp.cli import main

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden"

CASES = {
    "solve_m1_robust": ["solve", "--model", "{data}/m1.json", "--objective", "reach-reward", "--target", "g"],
    "solve_m1_optimistic": [
        "solve", "--model", "{data}/m1.json", "--objective", "reach-reward", "--target", "g", "--mode", "optimistic",
    ],
    "solve_fig1_pi": [
        "solve", "--model", "{data}/fig1.json", "--objective", "reach-reward", "--target", "s2", "--method", "pi",
    ],
    "solve_fig1_discounted": ["solve", "--model", "{data}/fig1.json", "--objective", "discounted", "--discount", "0.9"],
    "solve_memdp_policy": [
        "solve", "--model", "{data}/ab_memdp.json", "--objective", "reachability", "--target", "g",
        "--policy", "{data}/half_policy.json",
    ],
    "generate_imdp": ["generate", "--states", "6", "--actions", "2", "--kind", "imdp", "--seed", "7"],
    "generate_l1": ["generate", "--states", "4", "--actions", "2", "--kind", "l1", "--seed", "3", "--width", "0.2"],
    "generate_mdp": ["generate", "--states", "3", "--actions", "1", "--kind", "mdp", "--seed", "1", "--width", "0"],
    "learn_coin": [
        "learn", "--truth", "{data}/coin.json", "--samples", "200", "--delta", "0.1", "--seed", "42",
        "--objective", "reach-reward", "--target", "g",
    ],
}


def run(name: str) -> tuple[int, str]:
    argv = [a.format(data=DATA) for a in CASES[name]]
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def stored(name: str) -> str | None:
    path = GOLDEN / f"{name}.json"
    if os.environ.get("RMDP_UPDATE_GOLDEN"):
        path.write_text(run(name)[1], encoding="utf-8")
    return path.read_text(encoding="utf-8") if path.exists() else None
