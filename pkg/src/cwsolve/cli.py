"""Command-line entry point: ``cwsolve {solve,transform,verify,generate,bench}``.

Exit codes: 0 yes / pass, 1 no / fail, 2 usage, input or guard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import timeit
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import cds_solver, cvc_solver, dp_engine
from .clique_expr import (CliqueExpression, ExpressionError, augment_with_dead_nodes, evaluate,
                          format_expression, make_irredundant, make_nice, parse_expression, width)
from .graph_core import GraphError, derive_seed, format_graph, parse_graph, sample_weights, validate_costs
from .lb_generator import GeneratorError, generate, parse_dimacs, verify_gadget_transitions
from .oracle import OracleGuardError, brute_cds, brute_cvc, verify_dp_tables

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2
SOLVERS = {"cvc": cvc_solver, "cds": cds_solver}
BRUTE = {"cvc": brute_cvc, "cds": brute_cds}

# Budget block of the synthetic union used by ``bench``: left operand (cost, weight)
# extent and right operand extent. Both stay fixed so time tracks the state count.
BENCH_LEFT_BLOCK = (2, 4)
BENCH_RIGHT_BLOCK = (1, 2)


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem: str | None = None
    expr: Path | None = None
    graph: Path | None = None
    costs: Path | None = None
    budget: int | None = None
    seed: int = 0
    repeats: int = dp_engine.DEFAULT_REPEATS
    jobs: int = 1
    mem_cap: int = dp_engine.DEFAULT_MEM_CAP
    out: Path | None = None
    cnf: Path | None = None
    beta: int | None = None
    find_min_cost: bool = False
    stage: str = "augmented"
    corrupt_feas: bool = False
    k_min: int = 4
    k_max: int = 9


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _positive(text: str) -> int:
    value = _nonneg(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cwsolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def problem_arg(p, required=True):
        p.add_argument("--problem", choices=sorted(SOLVERS), required=required)

    def common(p, repeats=dp_engine.DEFAULT_REPEATS):
        p.add_argument("--seed", type=_nonneg, default=0)
        p.add_argument("--repeats", type=_positive, default=repeats)
        p.add_argument("--mem-cap", type=_positive, default=dp_engine.DEFAULT_MEM_CAP,
                       help="largest table (cells) any node may allocate")
        p.add_argument("--out", type=Path)

    p = sub.add_parser("solve", help="decide whether a solution within the budget exists")
    problem_arg(p)
    p.add_argument("--expr", type=Path, required=True)
    p.add_argument("--graph", type=Path, help="graph file the expression must evaluate to")
    p.add_argument("--costs", type=Path, help="whitespace-separated vertex costs")
    p.add_argument("--budget", type=_nonneg)
    p.add_argument("--find-min-cost", action="store_true",
                   help="binary search the smallest budget answered yes")
    p.add_argument("--jobs", type=_positive, default=1)
    common(p)

    p = sub.add_parser("transform", help="rewrite an expression into nice or augmented form")
    p.add_argument("--expr", type=Path, required=True)
    p.add_argument("--stage", choices=("irredundant", "nice", "augmented"), default="augmented")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("verify", help="check DP tables and decisions against brute force")
    problem_arg(p)
    p.add_argument("--expr", type=Path, required=True)
    p.add_argument("--costs", type=Path)
    p.add_argument("--corrupt-feas", action="store_true",
                   help="flip the join feasibility table (fault injection)")
    common(p, repeats=10)

    p = sub.add_parser("generate", help="build a lower-bound instance from a CNF formula")
    problem_arg(p)
    p.add_argument("--cnf", type=Path, required=True)
    p.add_argument("--beta", type=_positive, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("bench", help="time the union kernel for growing label counts")
    problem_arg(p, required=False)
    p.add_argument("--k-min", type=_positive, default=4)
    p.add_argument("--k-max", type=_positive, default=9)
    common(p, repeats=3)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for name in vars(ns):
        if hasattr(cfg, name):
            setattr(cfg, name, getattr(ns, name))
    if cfg.command == "solve" and cfg.budget is None and not cfg.find_min_cost:
        raise CliError("solve needs --budget or --find-min-cost")
    if cfg.command == "bench" and cfg.k_min > cfg.k_max:
        raise CliError("--k-min exceeds --k-max")
    return cfg


# -- helpers ---------------------------------------------------------------

def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _load_expr(path: Path) -> CliqueExpression:
    return parse_expression(_read(path))


def _load_costs(path: Path | None) -> list[int] | None:
    if path is None:
        return None
    try:
        return [int(x) for x in _read(path).split()]
    except ValueError:
        raise CliError(f"{path}: costs must be integers") from None


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _trial_block(problem: str, expr: CliqueExpression, costs, budget: int, seed: int,
                 start: int, mem_cap: int) -> dp_engine.SolveResult:
    mod = SOLVERS[problem]
    return dp_engine.decide(mod.SPACE, expr, costs, budget, seed, 1, mod.branch_vertices,
                            mod.degenerate_rule, mem_cap, start=start)


def run_solve(problem: str, expr: CliqueExpression, costs, budget: int, seed: int, repeats: int,
              mem_cap: int, jobs: int = 1) -> dp_engine.SolveResult:
    """Same answer for any ``jobs``: trials run in waves and the earliest yes wins."""
    mod = SOLVERS[problem]
    if jobs <= 1 or repeats == 1:
        return dp_engine.decide(mod.SPACE, expr, costs, budget, seed, repeats,
                                mod.branch_vertices, mod.degenerate_rule, mem_cap)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for wave in range(0, repeats, jobs):
            starts = range(wave, min(wave + jobs, repeats))
            results = list(pool.map(_trial_block, [problem] * len(starts), [expr] * len(starts),
                                    [costs] * len(starts), [budget] * len(starts),
                                    [seed] * len(starts), starts, [mem_cap] * len(starts)))
            if results[0].trials == 0:
                return results[0]
            for res in results:
                if res.decision:
                    return res
    return dp_engine.SolveResult(mod.SPACE.name, False, repeats, budget, seed)


def find_min_cost(problem: str, expr: CliqueExpression, costs, seed: int, repeats: int,
                  mem_cap: int, jobs: int = 1) -> dict:
    aug_graph = evaluate(expr)
    total = sum(validate_costs(aug_graph, costs))
    solves = 0

    def yes(b: int) -> bool:
        nonlocal solves
        solves += 1
        return run_solve(problem, expr, costs, b, seed, repeats, mem_cap, jobs).decision

    out = {"problem": problem, "seed": seed, "repeats": repeats}
    if not yes(total):
        out.update(decision="no", solves=solves)
        return out
    lo, hi = 0, total
    while lo < hi:
        mid = (lo + hi) // 2
        if yes(mid):
            hi = mid
        else:
            lo = mid + 1
    out.update(decision="yes", min_cost=lo, solves=solves)
    return out


# -- subcommands -----------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    expr = _load_expr(cfg.expr)
    if cfg.graph is not None:
        given, built = parse_graph(_read(cfg.graph)), evaluate(expr)
        if given.adj != built.adj:
            raise CliError("expression does not evaluate to the given graph")
    costs = _load_costs(cfg.costs)
    if cfg.find_min_cost:
        report = find_min_cost(cfg.problem, expr, costs, cfg.seed, cfg.repeats, cfg.mem_cap, cfg.jobs)
        _emit(_dump(report), cfg.out)
        return EXIT_YES if report["decision"] == "yes" else EXIT_NO
    res = run_solve(cfg.problem, expr, costs, cfg.budget, cfg.seed, cfg.repeats, cfg.mem_cap, cfg.jobs)
    _emit(res.to_json() + "\n", cfg.out)
    return EXIT_YES if res.decision else EXIT_NO


def cmd_transform(cfg: RunConfig) -> int:
    expr = _load_expr(cfg.expr)
    before = width(expr)
    if expr.is_augmented():
        result = expr
    else:
        result = make_irredundant(expr)
        if cfg.stage in ("nice", "augmented"):
            result = make_nice(result)
        if cfg.stage == "augmented":
            result = augment_with_dead_nodes(result)
    _emit(format_expression(result), cfg.out)
    print(f"width before: {before} after: {width(result)}", file=sys.stderr)
    return EXIT_YES


def corrupted_space(space: dp_engine.StateSpace) -> dp_engine.StateSpace:
    return replace(space, feas=(1 - space.feas).astype(space.feas.dtype))


def cmd_verify(cfg: RunConfig) -> int:
    from .clique_expr import prepare
    expr = _load_expr(cfg.expr)
    mod = SOLVERS[cfg.problem]
    aug = prepare(expr)
    graph = evaluate(aug)
    costs = list(validate_costs(graph, _load_costs(cfg.costs)))
    space = corrupted_space(mod.SPACE) if cfg.corrupt_feas else mod.SPACE
    report: dict = {"problem": cfg.problem, "seed": cfg.seed, "corrupted": cfg.corrupt_feas}
    tables = []
    ok = True
    if graph.n >= 2:
        weights = sample_weights(graph, derive_seed(cfg.seed, 0))
        for v_star in mod.branch_vertices(graph) if graph.m else [0]:
            rep = verify_dp_tables(cfg.problem, aug, costs, weights, v_star, space=space)
            tables.append({"v_star": v_star, **rep.to_dict()})
            ok = ok and rep.ok
    report["tables"] = tables
    opt = BRUTE[cfg.problem](graph, costs)
    mismatches = []
    if ok:
        for b in range(sum(costs) + 1):
            truth = opt is not None and opt <= b
            got = dp_engine.decide(space, aug, costs, b, cfg.seed, cfg.repeats,
                                   mod.branch_vertices, mod.degenerate_rule, cfg.mem_cap).decision
            if got != truth:
                mismatches.append({"budget": b, "expected": truth, "got": got})
        report["decisions"] = {"checked": sum(costs) + 1, "mismatches": mismatches}
    report["optimum"] = opt
    report["ok"] = ok and not mismatches
    _emit(_dump(report), cfg.out)
    return EXIT_YES if report["ok"] else EXIT_NO


def cmd_generate(cfg: RunConfig) -> int:
    sat = parse_dimacs(_read(cfg.cnf))
    inst = generate(cfg.problem, sat, cfg.beta)
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "instance.graph").write_text(format_graph(inst.graph))
    (out / "instance.cex").write_text(format_expression(inst.expression))
    with open(out / "roles.tsv", "w") as fh:
        for v, name in enumerate(inst.names):
            fh.write(f"{v}\t{inst.roles[v]}\t{'/'.join(map(str, name))}\n")
    gadget = verify_gadget_transitions(cfg.problem)
    manifest = inst.manifest()
    manifest["gadget_checks_ok"] = (gadget["canonical_ok"] and gadget["diagonal_ok"]
                                    and gadget["decreasing_violated"])
    text = _dump(manifest)
    (out / "manifest.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_YES


def bench_union(problem: str, k: int, repeats: int = 3, seed: int = 0,
                mem_cap: int = 10 ** 11) -> tuple[int, float]:
    """Best-of-``repeats`` seconds per union whose operands share ``k`` live labels."""
    space = SOLVERS[problem].SPACE
    rng = np.random.default_rng(derive_seed(seed, k))
    labels = tuple(range(1, k + 1))
    shape = (space.size,) * k
    left = dp_engine.DPTable(labels, rng.integers(0, 2, shape + BENCH_LEFT_BLOCK, dtype=np.uint8))
    right = dp_engine.DPTable(labels, rng.integers(0, 2, shape + BENCH_RIGHT_BLOCK, dtype=np.uint8))
    timer = timeit.Timer(lambda: dp_engine.dp_union(space, left, right, mem_cap=mem_cap))
    # autorange picks a loop count so that one measurement lasts at least 0.2s
    loops, _ = timer.autorange()
    best = min(timer.repeat(repeat=repeats, number=loops)) / loops
    return left.values.size, best


def run_bench(problems: Sequence[str], k_min: int, k_max: int, repeats: int, seed: int) -> list[dict]:
    rows = []
    for problem in problems:
        prev = None
        for k in range(k_min, k_max + 1):
            cells, secs = bench_union(problem, k, repeats, seed)
            rows.append({"problem": problem, "k": k, "cells": cells, "seconds": secs,
                         "ratio": "" if prev is None else secs / prev})
            prev = secs
    return rows


def cmd_bench(cfg: RunConfig) -> int:
    problems = [cfg.problem] if cfg.problem else ["cvc", "cds"]
    rows = run_bench(problems, cfg.k_min, cfg.k_max, cfg.repeats, cfg.seed)
    fh = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=["problem", "k", "cells", "seconds", "ratio"])
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "seconds": f"{row['seconds']:.6f}",
                             "ratio": row["ratio"] if row["ratio"] == "" else f"{row['ratio']:.3f}"})
    finally:
        if cfg.out:
            fh.close()
    return EXIT_YES


COMMANDS = {"solve": cmd_solve, "transform": cmd_transform, "verify": cmd_verify,
            "generate": cmd_generate, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (CliError, ExpressionError, GraphError, GeneratorError, OracleGuardError,
            dp_engine.DPError, OverflowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
