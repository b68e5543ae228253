"""Brute-force references.

Nothing here reuses the solver recurrences or the fast transforms. The
partial-solution enumeration evaluates subexpressions on its own and derives
live labels from dead vertices rather than from the inductive rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .clique_expr import CliqueExpression, Dead, Introduce, Join, Relabel, Union
from .graph_core import LabeledGraph

BRUTE_LIMIT = 22
TABLE_LIMIT = 8
NAIVE_K_LIMIT = 5


class OracleGuardError(ValueError):
    pass


@dataclass
class EnumeratedSolutionSet:
    """Subsets (as bitmasks) with their cost and whether they are feasible and connected."""

    masks: np.ndarray
    costs: np.ndarray
    feasible: np.ndarray
    connected: np.ndarray

    def optimum(self) -> int | None:
        ok = self.feasible & self.connected
        return int(self.costs[ok].min()) if ok.any() else None


def _mask_connected(graph: LabeledGraph, mask: int) -> bool:
    if mask == 0:
        return True
    start = mask & -mask
    seen = start
    frontier = [start.bit_length() - 1]
    while frontier:
        v = frontier.pop()
        for u in graph.adj[v]:
            bit = 1 << u
            if mask & bit and not seen & bit:
                seen |= bit
                frontier.append(u)
    return seen == mask


def _enumerate(graph: LabeledGraph, costs: Sequence[int] | None, problem: str) -> EnumeratedSolutionSet:
    n = graph.n
    if n > BRUTE_LIMIT:
        raise OracleGuardError(f"brute force limited to {BRUTE_LIMIT} vertices")
    costs = [1] * n if costs is None else list(costs)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = [(masks >> v) & 1 for v in range(n)]
    total = sum(c * b for c, b in zip(costs, bits)) if n else np.zeros(1, dtype=np.int64)
    feasible = np.ones(1 << n, dtype=bool)
    if problem == "cvc":
        for u, v in graph.edges():
            feasible &= (bits[u] | bits[v]).astype(bool)
    else:
        for v in range(n):
            closed = sum(1 << u for u in graph.adj[v] | {v})
            feasible &= (masks & closed) != 0
    connected = np.zeros(1 << n, dtype=bool)
    for m in np.flatnonzero(feasible):
        connected[m] = _mask_connected(graph, int(m))
    return EnumeratedSolutionSet(masks, np.asarray(total), feasible, connected)


def brute_cvc(graph: LabeledGraph, costs: Sequence[int] | None = None) -> int | None:
    """Minimum cost of a connected vertex cover (None if there is none)."""
    return _enumerate(graph, costs, "cvc").optimum()


def brute_cds(graph: LabeledGraph, costs: Sequence[int] | None = None) -> int | None:
    """Minimum cost of a connected dominating set (None if there is none)."""
    if graph.n == 0:
        return None
    return _enumerate(graph, costs, "cds").optimum()


def count_consistent_cuts(graph: LabeledGraph, subset: Sequence[int], v_star: int) -> int:
    """Number of pairs (X_L, X_R) partitioning X with v* in X_L and no edge of G[X]
    between the sides; checked against 2^(cc(G[X]) - 1)."""
    xs = sorted(set(subset))
    if v_star not in xs:
        raise OracleGuardError("v* must lie in X")
    others = [x for x in xs if x != v_star]
    inside = set(xs)
    edges = [(u, v) for u in xs for v in graph.adj[u] if v in inside and u < v]
    count = 0
    for sides in itertools.product((0, 1), repeat=len(others)):
        side = dict(zip(others, sides))
        side[v_star] = 0
        if all(side[u] == side[v] for u, v in edges):
            count += 1
    expected = 2 ** (graph.induced_components(xs) - 1)
    if count != expected:
        raise AssertionError(f"{count} consistent cuts, expected {expected}")
    return count


# -- naive products --------------------------------------------------------

def _naive_pairs(a: np.ndarray, b: np.ndarray, combine: np.ndarray, ring: str) -> np.ndarray:
    k = a.ndim
    if k > NAIVE_K_LIMIT:
        raise OracleGuardError(f"naive product limited to k <= {NAIVE_K_LIMIT}")
    s = combine.shape[0]
    digits = np.array(list(itertools.product(range(s), repeat=k)), dtype=np.int64).reshape(-1, k)
    fa, fb = a.reshape(-1).astype(np.int64), b.reshape(-1).astype(np.int64)
    out = np.zeros(s ** k, dtype=object if ring == "int" else np.int64)
    place = s ** np.arange(k - 1, -1, -1)
    for x in np.flatnonzero(fa):
        merged = combine[digits[x][None, :], digits]        # every partner at once
        valid = (merged >= 0).all(axis=1)
        target = (merged[valid] * place).sum(axis=1)
        contrib = fb[valid] * fa[x]
        if ring == "int":
            for t, c in zip(target.tolist(), contrib.tolist()):
                out[t] += c
        else:
            np.add.at(out, target, contrib)
    if ring == "gf2":
        out &= 1
    return np.array(out.tolist(), dtype=np.int64).reshape(a.shape)


def naive_componentwise_cover(a: np.ndarray, b: np.ndarray, members: Sequence[int],
                              ring: str = "gf2") -> np.ndarray:
    """Sum over all pairs f1, f2 with f1(i) | f2(i) = f(i) in every coordinate.

    Position x on an axis stands for the set ``members[x]``.
    """
    pos = {m: x for x, m in enumerate(members)}
    combine = np.array([[pos.get(p | q, -1) for q in members] for p in members], dtype=np.int64)
    return _naive_pairs(a, b, combine, ring)


def naive_vee_product(a: np.ndarray, b: np.ndarray, join_table: Sequence[Sequence[int]],
                      ring: str = "gf2") -> np.ndarray:
    """Sum over all pairs y, z with y v z = x, joins taken coordinatewise."""
    return _naive_pairs(a, b, np.array(join_table, dtype=np.int64), ring)


# -- partial solutions -----------------------------------------------------

@dataclass
class _Sub:
    by_label: dict[int, set[int]]
    edges: set[tuple[int, int]]


def _subgraphs(expr: CliqueExpression) -> list[_Sub]:
    out: list[_Sub] = []
    for node in expr.nodes:
        if isinstance(node, Introduce):
            out.append(_Sub({node.label: {node.vertex}}, set()))
        elif isinstance(node, Union):
            a, b = out[node.left], out[node.right]
            by = {lab: set(vs) for lab, vs in a.by_label.items()}
            for lab, vs in b.by_label.items():
                by.setdefault(lab, set()).update(vs)
            out.append(_Sub(by, a.edges | b.edges))
        else:
            c = out[node.child]
            by = {lab: set(vs) for lab, vs in c.by_label.items()}
            edges = set(c.edges)
            if isinstance(node, Relabel) and node.src in by and node.src != node.dst:
                by.setdefault(node.dst, set()).update(by.pop(node.src))
            elif isinstance(node, Join):
                for u in by.get(node.a, ()):
                    for v in by.get(node.b, ()):
                        edges.add((min(u, v), max(u, v)))
            out.append(_Sub(by, edges))
    return out


def _live_labels(expr: CliqueExpression, subs: list[_Sub]) -> list[frozenset[int]]:
    """Labels without dead vertices, plus those whose dead node is still pending above t."""
    final = subs[expr.root].edges
    degree: dict[int, int] = {}
    for u, v in final:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    parent = expr.parents()
    out = []
    for t, sub in enumerate(subs):
        have: dict[int, int] = {}
        for u, v in sub.edges:
            have[u] = have.get(u, 0) + 1
            have[v] = have.get(v, 0) + 1
        dead = {v for vs in sub.by_label.values() for v in vs if have.get(v, 0) == degree.get(v, 0)}
        live = {lab for lab, vs in sub.by_label.items() if not vs & dead}
        p = parent[t]
        while p >= 0 and isinstance(expr.nodes[p], Dead):
            live.add(expr.nodes[p].label)
            p = parent[p]
        out.append(frozenset(live))
    return out


@dataclass
class TableReport:
    ok: bool
    nodes_checked: int = 0
    cells_checked: int = 0
    mismatch: dict | None = None
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "nodes_checked": self.nodes_checked,
                "cells_checked": self.cells_checked, "mismatch": self.mismatch}


def partial_solution_parities(problem: str, sub: _Sub, live: frozenset[int], costs: Sequence[int],
                              weights: Sequence[int], v_star: int) -> tuple[tuple[int, ...], np.ndarray]:
    """Parity array of the defined partial-solution family at one node, indexed
    (state per live label ascending..., cost, weight)."""
    verts = sorted(v for vs in sub.by_label.values() for v in vs)
    pos = {v: i for i, v in enumerate(verts)}
    roles_n = 3 if problem == "cvc" else 4
    # cvc roles: 0 out, 1 left, 2 right. cds roles: 0 free, 1 forbidden, 2 left, 3 right.
    grid = np.array(list(itertools.product(range(roles_n), repeat=len(verts))),
                    dtype=np.int8).reshape(-1, len(verts))
    left_role, right_role = (1, 2) if problem == "cvc" else (2, 3)
    in_x = (grid == left_role) | (grid == right_role)
    ok = np.ones(len(grid), dtype=bool)
    for u, v in sub.edges:
        a, b = grid[:, pos[u]], grid[:, pos[v]]
        ok &= ~((a == left_role) & (b == right_role)) & ~((a == right_role) & (b == left_role))
        if problem == "cvc":
            ok &= in_x[:, pos[u]] | in_x[:, pos[v]]
        else:
            ok &= ~(in_x[:, pos[u]] & (b == 1)) & ~(in_x[:, pos[v]] & (a == 1))
    if v_star in pos:
        ok &= grid[:, pos[v_star]] == left_role
    labels = tuple(sorted(live))
    if problem == "cds":
        nbrs: dict[int, set[int]] = {v: set() for v in verts}
        for u, v in sub.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        for lab, vs in sub.by_label.items():
            if lab in live:
                continue
            for v in vs:
                dominated = in_x[:, pos[v]].copy()
                for u in nbrs[v]:
                    dominated |= in_x[:, pos[u]]
                ok &= dominated
    states = []
    for lab in labels:
        cols = [pos[v] for v in sub.by_label[lab]]
        g = grid[:, cols]
        if problem == "cvc":
            has0 = (g == 0).any(axis=1)
            hasl = (g == 1).any(axis=1)
            hasr = (g == 2).any(axis=1)
            ok &= ~(has0 & hasl & hasr)
            code = np.select([has0 & hasl, has0 & hasr, hasl & hasr, has0, hasl, hasr],
                             [3, 4, 5, 0, 1, 2], default=-1)
        else:
            hasf = (g == 1).any(axis=1)
            hasl = (g == 2).any(axis=1)
            hasr = (g == 3).any(axis=1)
            count = hasf.astype(int) + hasl + hasr
            code = np.select([count >= 2, hasf, hasl, hasr], [4, 1, 2, 3], default=0)
        states.append(code)
    cost = (in_x * np.array([costs[v] for v in verts])).sum(axis=1)
    weight = (in_x * np.array([weights[v] for v in verts])).sum(axis=1)
    nstates = 6 if problem == "cvc" else 5
    shape = (nstates,) * len(labels) + (sum(costs[v] for v in verts) + 1,
                                        sum(weights[v] for v in verts) + 1)
    counts = np.zeros(shape, dtype=np.int64)
    idx = tuple(s[ok] for s in states) + (cost[ok], weight[ok])
    np.add.at(counts, idx, 1)
    return labels, counts & 1


def verify_dp_tables(problem: str, aug: CliqueExpression, costs: Sequence[int],
                     weights: Sequence[int], v_star: int, space=None) -> TableReport:
    """Compare the solver's table at every node with the parities of the partial
    solutions enumerated from their definition. ``space`` substitutes the
    solver's state space, for fault injection."""
    if problem not in ("cvc", "cds"):
        raise ValueError(f"unknown problem {problem!r}")
    if aug.n > TABLE_LIMIT:
        raise OracleGuardError(f"table verification limited to {TABLE_LIMIT} vertices")
    if problem == "cvc":
        from . import cvc_solver as solver
    else:
        from . import cds_solver as solver
    from .dp_engine import run_dp
    tables = run_dp(space or solver.SPACE, aug, costs, weights, v_star, keep=True)
    subs = _subgraphs(aug)
    lives = _live_labels(aug, subs)
    report = TableReport(ok=True)
    for t, (sub, live) in enumerate(zip(subs, lives)):
        labels, expect = partial_solution_parities(problem, sub, live, costs, weights, v_star)
        got = tables[t]
        report.nodes_checked += 1
        if tuple(got.labels) != labels or got.values.shape != expect.shape:
            report.ok = False
            report.mismatch = {"node": t, "reason": "shape",
                               "expected_labels": list(labels), "got_labels": list(got.labels),
                               "expected_shape": list(expect.shape),
                               "got_shape": list(got.values.shape)}
            return report
        diff = np.argwhere(got.values.astype(np.int64) != expect)
        report.cells_checked += expect.size
        if len(diff):
            cell = tuple(int(x) for x in diff[0])
            report.ok = False
            report.mismatch = {"node": t, "node_type": type(aug.nodes[t]).__name__,
                               "cell": list(cell), "expected": int(expect[cell]),
                               "got": int(got.values[cell])}
            return report
    return report
