"""Table machinery shared by the two cut-and-count solvers.

A table at node t is a GF(2) array of shape (S,)*|live labels| + (C, W):
one axis per live label (ascending label order, position on the axis is the
state code) followed by the cost and weight budgets. The problem-specific
parts, i.e. state merging, join feasibility, introduce cells and the
transform used for shared labels at unions, live in a :class:`StateSpace`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .clique_expr import (CliqueExpression, Dead, Introduce, Join, Relabel, Union,
                          evaluate, prepare)
from .convolution import coordinate_transform
from .graph_core import (GraphError, LabeledGraph, derive_seed, is_connected, sample_weights,
                         validate_budget, validate_costs)

DEFAULT_MEM_CAP = 200_000_000
DEFAULT_REPEATS = 20


class DPError(RuntimeError):
    pass


class MemoryGuardError(DPError):
    pass


@dataclass(frozen=True, eq=False)
class StateSpace:
    name: str
    state_names: tuple[str, ...]
    merge: np.ndarray          # merge[s1, s2] = merged state, or -1 if excluded
    feas: np.ndarray           # feas[s1, s2] in {0, 1}
    union_zeta: np.ndarray     # per-coordinate transforms for shared labels at unions
    union_mobius: np.ndarray
    free_states: tuple[int, ...]    # states of a vertex left out of the solution
    taken_states: tuple[int, ...]   # states of a vertex in the solution
    anchor_state: int               # the only allowed state of v*

    @property
    def size(self) -> int:
        return len(self.state_names)

    @property
    def merge_tensor(self) -> np.ndarray:
        s = self.size
        u = np.zeros((s, s, s), dtype=np.float32)
        for a in range(s):
            for b in range(s):
                if self.merge[a, b] >= 0:
                    u[a, b, self.merge[a, b]] = 1
        return u


@dataclass
class DPTable:
    labels: tuple[int, ...]
    values: np.ndarray

    def cell(self, states: dict[int, int], cost: int, weight: int) -> int:
        idx = tuple(states[lab] for lab in self.labels) + (cost, weight)
        return int(self.values[idx])

    def code(self, states: dict[int, int], radix: int) -> int:
        """Little-endian mixed-radix code of a signature over the ascending live labels."""
        return sum(states[lab] * radix ** i for i, lab in enumerate(self.labels))


def _guard(cells: int, mem_cap: int) -> None:
    if cells > mem_cap:
        raise MemoryGuardError(f"table of {cells} cells exceeds the memory cap {mem_cap}")


def dp_introduce(space: StateSpace, label: int, vertex: int, v_star: int,
                 cost: int, weight: int, cap: int | None = None) -> DPTable:
    c_len = cost + 1 if cap is None else min(cost, cap) + 1
    vals = np.zeros((space.size, c_len, weight + 1), dtype=np.uint8)
    if vertex == v_star:
        if cost < c_len:
            vals[space.anchor_state, cost, weight] = 1
    else:
        for s in space.free_states:
            vals[s, 0, 0] = 1
        if cost < c_len:
            for s in space.taken_states:
                vals[s, cost, weight] = 1
    return DPTable((label,), vals)


def dp_relabel(space: StateSpace, table: DPTable, i: int, j: int) -> DPTable:
    live_i, live_j = i in table.labels, j in table.labels
    if not live_i and not live_j:
        return DPTable(table.labels, table.values.copy())
    if live_i != live_j:
        raise DPError(f"relabel {i}->{j} mixes a live and a dead label")
    pi, pj = table.labels.index(i), table.labels.index(j)
    arr = np.moveaxis(table.values, (pi, pj), (0, 1))
    rest = arr.shape[2:]
    s = space.size
    flat = arr.reshape(s * s, -1).astype(np.float32)
    out = space.merge_tensor.reshape(s * s, s).T @ flat
    out = (np.remainder(out, 2.0)).astype(np.uint8).reshape((s,) + rest)
    labels = tuple(x for x in table.labels if x != i)
    return DPTable(labels, np.moveaxis(out, 0, labels.index(j)))


def dp_join(space: StateSpace, table: DPTable, a: int, b: int) -> DPTable:
    if a not in table.labels or b not in table.labels:
        raise DPError(f"join {a},{b} on a label that is not live")
    pa, pb = table.labels.index(a), table.labels.index(b)
    mat = space.feas if pa < pb else space.feas.T
    shape = [1] * table.values.ndim
    shape[min(pa, pb)] = shape[max(pa, pb)] = space.size
    return DPTable(table.labels, table.values * mat.astype(np.uint8).reshape(shape))


def dp_dead(space: StateSpace, table: DPTable, label: int) -> DPTable:
    if label not in table.labels:
        raise DPError(f"dead node for label {label} that is not live")
    pos = table.labels.index(label)
    summed = table.values.sum(axis=pos, dtype=np.int64) & 1
    return DPTable(tuple(x for x in table.labels if x != label), summed.astype(np.uint8))


def dp_union(space: StateSpace, left: DPTable, right: DPTable, cap: int | None = None,
             mem_cap: int = DEFAULT_MEM_CAP) -> DPTable:
    shared = sorted(set(left.labels) & set(right.labels))
    only_l = [x for x in left.labels if x not in shared]
    only_r = [x for x in right.labels if x not in shared]
    s = space.size
    c1, w1 = left.values.shape[-2:]
    c2, w2 = right.values.shape[-2:]
    c_out = c1 + c2 - 1 if cap is None else min(c1 + c2 - 1, cap + 1)
    w_out = w1 + w2 - 1
    _guard(s ** (len(shared) + len(only_l) + len(only_r)) * c_out * w_out, mem_cap)

    def arrange(tab: DPTable, own: list[int], front: bool) -> np.ndarray:
        order = [tab.labels.index(x) for x in own] + [tab.labels.index(x) for x in shared]
        arr = np.transpose(tab.values, order + [tab.values.ndim - 2, tab.values.ndim - 1])
        nown = len(own)
        arr = coordinate_transform(arr, space.union_zeta, range(nown, nown + len(shared)))
        pad = (1,) * (len(only_r) if front else len(only_l))
        own_shape, tail = arr.shape[:nown], arr.shape[nown:]
        return arr.reshape(own_shape + pad + tail if front else pad + own_shape + tail)

    a = arrange(left, only_l, True)
    b = arrange(right, only_r, False)
    if (c1 == 1 and w1 == 1) or (c2 == 1 and w2 == 1) or min(c1 * w1, c2 * w2) <= 4:
        prod = _direct_budget_product(a, b)
    else:
        prod = fftconvolve(a.astype(np.float64), b.astype(np.float64), axes=(-2, -1))
        prod = np.rint(prod).astype(np.int64) & 1
    prod = prod[..., :c_out, :].astype(np.uint8)
    nfree = len(only_l) + len(only_r)
    prod = coordinate_transform(prod, space.union_mobius, range(nfree, nfree + len(shared)))
    labels = only_l + only_r + shared
    final = tuple(sorted(labels))
    perm = [labels.index(x) for x in final] + [len(labels), len(labels) + 1]
    return DPTable(final, np.ascontiguousarray(np.transpose(prod, perm)))


def _direct_budget_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Budget convolution by shifting the smaller operand's support; exact mod 2."""
    c1, w1 = a.shape[-2:]
    c2, w2 = b.shape[-2:]
    if c1 * w1 > c2 * w2:
        a, b, c1, w1, c2, w2 = b, a, c2, w2, c1, w1
    shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (c1 + c2 - 1, w1 + w2 - 1)
    out = np.zeros(shape, dtype=np.uint8)
    for c in range(c1):
        for w in range(w1):
            piece = a[..., c:c + 1, w:w + 1]
            if piece.any():
                out[..., c:c + c2, w:w + w2] ^= piece & b
    return out


def run_dp(space: StateSpace, aug: CliqueExpression, costs: Sequence[int], weights: Sequence[int],
           v_star: int, cap: int | None = None, mem_cap: int = DEFAULT_MEM_CAP,
           keep: bool = False,
           hook: Callable[[int, DPTable], DPTable] | None = None) -> list[DPTable | None]:
    """Evaluate every node bottom-up. Returns the per-node tables (only the root's
    unless ``keep``). ``hook`` may replace a table right after it is computed."""
    tables: list[DPTable | None] = [None] * len(aug.nodes)
    for t, node in enumerate(aug.nodes):
        if isinstance(node, Introduce):
            tab = dp_introduce(space, node.label, node.vertex, v_star,
                               costs[node.vertex], weights[node.vertex], cap)
        elif isinstance(node, Union):
            tab = dp_union(space, tables[node.left], tables[node.right], cap, mem_cap)
        elif isinstance(node, Relabel):
            tab = dp_relabel(space, tables[node.child], node.src, node.dst)
        elif isinstance(node, Join):
            tab = dp_join(space, tables[node.child], node.a, node.b)
        elif isinstance(node, Dead):
            tab = dp_dead(space, tables[node.child], node.label)
        else:
            raise DPError(f"unknown node {node!r}")
        if hook is not None:
            tab = hook(t, tab)
        tables[t] = tab
        if not keep:
            for c in _children(node):
                tables[c] = None
    return tables


def _children(node) -> tuple[int, ...]:
    if isinstance(node, Introduce):
        return ()
    if isinstance(node, Union):
        return (node.left, node.right)
    return (node.child,)


# -- decision procedure ----------------------------------------------------

@dataclass
class SolveResult:
    problem: str
    decision: bool
    trials: int
    budget: int
    seed: int
    best_cost_found: int | None = None
    note: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"problem": self.problem, "decision": "yes" if self.decision else "no",
               "budget": self.budget, "trials": self.trials, "seed": self.seed}
        if self.best_cost_found is not None:
            out["best_cost_found"] = self.best_cost_found
        if self.note:
            out["note"] = self.note
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@lru_cache(maxsize=256)
def _prepared(expr: CliqueExpression) -> tuple[CliqueExpression, LabeledGraph]:
    aug = prepare(expr)
    return aug, evaluate(aug)


@lru_cache(maxsize=8192)
def _root_costs(space: StateSpace, aug: CliqueExpression, costs: tuple[int, ...],
                weights: tuple[int, ...], v_star: int, cap: int, mem_cap: int) -> tuple[int, ...]:
    root = run_dp(space, aug, costs, weights, v_star, cap, mem_cap)[aug.root]
    if root.labels:
        raise DPError(f"root still has live labels {root.labels}")
    return tuple(int(c) for c in np.flatnonzero(root.values.any(axis=1)))


def decide(space: StateSpace, expr: CliqueExpression, costs: Sequence[int] | None, budget: int,
           seed: int, repeats: int, branches: Callable[[LabeledGraph], list[int]],
           degenerate: Callable[[LabeledGraph, tuple[int, ...], int], bool | None],
           mem_cap: int = DEFAULT_MEM_CAP, soft_cells: int = 4_000_000,
           start: int = 0) -> SolveResult:
    """Run ``repeats`` trials; each samples weights and tries every v* from ``branches``.

    A trial answers yes when some root cell with cost at most ``budget`` is odd.
    Trials are numbered from ``start``, so a range of trials can be run on its own.
    """
    budget = validate_budget(budget)
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    aug, graph = _prepared(expr)
    cost_t = validate_costs(graph, costs)
    quick = degenerate(graph, cost_t, budget)
    if quick is not None:
        return SolveResult(space.name, quick, 0, budget, seed,
                           note="degenerate input decided directly")
    if not is_connected(graph):
        raise GraphError("input graph must be connected")
    total_c = sum(cost_t)
    # Keeping the whole cost axis lets different budgets share one run when it is cheap.
    full = space.size ** aug.k * (total_c + 1) * (4 * graph.n ** 2 + 1) <= soft_cells
    cap = total_c if full else min(budget, total_c)
    best = None
    for trial in range(start, start + repeats):
        weights = sample_weights(graph, derive_seed(seed, trial))
        for v_star in branches(graph):
            found = _root_costs(space, aug, cost_t, weights, v_star, cap, mem_cap)
            within = [c for c in found if c <= budget]
            if within:
                best = within[0] if best is None else min(best, within[0])
        if best is not None:
            return SolveResult(space.name, True, trial + 1, budget, seed, best)
    return SolveResult(space.name, False, repeats, budget, seed)
