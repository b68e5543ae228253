"""Connected dominating set by cut and count with inclusion-exclusion states.

Each vertex is in X_L, in X_R, in F (allowed but forbidden to touch X), or
unconstrained. Domination is never tracked: at a dead node the four
possibilities are summed, and every partial solution leaving a vertex
undominated is counted an even number of times. A label records the set of
roles {F, L, R} its vertices use, with all sets of size two or more collapsed
into one state. With that collapse the label states form a lattice, so a
union is a join product over it.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import dp_engine
from .clique_expr import CliqueExpression
from .convolution import Lattice
from .dp_engine import DPTable, SolveResult, StateSpace
from .graph_core import LabeledGraph

EMPTY, F, L, R, MANY = range(5)
STATE_NAMES = ("{}", "{F}", "{L}", "{R}", "2+")


def merge_cds(s1: int, s2: int) -> int:
    if s1 == EMPTY:
        return s2
    if s2 == EMPTY or s1 == s2:
        return s1
    return MANY


def feas_cds(s1: int, s2: int) -> int:
    """0 iff the join puts an F vertex next to X or an X_L vertex next to X_R."""
    clash = s1 != EMPTY and s2 != EMPTY and ((s1 == MANY and s2 == MANY) or s1 != s2)
    return int(not clash)


# The states ordered by inclusion of the role sets, 2+ read as {F, L, R}.
CDS_LATTICE = Lattice(STATE_NAMES, tuple(tuple(merge_cds(a, b) for b in range(5)) for a in range(5)))


def _space() -> StateSpace:
    r = range(5)
    return StateSpace(
        name="cds",
        state_names=STATE_NAMES,
        merge=np.array([[merge_cds(a, b) for b in r] for a in r]),
        feas=np.array([[feas_cds(a, b) for b in r] for a in r], dtype=np.uint8),
        union_zeta=CDS_LATTICE.zeta_matrix,
        union_mobius=CDS_LATTICE.mobius_matrix,
        free_states=(EMPTY, F),
        taken_states=(L, R),
        anchor_state=L,
    )


SPACE = _space()


def dp_introduce(label: int, vertex: int, v_star: int, cost: int, weight: int) -> DPTable:
    return dp_engine.dp_introduce(SPACE, label, vertex, v_star, cost, weight)


def dp_relabel(table: DPTable, i: int, j: int) -> DPTable:
    return dp_engine.dp_relabel(SPACE, table, i, j)


def dp_join(table: DPTable, i: int, j: int) -> DPTable:
    return dp_engine.dp_join(SPACE, table, i, j)


def dp_dead(table: DPTable, label: int) -> DPTable:
    return dp_engine.dp_dead(SPACE, table, label)


def dp_union(left: DPTable, right: DPTable) -> DPTable:
    return dp_engine.dp_union(SPACE, left, right)


def run_tables(aug: CliqueExpression, costs: Sequence[int], weights: Sequence[int], v_star: int,
               keep: bool = True, **kw) -> list[DPTable | None]:
    return dp_engine.run_dp(SPACE, aug, costs, weights, v_star, keep=keep, **kw)


def branch_vertices(graph: LabeledGraph) -> list[int]:
    """Closed neighborhood of a minimum-degree vertex (smallest id on ties)."""
    v = min(range(graph.n), key=lambda x: (graph.degree(x), x))
    return sorted(graph.adj[v] | {v})


def degenerate_rule(graph: LabeledGraph, costs: tuple[int, ...], budget: int) -> bool | None:
    if graph.n == 1:
        return budget >= costs[0]
    return None


def solve_cds(expr: CliqueExpression, costs: Sequence[int] | None = None, budget: int = 0,
              seed: int = 0, repeats: int = dp_engine.DEFAULT_REPEATS,
              mem_cap: int = dp_engine.DEFAULT_MEM_CAP) -> SolveResult:
    """Is there a connected dominating set of cost at most ``budget``? One-sided error
    as for :func:`cwsolve.cvc_solver.solve_cvc`."""
    return dp_engine.decide(SPACE, expr, costs, budget, seed, repeats,
                            branch_vertices, degenerate_rule, mem_cap)
