"""Connected vertex cover by cut and count over augmented nice expressions.

A vertex outside the cover has part 0, a cover vertex sits on the left (1_L)
or right (1_R) side of a consistent cut. A label's state is the set of parts
its vertices use; the empty set never occurs and the full set {0, 1_L, 1_R}
can never be completed into a solution, so six states remain.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import dp_engine
from .clique_expr import CliqueExpression
from .convolution import SetFamily, family_transform_matrices
from .dp_engine import DPTable, SolveResult, StateSpace
from .graph_core import LabeledGraph

ZERO, LEFT, RIGHT = 1, 2, 4
# State codes 0..5 in this order; each state is a bitmask over {0, 1_L, 1_R}.
STATE_MASKS = (ZERO, LEFT, RIGHT, ZERO | LEFT, ZERO | RIGHT, LEFT | RIGHT)
STATE_NAMES = ("{0}", "{1L}", "{1R}", "{0,1L}", "{0,1R}", "{1L,1R}")
STATES_FAMILY = SetFamily.from_sets(3, STATE_MASKS)


def feas_cvc(s1: int, s2: int) -> int:
    """1 iff a join between labels in states s1 and s2 keeps the partial solution valid."""
    a, b = STATE_MASKS[s1], STATE_MASKS[s2]
    uncovered = a & ZERO and b & ZERO
    crossing = (a & LEFT and b & RIGHT) or (a & RIGHT and b & LEFT)
    return int(not uncovered and not crossing)


def merge_cvc(s1: int, s2: int) -> int:
    """State of the merged label, or -1 when every part occurs."""
    m = STATE_MASKS[s1] | STATE_MASKS[s2]
    return STATE_MASKS.index(m) if m in STATE_MASKS else -1


def _space() -> StateSpace:
    zeta_f, mob_f = family_transform_matrices(STATES_FAMILY)
    pos = [STATES_FAMILY.index(m) for m in STATE_MASKS]
    zeta = zeta_f[np.ix_(pos, pos)]
    mob = mob_f[np.ix_(pos, pos)]
    r = range(len(STATE_MASKS))
    return StateSpace(
        name="cvc",
        state_names=STATE_NAMES,
        merge=np.array([[merge_cvc(a, b) for b in r] for a in r]),
        feas=np.array([[feas_cvc(a, b) for b in r] for a in r], dtype=np.uint8),
        union_zeta=zeta,
        union_mobius=mob,
        free_states=(0,),
        taken_states=(1, 2),
        anchor_state=1,
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
    """Both endpoints of the lexicographically smallest edge."""
    return list(min(graph.edges()))


def degenerate_rule(graph: LabeledGraph, costs: tuple[int, ...], budget: int) -> bool | None:
    if graph.m == 0:
        return True
    return None


def solve_cvc(expr: CliqueExpression, costs: Sequence[int] | None = None, budget: int = 0,
              seed: int = 0, repeats: int = dp_engine.DEFAULT_REPEATS,
              mem_cap: int = dp_engine.DEFAULT_MEM_CAP) -> SolveResult:
    """Is there a connected vertex cover of cost at most ``budget``? A yes is always
    correct; a no is wrong with probability at most 2^-repeats."""
    return dp_engine.decide(SPACE, expr, costs, budget, seed, repeats,
                            branch_vertices, degenerate_rule, mem_cap)
