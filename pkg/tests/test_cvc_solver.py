import itertools
import random

import numpy as np
import pytest

from cwsolve import dp_engine
from cwsolve.clique_expr import (Introduce, Join, Relabel, Union, annotate, evaluate,
                                 expression_from_nodes, parse_expression, prepare)
from cwsolve.cvc_solver import (LEFT, RIGHT, SPACE, STATE_MASKS, ZERO, branch_vertices, dp_dead,
                                dp_introduce, dp_join, dp_relabel, dp_union, feas_cvc, merge_cvc,
                                run_tables, solve_cvc)
from cwsolve.dp_engine import DPError, DPTable, MemoryGuardError
from cwsolve.graph_core import GraphError
from cwsolve.oracle import brute_cvc, naive_componentwise_cover, verify_dp_tables

from conftest import random_instance

CODE = {m: i for i, m in enumerate(STATE_MASKS)}
S0, SL, SR = CODE[ZERO], CODE[LEFT], CODE[RIGHT]
S0L, S0R, SLR = CODE[ZERO | LEFT], CODE[ZERO | RIGHT], CODE[LEFT | RIGHT]


def expr_of(text):
    return parse_expression(text)


EDGE = expression_from_nodes([Introduce(1, 0), Introduce(2, 1), Union(0, 1), Join(1, 2, 2)], 2)
TRIANGLE = expression_from_nodes([
    Introduce(1, 0), Introduce(2, 1), Union(0, 1), Join(1, 2, 2), Relabel(2, 1, 3),
    Introduce(2, 2), Union(4, 5), Join(1, 2, 6)], 2)
STAR = expression_from_nodes([
    Introduce(1, 1), Introduce(1, 2), Union(0, 1), Introduce(1, 3), Union(2, 3),
    Introduce(2, 0), Union(4, 5), Join(1, 2, 6)], 2)


def test_feas_table_entries():
    assert feas_cvc(S0, SL) == 1
    assert feas_cvc(S0L, S0R) == 0
    for s in range(6):
        assert feas_cvc(s, s) == int(s in (SL, SR))


def test_feas_matches_formula():
    for a, b in itertools.product(range(6), repeat=2):
        x, y = STATE_MASKS[a], STATE_MASKS[b]
        ok = (not (x & ZERO and y & ZERO)) and not (x & LEFT and y & RIGHT) \
            and not (x & RIGHT and y & LEFT)
        assert feas_cvc(a, b) == int(ok)


def test_merge_is_union_without_omega():
    for a, b in itertools.product(range(6), repeat=2):
        u = STATE_MASKS[a] | STATE_MASKS[b]
        assert merge_cvc(a, b) == (CODE[u] if u in CODE else -1)


def test_introduce_cells():
    t = dp_introduce(1, 5, 0, 1, 3)
    nz = {tuple(int(i) for i in x) for x in np.argwhere(t.values)}
    assert nz == {(S0, 0, 0), (SL, 1, 3), (SR, 1, 3)}
    t = dp_introduce(1, 5, 5, 1, 3)
    assert {tuple(int(i) for i in x) for x in np.argwhere(t.values)} == {(SL, 1, 3)}


def test_relabel_preimages():
    # enumerate union preimages for {1L,1R} and {0}
    pre = [(a, b) for a, b in itertools.product(range(6), repeat=2) if merge_cvc(a, b) == SLR]
    assert len(pre) == 7
    pre0 = [(a, b) for a, b in itertools.product(range(6), repeat=2) if merge_cvc(a, b) == S0]
    assert pre0 == [(S0, S0)]
    rng = np.random.default_rng(1)
    vals = rng.integers(0, 2, (6, 6, 2, 3), dtype=np.uint8)
    out = dp_relabel(DPTable((1, 2), vals), 1, 2)
    assert out.labels == (2,)
    ref = np.zeros((6, 2, 3), dtype=np.int64)
    for a, b in itertools.product(range(6), repeat=2):
        if merge_cvc(a, b) >= 0:
            ref[merge_cvc(a, b)] += vals[a, b]
    assert np.array_equal(out.values, ref & 1)


def test_relabel_dead_labels_copies():
    vals = np.random.default_rng(2).integers(0, 2, (6, 2, 2), dtype=np.uint8)
    t = DPTable((3,), vals)
    out = dp_relabel(t, 1, 2)
    assert np.array_equal(out.values, vals) and out.labels == (3,)
    with pytest.raises(DPError):
        dp_relabel(t, 3, 1)


def test_join_filters():
    vals = np.ones((6, 6, 1, 1), dtype=np.uint8)
    out = dp_join(DPTable((1, 2), vals), 1, 2)
    assert out.values[S0, S0, 0, 0] == 0
    assert out.values[SL, SL, 0, 0] == 1
    assert out.values.sum() <= vals.sum()
    with pytest.raises(DPError):
        dp_join(DPTable((1,), np.ones((6, 1, 1), np.uint8)), 1, 2)


def test_dead_sums_states():
    vals = np.zeros((6, 1, 1), dtype=np.uint8)
    vals[SL] = 1
    assert dp_dead(DPTable((1,), vals), 1).values[0, 0] == 1
    vals[SR] = 1
    assert dp_dead(DPTable((1,), vals), 1).values[0, 0] == 0


def test_union_single_shared_label():
    a = np.zeros((6, 2, 3), dtype=np.uint8)
    b = np.zeros((6, 1, 1), dtype=np.uint8)
    a[SL, 1, 2] = 1
    b[S0, 0, 0] = 1
    out = dp_union(DPTable((1,), a), DPTable((1,), b))
    nz = {tuple(int(i) for i in x) for x in np.argwhere(out.values)}
    assert nz == {(S0L, 1, 2)}


def test_union_disjoint_labels_is_outer_product():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 2, (6, 2, 2), dtype=np.uint8)
    b = rng.integers(0, 2, (6, 2, 3), dtype=np.uint8)
    out = dp_union(DPTable((1,), a), DPTable((2,), b)).values
    for x, y in itertools.product(range(6), repeat=2):
        ref = np.zeros((3, 4), dtype=np.int64)
        for c1, w1, c2, w2 in itertools.product(range(2), range(2), range(2), range(3)):
            ref[c1 + c2, w1 + w2] += int(a[x, c1, w1]) * int(b[y, c2, w2])
        assert np.array_equal(out[x, y], ref & 1)


@pytest.mark.parametrize("seed", range(6))
def test_union_two_shared_labels_matches_naive(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, (6, 6, 2, 2), dtype=np.uint8)
    b = rng.integers(0, 2, (6, 6, 3, 2), dtype=np.uint8)
    out = dp_union(DPTable((1, 2), a), DPTable((1, 2), b)).values
    ref = np.zeros((6, 6, 4, 3), dtype=np.int64)
    for c1, w1, c2, w2 in itertools.product(range(2), range(2), range(3), range(2)):
        ref[:, :, c1 + c2, w1 + w2] += naive_componentwise_cover(
            a[:, :, c1, w1], b[:, :, c2, w2], STATE_MASKS, "int")
    assert np.array_equal(out, ref & 1)


def test_union_cap_truncates_costs():
    rng = np.random.default_rng(4)
    a = rng.integers(0, 2, (6, 4, 2), dtype=np.uint8)
    b = rng.integers(0, 2, (6, 4, 2), dtype=np.uint8)
    full = dp_union(DPTable((1,), a), DPTable((1,), b)).values
    capped = dp_engine.dp_union(SPACE, DPTable((1,), a), DPTable((1,), b), cap=3).values
    assert np.array_equal(capped, full[:, :4])


def test_memory_guard():
    a = DPTable((1, 2, 3), np.zeros((6, 6, 6, 2, 2), np.uint8))
    with pytest.raises(MemoryGuardError):
        dp_engine.dp_union(SPACE, a, a, mem_cap=100)


@pytest.mark.parametrize("expr, budget, answer", [
    (EDGE, 1, True), (EDGE, 0, False), (TRIANGLE, 1, False), (TRIANGLE, 2, True),
    (STAR, 1, True), (STAR, 0, False)])
def test_small_decisions(expr, budget, answer):
    assert solve_cvc(expr, budget=budget).decision is answer


def test_edgeless_graph_is_trivially_yes():
    expr = expression_from_nodes([Introduce(1, 0), Introduce(1, 1), Union(0, 1)], 1)
    res = solve_cvc(expr, budget=0)
    assert res.decision and res.trials == 0


def test_disconnected_graph_rejected():
    nodes = [Introduce(1, 0), Introduce(2, 1), Union(0, 1), Join(1, 2, 2),
             Introduce(3, 2), Introduce(4, 3), Union(4, 5), Join(3, 4, 6), Union(3, 7)]
    with pytest.raises(GraphError, match="input graph must be connected"):
        solve_cvc(expression_from_nodes(nodes, 4), budget=5)


def test_weighted_costs():
    # path 0-1-2 with an expensive middle vertex; {1} is still the cheapest cover
    expr = parse_expression("1: intro 1 0\n2: intro 1 2\n3: union 1 2\n4: intro 2 1\n"
                            "5: union 3 4\n6: join 1 2 5\nroot 6\n")
    assert solve_cvc(expr, costs=[1, 5, 1], budget=5).decision
    assert not solve_cvc(expr, costs=[1, 5, 1], budget=4).decision


def test_branch_vertices_smallest_edge():
    assert branch_vertices(evaluate(TRIANGLE)) == [0, 1]


def test_result_json_deterministic():
    a = solve_cvc(TRIANGLE, budget=2, seed=7).to_json()
    b = solve_cvc(TRIANGLE, budget=2, seed=7).to_json()
    assert a == b and '"decision": "yes"' in a


def test_root_signature_empty():
    aug = prepare(TRIANGLE)
    tabs = run_tables(aug, [1, 1, 1], [1, 2, 3], 0)
    assert tabs[aug.root].labels == ()
    assert annotate(aug)[aug.root].live == frozenset()


@pytest.mark.parametrize("seed", range(12))
def test_tables_match_definition(seed):
    expr, g = random_instance(seed, n_max=7, k_max=3)
    aug = prepare(expr)
    rng = random.Random(seed)
    costs = [rng.randint(1, 2) for _ in range(g.n)]
    weights = [rng.randint(1, 2 * g.n) for _ in range(g.n)]
    v_star = branch_vertices(g)[seed % 2]
    report = verify_dp_tables("cvc", aug, costs, weights, v_star)
    assert report.ok, report.mismatch


@pytest.mark.parametrize("seed", range(25))
def test_decisions_match_brute_force(seed):
    expr, g = random_instance(1000 + seed, n_max=9, k_max=3)
    opt = brute_cvc(g)
    for b in range(g.n + 1):
        assert solve_cvc(expr, budget=b, seed=seed).decision == (b >= opt)
