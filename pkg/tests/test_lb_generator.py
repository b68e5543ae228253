import itertools
import random

import pytest

from cwsolve.clique_expr import evaluate, is_irredundant, width
from cwsolve.lb_generator import (CDS_STATES, CVC_STATES, GadgetParams, GeneratorError,
                                  SatInstance, build_cds_path_gadget, build_cvc_path_gadget,
                                  build_instance, check_canonical, check_cds_packing,
                                  check_transition, generate, parse_dimacs, path_gadget,
                                  satisfying_sequences, verify_gadget_transitions)

from conftest import FIXTURES


def random_cnf(n, m, seed):
    rng = random.Random(seed)
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), rng.randint(1, min(3, n)))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return SatInstance(n, tuple(clauses))


# -- gadgets ---------------------------------------------------------------

def test_cvc_gadget_shape():
    g = build_cvc_path_gadget()
    assert len(g.vertices) == len(set(g.vertices)) == 38
    clique_edges = {frozenset(e) for e in g.edges if set(e) <= set(g.clique)}
    assert len(g.clique) == 6 and len(clique_edges) == 15


def test_cds_gadget_shape():
    g = build_cds_path_gadget()
    assert len(g.vertices) == len(set(g.vertices)) == 79
    # every clique edge is subdivided, none is kept
    assert not any(set(e) <= set(g.clique) for e in g.edges)
    sub_clique = [(x, y) for _, x, y in g.subdivided if {x, y} <= set(g.clique)]
    assert len(sub_clique) == 10
    for w, x, y in g.subdivided:
        touching = [e for e in g.edges if w in e]
        assert sorted(v for e in touching for v in e if v != w) == sorted([x, y])


def test_unknown_gadget():
    with pytest.raises(GeneratorError):
        path_gadget("tsp")


@pytest.mark.parametrize("problem, size, states", [("cvc", 21, CVC_STATES), ("cds", 14, CDS_STATES)])
def test_canonical_sets(problem, size, states):
    g = path_gadget(problem)
    for ell in range(1, len(states) + 1):
        c = check_canonical(g, ell)
        assert c.ok and c.size == size and c.state == states[ell - 1]


def test_cds_packing_disjoint():
    assert check_cds_packing()


@pytest.mark.parametrize("problem", ["cvc", "cds"])
def test_transitions_diagonal_and_decreasing(problem):
    report = verify_gadget_transitions(problem)
    q = len(path_gadget(problem).states)
    assert len(report["transitions"]) == q * q
    assert report["canonical_ok"] and report["diagonal_ok"] and report["decreasing_violated"]


def test_specific_violations():
    cvc, cds = path_gadget("cvc"), path_gadget("cds")
    assert [k for k, _ in check_transition(cvc, 3, 1).violations] == ["uncovered edge"] * 2
    assert {k for k, _ in check_transition(cvc, 4, 3).violations} == {"not root-connected"}
    assert check_transition(cds, 4, 3).violations == [
        ("not root-connected", "u2_1^1"), ("not root-connected", "u1_1^2")]
    assert check_transition(cds, 3, 1).violations == [("undominated", "u2_2^1")]


# -- parameters ------------------------------------------------------------

def test_parse_dimacs():
    sat = parse_dimacs("c hi\np cnf 3 2\n1 -2 0\n3\n 2 0\n")
    assert sat.n == 3 and sat.clauses == ((1, -2), (3, 2))
    assert parse_dimacs((FIXTURES / "one.cnf").read_text()).clauses == ((1,),)
    with pytest.raises(GeneratorError):
        parse_dimacs("1 2 0\n")
    with pytest.raises(GeneratorError):
        parse_dimacs("p cnf 2 1\n1 5 0\n")
    with pytest.raises(GeneratorError):
        parse_dimacs("p dnf 2 1\n1 0\n")


@pytest.mark.parametrize("problem", ["cvc", "cds"])
@pytest.mark.parametrize("beta", [1, 2, 3, 4])
def test_kappa_injective(problem, beta):
    params = GadgetParams.make(problem, SatInstance(beta, ((1,),)), beta)
    seen = {params.kappa(tau) for tau in range(2 ** beta)}
    assert len(seen) == 2 ** beta
    assert all(1 <= d <= params.base for h in seen for d in h)


@pytest.mark.parametrize("problem, base, slack, per", [("cvc", 6, 5, 21), ("cds", 5, 4, 14)])
@pytest.mark.parametrize("n, m, beta", [(1, 1, 1), (3, 2, 1), (3, 2, 2), (5, 3, 3)])
def test_budget_and_columns(problem, base, slack, per, n, m, beta):
    sat = random_cnf(n, m, n + m + beta)
    params = GadgetParams.make(problem, sat, beta)
    t = -(-n // beta)
    p = min(q for q in range(1, 10) if base ** q >= 2 ** beta)
    assert (params.t, params.p) == (t, p)
    cols = m * (slack * t * p + 1)
    assert params.columns == cols
    assert params.budget == (per * t * p + (base ** p + 2) * t + 1) * cols + 1


def test_beta_must_be_positive():
    with pytest.raises(GeneratorError):
        GadgetParams.make("cvc", SatInstance(1, ((1,),)), 0)


def test_satisfying_sequences():
    sat = SatInstance(2, ((1, -2),))
    params = GadgetParams.make("cvc", sat, 2)
    # assignments as bits (x1, x2): only x1 = 0, x2 = 1 fails
    got = satisfying_sequences(sat, params, 1, 0)
    assert sorted(got) == sorted(params.kappa(tau) for tau in (0, 1, 3))


# -- instances -------------------------------------------------------------

@pytest.mark.parametrize("problem", ["cvc", "cds"])
def test_pendant_partners(problem):
    inst = build_instance(problem, random_cnf(3, 2, 1), 2)
    g, idx = inst.graph, inst.index
    for name, v in idx.items():
        if name[0] in ("obar", "zbar", "xbar", "root'"):
            assert g.degree(v) == 1
            partner = next(iter(g.adj[v]))
            assert inst.names[partner][0] == {"obar": "o", "zbar": "z", "xbar": "x",
                                              "root'": "root"}[name[0]]


@pytest.mark.parametrize("problem", ["cvc", "cds"])
def test_path_ends_touch_root(problem):
    inst = build_instance(problem, random_cnf(2, 1, 3), 1)
    gad, root = path_gadget(problem), inst.index[("root",)]
    cols = inst.params.columns
    for i, j in itertools.product(range(1, inst.params.t + 1), range(1, inst.params.p + 1)):
        for x in gad.join_in:
            assert root in inst.graph.adj[inst.index[("P", i, j, 1, x)]]
        for x in gad.join_out:
            assert root in inst.graph.adj[inst.index[("P", i, j, cols, x)]]
            if cols > 1:
                assert root not in inst.graph.adj[inst.index[("P", i, j, 1, x)]]


def test_smallest_cvc_instance_rebuilt_by_hand():
    sat = SatInstance(1, ((1,),))
    inst = build_instance("cvc", sat, 1)
    assert inst.budget == 181 and inst.params.columns == 6 and inst.graph.n == 362
    gad = build_cvc_path_gadget()
    want = {frozenset({("root",), ("root'",)})}
    for ell in range(1, 7):
        P = lambda v, c=ell: ("P", 1, 1, c, v)
        want.add(frozenset({("o", ell), ("obar", ell)}))
        want.add(frozenset({("z", 1, ell), ("zbar", 1, ell)}))
        want |= {frozenset({P(x), P(y)}) for x, y in gad.edges}
        want |= {frozenset({P(x), ("root",)}) for x in gad.root_adjacent}
        if ell < 6:
            want |= {frozenset({P(x), P(y, ell + 1)}) for x in ("u3", "u4") for y in ("u1", "u2")}
        for d in range(1, 7):
            x, y = ("x", 1, ell, (d,)), ("y", 1, ell, (d,))
            want |= {frozenset({x, ("xbar", 1, ell, (d,))}), frozenset({x, y}),
                     frozenset({y, ("root",)}), frozenset({y, ("z", 1, ell)}),
                     frozenset({x, P(f"v{d}")})}
        # x1 = 1 is tau = 1, digit 1 + 1
        want.add(frozenset({("o", ell), ("y", 1, ell, (2,))}))
    want |= {frozenset({("P", 1, 1, 1, u), ("root",)}) for u in ("u1", "u2")}
    want |= {frozenset({("P", 1, 1, 6, u), ("root",)}) for u in ("u3", "u4")}
    got = {frozenset({inst.names[u], inst.names[v]}) for u, v in inst.graph.edges()}
    assert got == want


@pytest.mark.parametrize("problem", ["cvc", "cds"])
@pytest.mark.parametrize("beta", [1, 2])
def test_expression_matches_graph(problem, beta):
    sat = random_cnf(3, 2, beta)
    inst = generate(problem, sat, beta)
    expr = inst.expression
    assert expr.is_linear()
    g = evaluate(expr)
    assert g.adj == inst.graph.adj
    assert is_irredundant(expr)
    assert width(expr) == inst.params.width_bound
    man = inst.manifest()
    assert man["budget"] == inst.budget and man["vertices"] == inst.graph.n
