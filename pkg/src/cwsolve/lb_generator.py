"""Hard instances from CNF formulas: path gadgets, decoding and clause gadgets,
exact budgets, and linear clique-expressions for the resulting graphs.

The graph and its expression are produced by two separate routines so that
evaluating the expression is a real check of the construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from .clique_expr import CliqueExpression, ExprNode, Introduce, Join, Relabel, Union
from .graph_core import LabeledGraph


class GeneratorError(ValueError):
    pass


# -- CNF -------------------------------------------------------------------

@dataclass(frozen=True)
class SatInstance:
    n: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for c in self.clauses:
            if not c:
                raise GeneratorError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.n:
                    raise GeneratorError(f"literal {lit} outside 1..{self.n}")

    @property
    def m(self) -> int:
        return len(self.clauses)


def parse_dimacs(text: str) -> SatInstance:
    n = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise GeneratorError("malformed DIMACS header")
            n = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    if n is None:
        raise GeneratorError("missing DIMACS header")
    return SatInstance(n, tuple(clauses))


# -- path gadgets ----------------------------------------------------------

def _sol(a: str) -> int:
    return int(a in ("1_0", "1_1"))


def _conn(a: str) -> int:
    return int(a == "1_1")


def _dom(a: str) -> int:
    return int(a == "0_1")


CVC_STATES = (
    ("0", "0", "1_1", "1_1"),
    ("1_0", "0", "1_1", "1_0"),
    ("1_0", "1_0", "1_1", "0"),
    ("1_1", "0", "1_0", "1_0"),
    ("1_1", "1_0", "1_0", "0"),
    ("1_1", "1_1", "0", "0"),
)

CDS_STATES = (
    ("0_1", "0_0", "1_1", "0_1"),
    ("0_1", "0_1", "0_1", "0_1"),
    ("1_0", "0_0", "1_1", "0_0"),
    ("1_1", "0_0", "1_0", "0_0"),
    ("1_1", "0_1", "0_1", "0_0"),
)


@dataclass(frozen=True)
class PathGadget:
    """One path gadget over local vertex names (the root is not part of it)."""

    problem: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    root_adjacent: frozenset[str]
    join_in: tuple[str, str]
    join_out: tuple[str, str]
    boundary: tuple[str, str, str, str]
    clique: tuple[str, ...]
    states: tuple[tuple[str, ...], ...]
    subdivided: tuple[tuple[str, str, str], ...] = ()   # (w, x, y) for each subdivided edge
    plain_edges: tuple[tuple[str, str], ...] = ()

    def canonical(self, ell: int) -> frozenset[str]:
        """The canonical solution restricted to the gadget for state number ``ell`` (1-based)."""
        s = self.states[ell - 1]
        chosen = {v for k, v in enumerate(self.clique, 1) if k != ell}
        if self.problem == "cvc":
            for i in range(1, 5):
                a = s[i - 1]
                chosen |= {f"a{i}_1", f"u{i}" if _sol(a) else f"a{i}_3",
                           f"b{i}_{_sol(a)}", f"c{i}_{_conn(a)}"}
        else:
            for i in (1, 2):
                a, d = s[2 * i - 2], s[2 * i - 1]
                chosen |= {f"a{i}_1", f"u{i}_1" if _sol(a) else f"a{i}_3",
                           f"b{i}_{_sol(a)}", f"c{i}_{_conn(a)}", f"d{i}_{_dom(d)}"}
        return frozenset(chosen)


def build_cvc_path_gadget() -> PathGadget:
    verts: list[str] = []
    edges: list[tuple[str, str]] = []
    root_adj: set[str] = set()
    for i in range(1, 5):
        verts += [f"u{i}", f"a{i}_1", f"a{i}_2", f"a{i}_3", f"b{i}_0", f"b{i}_1", f"c{i}_0", f"c{i}_1"]
        edges += [(f"u{i}", f"a{i}_1"), (f"u{i}", f"a{i}_3"), (f"u{i}", f"b{i}_0"),
                  (f"a{i}_1", f"a{i}_2"), (f"a{i}_1", f"b{i}_0"), (f"a{i}_1", f"c{i}_1"),
                  (f"a{i}_3", f"b{i}_1"), (f"b{i}_0", f"b{i}_1"), (f"c{i}_0", f"c{i}_1")]
        root_adj |= {f"a{i}_3", f"b{i}_0", f"b{i}_1", f"c{i}_0", f"c{i}_1"}
    clique = tuple(f"v{k}" for k in range(1, 7))
    verts += clique
    root_adj |= set(clique)
    edges += list(itertools.combinations(clique, 2))
    for k, s in enumerate(CVC_STATES, 1):
        for i in range(1, 5):
            edges += [(f"v{k}", f"b{i}_{_sol(s[i - 1])}"), (f"v{k}", f"c{i}_{_conn(s[i - 1])}")]
    return PathGadget("cvc", tuple(verts), tuple(edges), frozenset(root_adj),
                      ("u1", "u2"), ("u3", "u4"), ("u1", "u2", "u3", "u4"), clique, CVC_STATES,
                      (), tuple(edges))


def build_cds_path_gadget() -> PathGadget:
    verts: list[str] = []
    plain: list[tuple[str, str]] = []
    sub_pairs: list[tuple[str, str]] = []
    root_adj: set[str] = set()
    for i in (1, 2):
        verts += [f"u{i}_1", f"u{i}_2", f"a{i}_1", f"a{i}_2", f"a{i}_3", f"b{i}_0", f"b{i}_1",
                  f"c{i}_0", f"c{i}_1", f"d{i}_0", f"d{i}_1"]
        plain += [(f"u{i}_1", f"a{i}_1"), (f"a{i}_1", f"a{i}_2"), (f"a{i}_1", f"b{i}_0"),
                  (f"a{i}_1", f"c{i}_1"), (f"u{i}_2", f"d{i}_1")]
        sub_pairs += [(f"u{i}_1", f"a{i}_3"), (f"u{i}_1", f"b{i}_0"), (f"a{i}_3", f"b{i}_1"),
                      (f"b{i}_0", f"b{i}_1"), (f"c{i}_0", f"c{i}_1"), (f"d{i}_0", f"d{i}_1")]
        root_adj |= {f"a{i}_3", f"b{i}_0", f"b{i}_1", f"c{i}_0", f"c{i}_1", f"d{i}_0", f"d{i}_1"}
    clique = tuple(f"v{k}" for k in range(1, 6))
    verts += clique
    root_adj |= set(clique)
    sub_pairs += list(itertools.combinations(clique, 2))
    for k, s in enumerate(CDS_STATES, 1):
        for i in (1, 2):
            a, d = s[2 * i - 2], s[2 * i - 1]
            sub_pairs += [(f"v{k}", f"b{i}_{_sol(a)}"), (f"v{k}", f"c{i}_{_conn(a)}"),
                          (f"v{k}", f"d{i}_{_dom(d)}")]
    subdivided = tuple((f"w[{x}|{y}]", x, y) for x, y in sub_pairs)
    verts += [w for w, _, _ in subdivided]
    edges = plain + [(x, w) for w, x, _ in subdivided] + [(w, y) for w, _, y in subdivided]
    return PathGadget("cds", tuple(verts), tuple(edges), frozenset(root_adj),
                      ("u1_1", "u1_2"), ("u2_1", "u2_2"), ("u1_1", "u1_2", "u2_1", "u2_2"),
                      clique, CDS_STATES, subdivided, tuple(plain))


def path_gadget(problem: str) -> PathGadget:
    if problem == "cvc":
        return build_cvc_path_gadget()
    if problem == "cds":
        return build_cds_path_gadget()
    raise GeneratorError(f"unknown problem {problem!r}")


# -- local checks on gadgets -----------------------------------------------

ROOT = "root"


def _adjacency(edges: Iterable[tuple[Hashable, Hashable]]) -> dict[Hashable, set]:
    adj: dict[Hashable, set] = {}
    for x, y in edges:
        adj.setdefault(x, set()).add(y)
        adj.setdefault(y, set()).add(x)
    return adj


def _root_reach(adj: dict, chosen: set) -> set:
    """Vertices of ``chosen`` linked to the root inside chosen plus the root."""
    seen = {ROOT}
    stack = [ROOT]
    while stack:
        x = stack.pop()
        for y in adj.get(x, ()):
            if y in chosen and y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def atom_states(problem: str, adj: dict, chosen: set, vertices: Iterable) -> dict:
    """Atomic state of each listed vertex with respect to ``chosen`` plus the root."""
    reach = _root_reach(adj, chosen)
    full = set(chosen) | {ROOT}
    out = {}
    for v in vertices:
        if v in chosen:
            out[v] = "1_1" if v in reach else "1_0"
        elif problem == "cvc":
            out[v] = "0"
        else:
            out[v] = "0_1" if adj.get(v, set()) & full else "0_0"
    return out


def _gadget_adjacency(g: PathGadget, tag: Hashable = None) -> list[tuple]:
    name = (lambda x: x) if tag is None else (lambda x: (tag, x))
    edges = [(name(x), name(y)) for x, y in g.edges]
    edges += [(name(x), ROOT) for x in g.root_adjacent]
    return edges


@dataclass
class CanonicalCheck:
    ell: int
    size: int
    state: tuple[str, ...]
    feasible: bool
    inner_ok: bool

    @property
    def ok(self) -> bool:
        return self.feasible and self.inner_ok


def check_canonical(g: PathGadget, ell: int) -> CanonicalCheck:
    """Is the canonical set a vertex cover of P (resp. resolving every subdivided
    edge), with boundary state s^ell and everything else covered or dominated
    as required?"""
    chosen = set(g.canonical(ell))
    adj = _adjacency(_gadget_adjacency(g))
    states = atom_states(g.problem, adj, chosen, g.boundary)
    state = tuple(states[u] for u in g.boundary)
    if g.problem == "cvc":
        feasible = all(x in chosen or y in chosen for x, y in g.edges)
        inner_ok = True
    else:
        feasible = all(x in chosen or y in chosen for _, x, y in g.subdivided)
        skip = {"a1_1", "a2_1", *g.boundary}
        rest = [v for v in g.vertices if v not in skip]
        inner_ok = set(atom_states("cds", adj, chosen, rest).values()) <= {"0_1", "1_1"}
    return CanonicalCheck(ell, len(chosen), state, feasible, inner_ok)


@dataclass
class TransitionCheck:
    ell1: int
    ell2: int
    violations: list[tuple[str, str]]   # (kind, vertex)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_transition(g: PathGadget, ell1: int, ell2: int) -> TransitionCheck:
    """Two gadget copies, the outgoing pair of the first joined to the incoming pair
    of the second, both using their canonical sets. Lists every violated constraint
    at the four inner join vertices."""
    edges = _gadget_adjacency(g, 1) + _gadget_adjacency(g, 2)
    join_edges = [((1, x), (2, y)) for x in g.join_out for y in g.join_in]
    adj = _adjacency(edges + join_edges)
    chosen = {(1, x) for x in g.canonical(ell1)} | {(2, x) for x in g.canonical(ell2)}
    inner = [(1, x) for x in g.join_out] + [(2, x) for x in g.join_in]
    states = atom_states(g.problem, adj, chosen, inner)
    bad: list[tuple[str, str]] = []
    if g.problem == "cvc":
        for x, y in join_edges:
            if x not in chosen and y not in chosen:
                bad.append(("uncovered edge", f"{x[1]}^{x[0]}-{y[1]}^{y[0]}"))
    for v in inner:
        st = states[v]
        if st == "1_0":
            bad.append(("not root-connected", f"{v[1]}^{v[0]}"))
        elif st == "0_0":
            bad.append(("undominated", f"{v[1]}^{v[0]}"))
    return TransitionCheck(ell1, ell2, bad)


def cds_packing_sets(g: PathGadget | None = None) -> dict[int, list[frozenset[str]]]:
    """Per index i, the closed neighborhoods that each need their own solution vertex."""
    g = g or build_cds_path_gadget()
    adj = _adjacency(_gadget_adjacency(g))
    out = {}
    for i in (1, 2):
        centers = [f"a{i}_2", f"w[b{i}_0|b{i}_1]", f"w[u{i}_1|a{i}_3]",
                   f"w[c{i}_0|c{i}_1]", f"w[d{i}_0|d{i}_1]"]
        out[i] = [frozenset(adj[c] | {c}) for c in centers]
    return out


def check_cds_packing(g: PathGadget | None = None) -> bool:
    sets = [s for group in cds_packing_sets(g).values() for s in group]
    return all(not (a & b) for a, b in itertools.combinations(sets, 2))


def verify_gadget_transitions(problem: str) -> dict:
    g = path_gadget(problem)
    q = len(g.states)
    canon = [check_canonical(g, ell) for ell in range(1, q + 1)]
    pairs = [check_transition(g, a, b) for a in range(1, q + 1) for b in range(1, q + 1)]
    expected_size = 21 if problem == "cvc" else 14
    return {
        "problem": problem,
        "canonical_ok": all(c.ok and c.size == expected_size and c.state == g.states[c.ell - 1]
                            for c in canon),
        "canonical": [(c.ell, c.size, c.state, c.ok) for c in canon],
        "diagonal_ok": all(p.ok for p in pairs if p.ell1 == p.ell2),
        "decreasing_violated": all(not p.ok for p in pairs if p.ell1 > p.ell2),
        "transitions": {(p.ell1, p.ell2): p.violations for p in pairs},
    }


# -- full instances --------------------------------------------------------

@dataclass(frozen=True)
class GadgetParams:
    problem: str
    beta: int
    t: int
    p: int
    base: int
    columns: int

    @classmethod
    def make(cls, problem: str, sat: SatInstance, beta: int) -> "GadgetParams":
        if beta < 1:
            raise GeneratorError("beta must be at least 1")
        base = 6 if problem == "cvc" else 5
        t = max(1, math.ceil(sat.n / beta))
        p = 0
        while base ** p < 2 ** beta:
            p += 1
        slack = 5 if problem == "cvc" else 4
        return cls(problem, beta, t, p, base, sat.m * (slack * t * p + 1))

    @property
    def budget(self) -> int:
        per_gadget = 21 if self.problem == "cvc" else 14
        t, p = self.t, self.p
        return (per_gadget * t * p + (self.base ** p + 2) * t + 1) * self.columns + 1

    @property
    def width_bound(self) -> int:
        if self.problem == "cvc":
            return self.t * self.p + 3 * self.base ** self.p + 44
        return self.t * self.p + 3 * self.base ** self.p + CDS_WIDTH_CONSTANT

    def kappa(self, assignment: int) -> tuple[int, ...]:
        """Digits (plus one) of the assignment's binary value in base 6 or 5, least significant first."""
        digits = []
        for _ in range(self.p):
            assignment, d = divmod(assignment, self.base)
            digits.append(d + 1)
        return tuple(digits)


# Labels at the widest point of the CDS expression beyond tp + 3*5^p: root,
# trash, two clause labels, two extra decoding labels, 27 gadget vertices and
# one label reused by every subdividing vertex.
CDS_WIDTH_CONSTANT = 34


@dataclass
class GeneratedInstance:
    problem: str
    params: GadgetParams
    graph: LabeledGraph
    names: tuple[Hashable, ...]          # vertex id -> structured name
    roles: dict[int, str]
    budget: int
    sat: SatInstance
    expression: CliqueExpression | None = None
    index: dict[Hashable, int] = field(default_factory=dict)

    def manifest(self) -> dict:
        out = {"problem": self.problem, "t": self.params.t, "p": self.params.p,
               "beta": self.params.beta, "columns": self.params.columns,
               "budget": self.budget, "vertices": self.graph.n, "edges": self.graph.m}
        if self.expression is not None:
            from .clique_expr import width
            out["width"] = width(self.expression)
            out["width_bound"] = self.params.width_bound
        return out


def _group_vars(sat: SatInstance, params: GadgetParams, i: int) -> list[int]:
    lo = (i - 1) * params.beta + 1
    return list(range(lo, min(lo + params.beta, sat.n + 1)))


def satisfying_sequences(sat: SatInstance, params: GadgetParams, i: int, clause: int) -> list[tuple[int, ...]]:
    """Sequences h = kappa(tau) of group-i assignments tau that satisfy the clause."""
    vars_ = _group_vars(sat, params, i)
    out = []
    for tau in range(2 ** params.beta):
        value = {v: (tau >> b) & 1 for b, v in enumerate(vars_)}
        if any(abs(lit) in value and value[abs(lit)] == (lit > 0) for lit in sat.clauses[clause]):
            out.append(params.kappa(tau))
    return out


def _role(name: tuple) -> str:
    kind = name[0]
    if kind in ("root", "root'"):
        return "root"
    if kind in ("o", "obar"):
        return "clause"
    if kind in ("x", "xbar", "y", "z", "zbar"):
        return "decoding"
    local = name[-1]
    if local.startswith("u"):
        return "join"
    if local.startswith("v"):
        return "clique"
    if local.startswith("w["):
        return "subdivision"
    if local[0] in "bcd":
        return "indicator"
    return "auxiliary"


def build_instance(problem: str, sat: SatInstance, beta: int) -> GeneratedInstance:
    """Graph of the construction, built directly from its description."""
    params = GadgetParams.make(problem, sat, beta)
    g = path_gadget(problem)
    names: list[Hashable] = []
    index: dict[Hashable, int] = {}
    edges: list[tuple[int, int]] = []

    def vid(name: Hashable) -> int:
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    def edge(x: Hashable, y: Hashable) -> None:
        edges.append((vid(x), vid(y)))

    root = ("root",)
    edge(root, ("root'",))
    seqs = list(itertools.product(range(1, params.base + 1), repeat=params.p))
    cols = params.columns
    for ell in range(1, cols + 1):
        edge(("o", ell), ("obar", ell))
        clause = (ell - 1) % sat.m
        for i in range(1, params.t + 1):
            for j in range(1, params.p + 1):
                tag = ("P", i, j, ell)
                for x, y in g.edges:
                    edge(tag + (x,), tag + (y,))
                for x in g.root_adjacent:
                    edge(tag + (x,), root)
                if ell < cols:
                    nxt = ("P", i, j, ell + 1)
                    for x in g.join_out:
                        for y in g.join_in:
                            edge(tag + (x,), nxt + (y,))
            for h in seqs:
                x, xb, y = ("x", i, ell, h), ("xbar", i, ell, h), ("y", i, ell, h)
                edge(x, xb)
                edge(x, y)
                edge(y, root)
                edge(y, ("z", i, ell))
                for j in range(1, params.p + 1):
                    edge(x, ("P", i, j, ell, f"v{h[j - 1]}"))
            edge(("z", i, ell), ("zbar", i, ell))
            for h in satisfying_sequences(sat, params, i, clause):
                edge(("o", ell), ("y", i, ell, h))
    for i in range(1, params.t + 1):
        for j in range(1, params.p + 1):
            for x in g.join_in:
                edge(("P", i, j, 1, x), root)
            for x in g.join_out:
                edge(("P", i, j, cols, x), root)
    n = len(names)
    graph = LabeledGraph.from_edges(n, edges)
    roles = {index[nm]: _role(nm) for nm in names}
    return GeneratedInstance(problem, params, graph, tuple(names), roles, params.budget, sat,
                             None, index)


def build_cvc_instance(sat: SatInstance, beta: int) -> GeneratedInstance:
    return build_instance("cvc", sat, beta)


def build_cds_instance(sat: SatInstance, beta: int) -> GeneratedInstance:
    return build_instance("cds", sat, beta)


# -- linear expressions ----------------------------------------------------

class _LinearBuilder:
    def __init__(self, index: dict[Hashable, int]):
        self.index = index
        self.nodes: list[ExprNode] = []
        self.top = -1

    def _push(self, node: ExprNode) -> None:
        self.nodes.append(node)
        self.top = len(self.nodes) - 1

    def intro(self, name: Hashable, label: int) -> None:
        self.nodes.append(Introduce(label, self.index[name]))
        leaf = len(self.nodes) - 1
        if self.top < 0:
            self.top = leaf
        else:
            self._push(Union(self.top, leaf))

    def join(self, a: int, b: int) -> None:
        self._push(Join(a, b, self.top))

    def relabel(self, a: int, b: int) -> None:
        self._push(Relabel(a, b, self.top))


def emit_linear_expression(inst: GeneratedInstance) -> CliqueExpression:
    """Column by column, group by group: each gadget gets temporary labels, is
    joined to its predecessor through the path label of its row, and then hands
    its outgoing join vertices to that path label."""
    params, problem = inst.params, inst.problem
    g = path_gadget(problem)
    t, p, base = params.t, params.p, params.base
    ROOT_L, TRASH, CL_O, CL_OBAR = 1, 2, 3, 4
    path_label = {(i, j): 4 + (i - 1) * p + j for i in range(1, t + 1) for j in range(1, p + 1)}
    nxt = 5 + t * p
    seqs = list(itertools.product(range(1, base + 1), repeat=p))
    dec_label: dict[Hashable, int] = {}
    for h in seqs:
        for kind in ("x", "xbar", "y"):
            dec_label[(kind, h)] = nxt
            nxt += 1
    dec_label["z"], dec_label["zbar"] = nxt, nxt + 1
    nxt += 2
    base_vertices = [v for v in g.vertices if not v.startswith("w[")]
    gad_label = {v: nxt + k for k, v in enumerate(base_vertices)}
    nxt += len(base_vertices)
    temp = None
    if g.subdivided:
        temp = nxt
        nxt += 1
    k = nxt - 1

    b = _LinearBuilder(inst.index)
    b.intro(("root",), ROOT_L)
    b.intro(("root'",), TRASH)
    b.join(ROOT_L, TRASH)
    cols = params.columns
    for ell in range(1, cols + 1):
        clause = (ell - 1) % inst.sat.m
        b.intro(("o", ell), CL_O)
        b.intro(("obar", ell), CL_OBAR)
        b.join(CL_O, CL_OBAR)
        for i in range(1, t + 1):
            for h in seqs:
                b.intro(("x", i, ell, h), dec_label[("x", h)])
                b.intro(("xbar", i, ell, h), dec_label[("xbar", h)])
                b.intro(("y", i, ell, h), dec_label[("y", h)])
                b.join(dec_label[("x", h)], dec_label[("xbar", h)])
                b.join(dec_label[("x", h)], dec_label[("y", h)])
                b.join(dec_label[("y", h)], ROOT_L)
            b.intro(("z", i, ell), dec_label["z"])
            b.intro(("zbar", i, ell), dec_label["zbar"])
            b.join(dec_label["z"], dec_label["zbar"])
            for h in seqs:
                b.join(dec_label["z"], dec_label[("y", h)])
            for h in satisfying_sequences(inst.sat, params, i, clause):
                b.join(CL_O, dec_label[("y", h)])
            for j in range(1, p + 1):
                tag = ("P", i, j, ell)
                for v in base_vertices:
                    b.intro(tag + (v,), gad_label[v])
                for x, y in g.plain_edges:
                    b.join(gad_label[x], gad_label[y])
                for w, x, y in g.subdivided:
                    b.intro(tag + (w,), temp)
                    b.join(temp, gad_label[x])
                    b.join(temp, gad_label[y])
                    b.relabel(temp, TRASH)
                for v in sorted(g.root_adjacent, key=base_vertices.index):
                    b.join(gad_label[v], ROOT_L)
                for h in seqs:
                    b.join(dec_label[("x", h)], gad_label[f"v{h[j - 1]}"])
                pl = path_label[(i, j)]
                for u in g.join_in:
                    b.join(gad_label[u], pl if ell > 1 else ROOT_L)
                if ell > 1:
                    b.relabel(pl, TRASH)
                for u in g.join_out:
                    b.relabel(gad_label[u], pl)
                for v in base_vertices:
                    if v not in g.join_out:
                        b.relabel(gad_label[v], TRASH)
            for lab in sorted(set(dec_label.values())):
                b.relabel(lab, TRASH)
        b.relabel(CL_O, TRASH)
        b.relabel(CL_OBAR, TRASH)
    # The last gadget of every row is adjacent to the root as well.
    for i in range(1, t + 1):
        for j in range(1, p + 1):
            b.join(path_label[(i, j)], ROOT_L)
    expr = CliqueExpression(tuple(b.nodes), b.top, k)
    inst.expression = expr
    return expr


def emit_cvc_linear_expression(inst: GeneratedInstance) -> CliqueExpression:
    return emit_linear_expression(inst)


def emit_cds_linear_expression(inst: GeneratedInstance) -> CliqueExpression:
    return emit_linear_expression(inst)


def generate(problem: str, sat: SatInstance, beta: int) -> GeneratedInstance:
    inst = build_instance(problem, sat, beta)
    emit_linear_expression(inst)
    return inst
