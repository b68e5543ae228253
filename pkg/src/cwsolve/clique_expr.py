"""Clique-expressions: syntax tree, text format, evaluation, normal forms
(irredundant, nice, augmented with dead nodes) and per-node label bookkeeping.

Expressions are stored as a flat node list in which every child precedes its
parent, so every pass is an index loop and deep linear expressions never hit
the recursion limit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Union as TypingUnion

from .graph_core import LabeledGraph


class ExpressionError(ValueError):
    pass


@dataclass(frozen=True)
class Introduce:
    label: int
    vertex: int


@dataclass(frozen=True)
class Union:
    left: int
    right: int


@dataclass(frozen=True)
class Relabel:
    src: int
    dst: int
    child: int


@dataclass(frozen=True)
class Join:
    a: int
    b: int
    child: int


@dataclass(frozen=True)
class Dead:
    label: int
    child: int


ExprNode = TypingUnion[Introduce, Union, Relabel, Join, Dead]


def children(node: ExprNode) -> tuple[int, ...]:
    if isinstance(node, Introduce):
        return ()
    if isinstance(node, Union):
        return (node.left, node.right)
    return (node.child,)


def node_labels(node: ExprNode) -> tuple[int, ...]:
    if isinstance(node, Introduce):
        return (node.label,)
    if isinstance(node, (Relabel,)):
        return (node.src, node.dst)
    if isinstance(node, Join):
        return (node.a, node.b)
    if isinstance(node, Dead):
        return (node.label,)
    return ()


@dataclass(frozen=True)
class CliqueExpression:
    nodes: tuple[ExprNode, ...]
    root: int
    k: int

    def __post_init__(self):
        _check_structure(self)

    @property
    def n(self) -> int:
        return sum(isinstance(x, Introduce) for x in self.nodes)

    def is_linear(self) -> bool:
        return all(isinstance(self.nodes[x.right], Introduce)
                   for x in self.nodes if isinstance(x, Union))

    def is_augmented(self) -> bool:
        return any(isinstance(x, Dead) for x in self.nodes)

    def parents(self) -> list[int]:
        par = [-1] * len(self.nodes)
        for i, node in enumerate(self.nodes):
            for c in children(node):
                par[c] = i
        return par


def _check_structure(expr: CliqueExpression) -> None:
    nodes = expr.nodes
    if not nodes:
        raise ExpressionError("empty expression")
    if not 0 <= expr.root < len(nodes):
        raise ExpressionError("dangling node reference: root")
    seen_parent = [False] * len(nodes)
    seen_vertex: set[int] = set()
    for i, node in enumerate(nodes):
        for c in children(node):
            if not 0 <= c < i:
                raise ExpressionError(f"dangling node reference: node {i} -> {c}")
            if seen_parent[c]:
                raise ExpressionError(f"node {c} has more than one parent")
            seen_parent[c] = True
        for lab in node_labels(node):
            if not 1 <= lab <= expr.k:
                raise ExpressionError(f"label {lab} out of [1..{expr.k}]")
        if isinstance(node, Join) and node.a == node.b:
            raise ExpressionError(f"self-join on label {node.a}")
        if isinstance(node, Introduce):
            if node.vertex in seen_vertex:
                raise ExpressionError(f"duplicate vertex {node.vertex}")
            seen_vertex.add(node.vertex)
        if isinstance(node, Dead) and not isinstance(nodes[node.child], (Join, Dead)):
            raise ExpressionError(f"dead node {i} not above a join or dead node")
    for i in range(len(nodes)):
        if i != expr.root and not seen_parent[i]:
            raise ExpressionError(f"node {i} unreachable from root")
    if seen_parent[expr.root]:
        raise ExpressionError("root has a parent")
    if seen_vertex != set(range(len(seen_vertex))):
        raise ExpressionError("vertex ids must be 0..n-1")


# -- text format -----------------------------------------------------------

def parse_expression(text: str) -> CliqueExpression:
    """Parse the line format ``<id>: intro|union|relabel|join|dead ...`` / ``root <id>``.

    An optional header ``p cwexpr <k> [linear]`` fixes the width; without it
    k is the largest label mentioned.
    """
    declared_k = None
    want_linear = False
    ids: dict[int, int] = {}
    raw_nodes: list[tuple[str, list[int], int]] = []
    root_id = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("p "):
                parts = line.split()
                if parts[1] != "cwexpr":
                    raise ExpressionError(f"line {lineno}: malformed header")
                declared_k = int(parts[2])
                want_linear = "linear" in parts[3:]
                continue
            if line.startswith("root"):
                root_id = int(line.split()[1])
                continue
            head, body = line.split(":", 1)
            node_id = int(head)
            parts = body.split()
            op, args = parts[0], [int(x) for x in parts[1:]]
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ExpressionError):
                raise
            raise ExpressionError(f"line {lineno}: malformed line {raw!r}") from exc
        if node_id in ids:
            raise ExpressionError(f"line {lineno}: duplicate node id {node_id}")
        arity = {"intro": 2, "union": 2, "relabel": 3, "join": 3, "dead": 2}
        if op not in arity:
            raise ExpressionError(f"line {lineno}: unknown operation {op!r}")
        if len(args) != arity[op]:
            raise ExpressionError(f"line {lineno}: {op} expects {arity[op]} arguments")
        ids[node_id] = len(raw_nodes)
        raw_nodes.append((op, args, lineno))
    if root_id is None:
        raise ExpressionError("missing root line")

    def ref(x: int, lineno: int, upto: int) -> int:
        if x not in ids or ids[x] >= upto:
            raise ExpressionError(f"line {lineno}: dangling node reference {x}")
        return ids[x]

    nodes: list[ExprNode] = []
    max_label = 1
    for pos, (op, a, lineno) in enumerate(raw_nodes):
        if op == "intro":
            node: ExprNode = Introduce(a[0], a[1])
            max_label = max(max_label, a[0])
        elif op == "union":
            node = Union(ref(a[0], lineno, pos), ref(a[1], lineno, pos))
        elif op == "relabel":
            node = Relabel(a[0], a[1], ref(a[2], lineno, pos))
            max_label = max(max_label, a[0], a[1])
        elif op == "join":
            if a[0] == a[1]:
                raise ExpressionError(f"line {lineno}: self-join on label {a[0]}")
            node = Join(a[0], a[1], ref(a[2], lineno, pos))
            max_label = max(max_label, a[0], a[1])
        else:
            node = Dead(a[0], ref(a[1], lineno, pos))
            max_label = max(max_label, a[0])
        nodes.append(node)
    if root_id not in ids:
        raise ExpressionError(f"dangling node reference: root {root_id}")
    expr = CliqueExpression(tuple(nodes), ids[root_id],
                            declared_k if declared_k is not None else max_label)
    if want_linear and not expr.is_linear():
        raise ExpressionError("header declares a linear expression but it is not linear")
    return expr


def format_expression(expr: CliqueExpression) -> str:
    head = f"p cwexpr {expr.k}" + (" linear" if expr.is_linear() else "")
    lines = [head]
    for i, node in enumerate(expr.nodes, 1):
        if isinstance(node, Introduce):
            lines.append(f"{i}: intro {node.label} {node.vertex}")
        elif isinstance(node, Union):
            lines.append(f"{i}: union {node.left + 1} {node.right + 1}")
        elif isinstance(node, Relabel):
            lines.append(f"{i}: relabel {node.src} {node.dst} {node.child + 1}")
        elif isinstance(node, Join):
            lines.append(f"{i}: join {node.a} {node.b} {node.child + 1}")
        else:
            lines.append(f"{i}: dead {node.label} {node.child + 1}")
    lines.append(f"root {expr.root + 1}")
    return "\n".join(lines) + "\n"


# -- evaluation ------------------------------------------------------------

@dataclass
class _Evaluation:
    graph: LabeledGraph
    join_stats: dict[int, tuple[int, int]]   # join node -> (new edges, already present)
    width: int
    nonempty: list[frozenset[int]] | None    # per node, labels with vertices


def _run(expr: CliqueExpression, keep_labels: bool = False) -> _Evaluation:
    """Single bottom-up pass; child label maps are handed to their parent, not copied."""
    n = expr.n
    adj: list[set[int]] = [set() for _ in range(n)]
    label_of = [0] * n
    states: list[dict[int, set[int]] | None] = [None] * len(expr.nodes)
    stats: dict[int, tuple[int, int]] = {}
    nonempty: list[frozenset[int]] | None = [] if keep_labels else None
    width = 0
    for t, node in enumerate(expr.nodes):
        if isinstance(node, Introduce):
            st = {node.label: {node.vertex}}
        elif isinstance(node, Union):
            a, b = states[node.left], states[node.right]
            states[node.left] = states[node.right] = None
            if sum(map(len, a.values())) < sum(map(len, b.values())):
                a, b = b, a
            for lab, vs in b.items():
                if lab in a:
                    a[lab] |= vs
                else:
                    a[lab] = vs
            st = a
        else:
            st = states[node.child]
            states[node.child] = None
            if isinstance(node, Relabel):
                if node.src != node.dst and node.src in st:
                    moved = st.pop(node.src)
                    if node.dst in st:
                        st[node.dst] |= moved
                    else:
                        st[node.dst] = moved
            elif isinstance(node, Join):
                va, vb = st.get(node.a, set()), st.get(node.b, set())
                present = sum(len(adj[u] & vb) for u in va)
                stats[t] = (len(va) * len(vb) - present, present)
                for u in va:
                    adj[u] |= vb
                for v in vb:
                    adj[v] |= va
        states[t] = st
        if st:
            width = max(width, max(st))
        if nonempty is not None:
            nonempty.append(frozenset(st))
    for lab, vs in states[expr.root].items():
        for v in vs:
            label_of[v] = lab
    graph = LabeledGraph(tuple(frozenset(s) for s in adj), tuple(label_of), expr.k)
    return _Evaluation(graph, stats, width, nonempty)


def evaluate(expr: CliqueExpression) -> LabeledGraph:
    return _run(expr).graph


def width(expr: CliqueExpression) -> int:
    """Largest label that is nonempty at some node."""
    return _run(expr).width


def is_irredundant(expr: CliqueExpression) -> bool:
    return all(present == 0 for _, present in _run(expr).join_stats.values())


def is_nice(expr: CliqueExpression) -> bool:
    ev = _run(expr, keep_labels=True)
    for t, node in enumerate(expr.nodes):
        if isinstance(node, Join):
            new, present = ev.join_stats[t]
            if present or not new:
                return False
        elif isinstance(node, Relabel):
            below = ev.nonempty[node.child]
            if node.src == node.dst or node.src not in below or node.dst not in below:
                return False
    return True


# -- transforms ------------------------------------------------------------

def _rebuild(expr: CliqueExpression, drop: set[int], perms: list[tuple[int, ...]] | None = None,
             extra_above: dict[int, list[ExprNode]] | None = None) -> CliqueExpression:
    """Copy ``expr`` without the unary nodes in ``drop``, renaming labels by ``perms``
    and inserting the unary nodes ``extra_above[t]`` (child field ignored) above t."""
    new_nodes: list[ExprNode] = []
    where = [0] * len(expr.nodes)

    def p(t: int, lab: int) -> int:
        return perms[t][lab] if perms is not None else lab

    for t, node in enumerate(expr.nodes):
        if t in drop:
            where[t] = where[children(node)[0]]
            continue
        if isinstance(node, Introduce):
            new = Introduce(p(t, node.label), node.vertex)
        elif isinstance(node, Union):
            new = Union(where[node.left], where[node.right])
        elif isinstance(node, Relabel):
            new = Relabel(p(t, node.src), p(t, node.dst), where[node.child])
        elif isinstance(node, Join):
            new = Join(p(t, node.a), p(t, node.b), where[node.child])
        else:
            new = Dead(p(t, node.label), where[node.child])
        new_nodes.append(new)
        for extra in (extra_above or {}).get(t, []):
            assert isinstance(extra, Dead)
            new_nodes.append(Dead(extra.label, len(new_nodes) - 1))
        where[t] = len(new_nodes) - 1
    return CliqueExpression(tuple(new_nodes), where[expr.root], expr.k)


def make_irredundant(expr: CliqueExpression) -> CliqueExpression:
    """Delete joins that add no new edge.

    A join that both repeats and adds edges would need label splitting and is
    rejected.
    """
    ev = _run(expr)
    drop = set()
    for t, (new, present) in ev.join_stats.items():
        if new == 0:
            drop.add(t)
        elif present:
            raise ExpressionError(f"mixed-redundant join unsupported (node {t})")
    if not drop:
        return expr
    return _rebuild(expr, drop)


def make_nice(expr: CliqueExpression) -> CliqueExpression:
    """Remove empty joins and relabels; remove each relabel i->j with label j
    empty by exchanging labels i and j throughout the subtree below it."""
    if expr.is_augmented():
        raise ExpressionError("make_nice expects an expression without dead nodes")
    ev = _run(expr, keep_labels=True)
    if any(present for _, present in ev.join_stats.values()):
        raise ExpressionError("make_nice requires an irredundant expression")
    ident = tuple(range(expr.k + 1))
    perms: list[tuple[int, ...]] = [ident] * len(expr.nodes)
    drop: set[int] = set()
    for t in range(len(expr.nodes) - 1, -1, -1):
        node = expr.nodes[t]
        perm = perms[t]
        if isinstance(node, Relabel):
            below = ev.nonempty[node.child]
            if node.src == node.dst or node.src not in below:
                drop.add(t)
            elif node.dst not in below:
                drop.add(t)
                swap = list(range(expr.k + 1))
                swap[node.src], swap[node.dst] = node.dst, node.src
                perm = tuple(perm[swap[x]] for x in range(expr.k + 1))
        elif isinstance(node, Join) and ev.join_stats[t][0] == 0:
            drop.add(t)
        for c in children(node):
            perms[c] = perm
    if not drop:
        return expr
    return _rebuild(expr, drop, perms)


def compute_dead_sets(expr: CliqueExpression) -> list[frozenset[int]]:
    """Per node t, the vertices of G_t whose full neighborhood in G is already in G_t."""
    graph = evaluate(expr)
    return [info.dead for info in annotate(expr, graph)]


def augment_with_dead_nodes(expr: CliqueExpression) -> CliqueExpression:
    if expr.is_augmented():
        return expr
    if not is_nice(expr):
        raise ExpressionError("augment_with_dead_nodes expects a nice expression")
    info = annotate(expr)
    extra: dict[int, list[ExprNode]] = {}
    for t, node in enumerate(expr.nodes):
        if not isinstance(node, Join):
            continue
        here, below = info[t], info[node.child]
        fresh = here.dead - below.dead
        dying = [lab for lab in sorted((node.a, node.b))
                 if set(here.by_label.get(lab, ())) <= fresh]
        if dying:
            extra[t] = [Dead(lab, -1) for lab in dying]
    return _rebuild(expr, set(), None, extra)


# -- annotations -----------------------------------------------------------

@dataclass(frozen=True)
class NodeInfo:
    by_label: dict[int, tuple[int, ...]]   # V_t^l for every nonempty label, sorted
    edge_count: int
    dead: frozenset[int]                   # D_t
    live: frozenset[int]                   # live labels by the inductive rule
    dead_labels: frozenset[int]            # dead labels by their own inductive rule

    @property
    def labels(self) -> frozenset[int]:
        return frozenset(self.by_label)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for vs in self.by_label.values() for v in vs)


def annotate(expr: CliqueExpression, graph: LabeledGraph | None = None) -> list[NodeInfo]:
    """Per-node records. Copies label maps at every node, so meant for DP-sized inputs."""
    if graph is None:
        graph = evaluate(expr)
    deg = [graph.degree(v) for v in range(graph.n)]
    have = [0] * graph.n
    out: list[NodeInfo] = []
    adj: list[set[int]] = [set() for _ in range(graph.n)]
    for node in expr.nodes:
        if isinstance(node, Introduce):
            by = {node.label: (node.vertex,)}
            edges = 0
            dead = frozenset([node.vertex]) if deg[node.vertex] == 0 else frozenset()
            live = frozenset([node.label])
            dlabs: frozenset[int] = frozenset()
        elif isinstance(node, Union):
            a, b = out[node.left], out[node.right]
            by = dict(a.by_label)
            for lab, vs in b.by_label.items():
                by[lab] = tuple(sorted(by.get(lab, ()) + vs))
            edges = a.edge_count + b.edge_count
            dead = a.dead | b.dead
            live = a.live | b.live
            dlabs = a.dead_labels | b.dead_labels
        else:
            c = out[node.child]
            by = dict(c.by_label)
            edges, dead, live, dlabs = c.edge_count, c.dead, c.live, c.dead_labels
            if isinstance(node, Relabel):
                if node.src != node.dst and node.src in by:
                    moved = by.pop(node.src)
                    by[node.dst] = tuple(sorted(by.get(node.dst, ()) + moved))
                live = live - {node.src}
                dlabs = dlabs - {node.src}
            elif isinstance(node, Join):
                va, vb = by.get(node.a, ()), by.get(node.b, ())
                newly = set()
                for u in va:
                    for v in vb:
                        if v not in adj[u]:
                            adj[u].add(v)
                            adj[v].add(u)
                            have[u] += 1
                            have[v] += 1
                            edges += 1
                            newly.update((u, v))
                dead = dead | {v for v in newly if have[v] == deg[v]}
            else:
                live = live - {node.label}
                dlabs = dlabs | {node.label}
        out.append(NodeInfo(by, edges, frozenset(dead), frozenset(live), frozenset(dlabs)))
    return out


def union_split(aug: CliqueExpression, t: int,
                info: list[NodeInfo] | None = None) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    node = aug.nodes[t]
    if not isinstance(node, Union):
        raise ExpressionError(f"node {t} is not a union node")
    if info is None:
        info = annotate(aug)
    a, b = info[node.left], info[node.right]
    return a.live - b.labels, b.live - a.labels, a.live & b.live


def prepare(expr: CliqueExpression) -> CliqueExpression:
    """Irredundant, nice and augmented form of ``expr`` (identity on augmented input)."""
    if expr.is_augmented():
        return expr
    return augment_with_dead_nodes(make_nice(make_irredundant(expr)))


# -- random expressions ----------------------------------------------------

@dataclass
class _Piece:
    root: int
    labels: dict[int, set[int]] = field(default_factory=dict)


def random_expression(n: int, k: int, seed: int, max_attempts: int = 10_000) -> CliqueExpression:
    """Random irredundant k-expression whose graph is connected on n >= 2 vertices.

    The generator also emits empty joins and relabels that leave a label empty,
    so that the normal-form transforms have something to do.
    """
    if n < 2:
        raise ExpressionError("random_expression needs n >= 2 for a connected graph with an edge")
    if k < 2:
        raise ExpressionError("random_expression needs k >= 2")
    rng = random.Random(seed)
    for _ in range(max_attempts):
        expr = _random_attempt(n, k, rng)
        if expr is not None:
            return expr
    raise ExpressionError("could not generate a connected expression")


def _random_attempt(n: int, k: int, rng: random.Random) -> CliqueExpression | None:
    nodes: list[ExprNode] = []
    adj: list[set[int]] = [set() for _ in range(n)]
    pieces: list[_Piece] = []
    for v in rng.sample(range(n), n):
        lab = rng.randint(1, k)
        nodes.append(Introduce(lab, v))
        pieces.append(_Piece(len(nodes) - 1, {lab: {v}}))

    def try_join(pc: _Piece, a: int, b: int) -> None:
        va, vb = pc.labels.get(a, set()), pc.labels.get(b, set())
        if any(adj[u] & vb for u in va):
            return
        nodes.append(Join(a, b, pc.root))
        pc.root = len(nodes) - 1
        for u in va:
            adj[u] |= vb
        for v in vb:
            adj[v] |= va

    while len(pieces) > 1:
        i, j = rng.sample(range(len(pieces)), 2)
        left, right = pieces[i], pieces[j]
        nodes.append(Union(left.root, right.root))
        merged = _Piece(len(nodes) - 1, {lab: set(vs) for lab, vs in left.labels.items()})
        for lab, vs in right.labels.items():
            merged.labels.setdefault(lab, set()).update(vs)
        pieces = [p for idx, p in enumerate(pieces) if idx not in (i, j)] + [merged]
        la, lb = list(left.labels), list(right.labels)
        if rng.random() < 0.8:
            a, b = rng.choice(la), rng.choice(lb)
            if a != b:
                try_join(merged, a, b)
        for _ in range(rng.randint(0, 2)):
            a, b = rng.sample(range(1, k + 1), 2)
            if rng.random() < 0.85 and not (a in merged.labels and b in merged.labels):
                continue
            try_join(merged, a, b)
        if rng.random() < 0.35:
            a, b = rng.sample(range(1, k + 1), 2)
            if a in merged.labels or rng.random() < 0.1:
                nodes.append(Relabel(a, b, merged.root))
                merged.root = len(nodes) - 1
                if a in merged.labels:
                    merged.labels.setdefault(b, set()).update(merged.labels.pop(a))
    expr = CliqueExpression(tuple(nodes), len(nodes) - 1, k)
    graph = LabeledGraph(tuple(frozenset(s) for s in adj), (1,) * n, 1)
    if graph.induced_components(range(n)) != 1:
        return None
    return expr


def expression_from_nodes(nodes: Iterable[ExprNode], k: int) -> CliqueExpression:
    """Wrap a node list whose last node is the root."""
    nodes = tuple(nodes)
    return CliqueExpression(nodes, len(nodes) - 1, k)
