"""Labeled graphs, cost and weight functions, and weight sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledGraph:
    """Undirected simple graph on vertices 0..n-1 with a label per vertex.

    ``adj[v]`` is the neighbor set of v and ``labels[v]`` its label in [1..k].
    """

    adj: tuple[frozenset[int], ...]
    labels: tuple[int, ...]
    k: int

    def __post_init__(self):
        n = len(self.adj)
        if len(self.labels) != n:
            raise GraphError("label list length differs from vertex count")
        for v, nbrs in enumerate(self.adj):
            if v in nbrs:
                raise GraphError(f"self-loop at vertex {v}")
            for u in nbrs:
                if not 0 <= u < n or v not in self.adj[u]:
                    raise GraphError(f"asymmetric or out-of-range edge {v}-{u}")
        for v, lab in enumerate(self.labels):
            if not 1 <= lab <= self.k:
                raise GraphError(f"label {lab} of vertex {v} outside [1..{self.k}]")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[int] | None = None, k: int | None = None) -> "LabeledGraph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {u}-{v} references a missing vertex")
            nbrs[u].add(v)
            nbrs[v].add(u)
        labs = tuple(labels) if labels is not None else (1,) * n
        if k is None:
            k = max(labs, default=1)
        return cls(tuple(frozenset(s) for s in nbrs), labs, k)

    @property
    def n(self) -> int:
        return len(self.adj)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self.adj[u]) if u < v]

    @property
    def m(self) -> int:
        return sum(len(s) for s in self.adj) // 2

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def induced_components(self, subset: Iterable[int]) -> int:
        """Number of connected components of the subgraph induced by ``subset``."""
        inside = set(subset)
        seen: set[int] = set()
        count = 0
        for s in inside:
            if s in seen:
                continue
            count += 1
            seen.add(s)
            stack = [s]
            while stack:
                x = stack.pop()
                for y in self.adj[x]:
                    if y in inside and y not in seen:
                        seen.add(y)
                        stack.append(y)
        return count


def connected_components(graph: LabeledGraph) -> int:
    return graph.induced_components(range(graph.n))


def is_connected(graph: LabeledGraph) -> bool:
    return graph.n >= 1 and connected_components(graph) == 1


# -- costs -----------------------------------------------------------------

DEFAULT_COST_EXPONENT = 3


def validate_costs(graph: LabeledGraph, costs: Sequence[int] | None,
                   cap_exponent: int = DEFAULT_COST_EXPONENT) -> tuple[int, ...]:
    """Return costs as a tuple; ``None`` means unit costs.

    Costs must be positive and their total at most n^cap_exponent.
    """
    n = graph.n
    if costs is None:
        return (1,) * n
    out = tuple(int(c) for c in costs)
    if len(out) != n:
        raise GraphError(f"expected {n} costs, got {len(out)}")
    if any(c < 1 for c in out):
        raise GraphError("costs must be positive integers")
    if n > 1 and sum(out) > n ** cap_exponent:
        raise GraphError(f"total cost {sum(out)} exceeds n^{cap_exponent} = {n ** cap_exponent}")
    return out


def validate_budget(budget: int) -> int:
    if budget < 0:
        raise GraphError("budget must be non-negative")
    return int(budget)


# -- weights ---------------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 generator (Steele, Lea, Flood); identical output on every platform."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next()
            if x < limit:
                return x % bound


def derive_seed(seed: int, *salt: int) -> int:
    """Mix a base seed with integer salts into an independent 64-bit seed."""
    rng = SplitMix64(seed)
    value = rng.next()
    for s in salt:
        rng = SplitMix64(value ^ (s & _MASK64))
        value = rng.next()
    return value


def sample_weights(graph: LabeledGraph, seed: int) -> tuple[int, ...]:
    """Independent uniform weights in [1, 2n], one per vertex."""
    n = graph.n
    if n == 0:
        raise GraphError("empty graph")
    rng = SplitMix64(seed)
    return tuple(1 + rng.below(2 * n) for _ in range(n))


# -- text format -----------------------------------------------------------

def parse_graph(text: str) -> LabeledGraph:
    """Parse ``p graph n m k`` / ``l v label`` / ``e u v`` lines."""
    header = None
    labels: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if len(parts) != 5 or parts[1] != "graph":
                    raise GraphError(f"line {lineno}: malformed header")
                header = tuple(int(x) for x in parts[2:])
            elif parts[0] == "l":
                v, lab = int(parts[1]), int(parts[2])
                if v in labels:
                    raise GraphError(f"line {lineno}: vertex {v} labeled twice")
                labels[v] = lab
            elif parts[0] == "e":
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise GraphError(f"line {lineno}: unknown record {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, GraphError):
                raise
            raise GraphError(f"line {lineno}: malformed record") from exc
    if header is None:
        raise GraphError("missing 'p graph' header")
    n, m, k = header
    labs = [labels.get(v, 1) for v in range(n)]
    if any(v >= n or v < 0 for v in labels):
        raise GraphError("label record for a missing vertex")
    g = LabeledGraph.from_edges(n, edges, labs, k)
    if g.m != m:
        raise GraphError(f"header declares {m} edges, found {g.m} distinct")
    return g


def format_graph(graph: LabeledGraph) -> str:
    lines = [f"p graph {graph.n} {graph.m} {graph.k}"]
    lines += [f"l {v} {lab}" for v, lab in enumerate(graph.labels)]
    lines += [f"e {u} {v}" for u, v in graph.edges()]
    return "\n".join(lines) + "\n"
