"""
Graph: finite directed graphs with edge multiplicities in {0, 1, 2, ...} ∪ {∞}.

Edges are never named individually; a graph is its ordered vertex list plus
the multiplicity table. Declaration order is the canonical order used by
every matrix presentation downstream.

Graph file format (UTF-8, line oriented):

    # comment
    vertices: v w
    edge v v 4
    edge v w inf
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import GraphParseError, PreconditionError

logger = logging.getLogger(__name__)

# ═══════════════════════════════════════════════════════════════════════
# Extended naturals
# ═══════════════════════════════════════════════════════════════════════

ExtNat = Union[int, float]
INF: float = math.inf

VertexSet = FrozenSet[str]


def is_inf(x: ExtNat) -> bool:
    return x == INF


def ext_sum(values: Iterable[ExtNat]) -> ExtNat:
    """Sum over extended naturals; any Infinity absorbs."""
    total = 0
    for x in values:
        if is_inf(x):
            return INF
        total += x
    return total


def format_ext(x: ExtNat) -> str:
    return "inf" if is_inf(x) else str(int(x))


def parse_ext(token: str) -> ExtNat:
    """Parse a multiplicity token: a decimal integer or `inf` / `∞`."""
    t = token.strip().lower()
    if t in ("inf", "∞", "infinity"):
        return INF
    if not t.lstrip("-").isdigit():
        raise ValueError(f"not a multiplicity: {token!r}")
    value = int(t)
    if value < 0:
        raise ValueError(f"negative multiplicity: {token!r}")
    return value


def _check_ext(x: ExtNat) -> ExtNat:
    if is_inf(x):
        return INF
    if isinstance(x, bool) or not isinstance(x, int):
        if isinstance(x, float) and x.is_integer():
            x = int(x)
        else:
            raise PreconditionError(f"multiplicity must be a nonnegative integer or INF, got {x!r}")
    if x < 0:
        raise PreconditionError(f"multiplicity must be nonnegative, got {x}")
    return x


# ═══════════════════════════════════════════════════════════════════════
# Graph
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Graph:
    """Finite directed graph given by vertex names and an edge-multiplicity table."""
    vertices: Tuple[str, ...]
    mult: Tuple[Tuple[ExtNat, ...], ...]

    def __post_init__(self):
        if not self.vertices:
            raise PreconditionError("a graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise PreconditionError(f"duplicate vertex names in {list(self.vertices)}")
        n = len(self.vertices)
        if len(self.mult) != n or any(len(row) != n for row in self.mult):
            raise PreconditionError(f"multiplicity table must be {n}x{n}")
        object.__setattr__(
            self, "mult", tuple(tuple(_check_ext(x) for x in row) for row in self.mult)
        )
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.vertices)})

    # ── Constructors ──────────────────────────────────────────────────

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[ExtNat]], names: Optional[Sequence[str]] = None) -> "Graph":
        n = len(rows)
        if names is None:
            names = default_names(n)
        return cls(tuple(names), tuple(tuple(r) for r in rows))

    @classmethod
    def from_edges(cls, vertices: Sequence[str], edges: Dict[Tuple[str, str], ExtNat]) -> "Graph":
        index = {v: i for i, v in enumerate(vertices)}
        table = [[0] * len(vertices) for _ in vertices]
        for (s, r), m in edges.items():
            table[index[s]][index[r]] = m
        return cls(tuple(vertices), tuple(tuple(row) for row in table))

    # ── Access ────────────────────────────────────────────────────────

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise PreconditionError(f"unknown vertex {v!r}; vertices are {list(self.vertices)}") from None

    def m(self, v: str, w: str) -> ExtNat:
        return self.mult[self.index(v)][self.index(w)]

    def out_degree(self, v: str) -> ExtNat:
        return ext_sum(self.mult[self.index(v)])

    def successors(self, v: str) -> List[str]:
        row = self.mult[self.index(v)]
        return [w for w, x in zip(self.vertices, row) if x != 0]

    def predecessors(self, v: str) -> List[str]:
        j = self.index(v)
        return [u for u, row in zip(self.vertices, self.mult) if row[j] != 0]

    def edges(self) -> List[Tuple[str, str, ExtNat]]:
        """Positive-multiplicity pairs in canonical order."""
        return [
            (v, w, x)
            for v, row in zip(self.vertices, self.mult)
            for w, x in zip(self.vertices, row)
            if x != 0
        ]

    def check_subset(self, X: Iterable[str]) -> VertexSet:
        X = frozenset(X)
        unknown = X.difference(self.vertices)
        if unknown:
            raise PreconditionError(f"unknown vertices {sorted(unknown)}; vertices are {list(self.vertices)}")
        return X

    def ordered(self, X: Iterable[str]) -> List[str]:
        """Members of X in canonical vertex order."""
        X = set(X)
        return [v for v in self.vertices if v in X]

    # ── Derived graphs ────────────────────────────────────────────────

    def induced(self, keep: Iterable[str]) -> "Graph":
        """Induced subgraph on `keep` (canonical order preserved)."""
        names = self.ordered(keep)
        idx = [self.index(v) for v in names]
        return Graph(tuple(names), tuple(tuple(self.mult[i][j] for j in idx) for i in idx))

    def reordered(self, order: Sequence[str]) -> "Graph":
        if sorted(order) != sorted(self.vertices):
            raise PreconditionError(f"{list(order)} is not a permutation of {list(self.vertices)}")
        idx = [self.index(v) for v in order]
        return Graph(tuple(order), tuple(tuple(self.mult[i][j] for j in idx) for i in idx))

    def __str__(self) -> str:
        return format_graph(self).strip()


def default_names(n: int) -> List[str]:
    """Vertex names for matrix shorthand: v, w for 2x2, v0..v{n-1} otherwise."""
    if n == 2:
        return ["v", "w"]
    if n == 1:
        return ["v"]
    return [f"v{i}" for i in range(n)]


# ═══════════════════════════════════════════════════════════════════════
# Derived data
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class VertexMatrix:
    vertices: Tuple[str, ...]
    entries: Tuple[Tuple[ExtNat, ...], ...]

    def to_list(self) -> List[List[ExtNat]]:
        return [list(row) for row in self.entries]

    def to_json(self) -> List[List[Union[int, str]]]:
        return [[x if not is_inf(x) else "inf" for x in row] for row in self.entries]


@dataclass(frozen=True)
class VertexClassification:
    sinks: VertexSet
    infinite_emitters: VertexSet
    regular: VertexSet
    singular: VertexSet
    row_finite: bool

    def to_dict(self, g: Graph) -> dict:
        return {
            "sinks": g.ordered(self.sinks),
            "infinite_emitters": g.ordered(self.infinite_emitters),
            "regular": g.ordered(self.regular),
            "singular": g.ordered(self.singular),
            "row_finite": self.row_finite,
        }


def vertex_matrix(g: Graph) -> VertexMatrix:
    return VertexMatrix(g.vertices, g.mult)


def classify_vertices(g: Graph) -> VertexClassification:
    sinks = frozenset(v for v, row in zip(g.vertices, g.mult) if all(x == 0 for x in row))
    emitters = frozenset(v for v, row in zip(g.vertices, g.mult) if any(is_inf(x) for x in row))
    singular = sinks | emitters
    regular = frozenset(g.vertices) - singular
    return VertexClassification(
        sinks=sinks,
        infinite_emitters=emitters,
        regular=regular,
        singular=singular,
        row_finite=not emitters,
    )


def reachable_set(g: Graph, v: str) -> VertexSet:
    """{w : v ≥ w}, including v itself."""
    g.index(v)
    seen = {v}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in g.successors(u):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return frozenset(seen)


def predecessor_set(g: Graph, v: str) -> VertexSet:
    """L(v) = {w : w ≥ v}, including v itself."""
    g.index(v)
    seen = {v}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in g.predecessors(u):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return frozenset(seen)


def is_left_infinite(g: Graph, v: str) -> bool:
    g.index(v)
    # Vertex sets are finite, so L(v) is finite.
    return False


# ═══════════════════════════════════════════════════════════════════════
# Parsing and serialization
# ═══════════════════════════════════════════════════════════════════════

def parse_graph(text: str) -> Graph:
    """Parse graph-file text. Errors carry the offending line number."""
    vertices: Optional[List[str]] = None
    edges: Dict[Tuple[str, str], ExtNat] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if line.startswith("vertices:") or line.startswith("vertices :"):
            if vertices is not None:
                raise GraphParseError("`vertices:` declared more than once", lineno)
            names = line.split(":", 1)[1].split()
            if not names:
                raise GraphParseError("empty vertex list", lineno)
            seen = set()
            for name in names:
                if name in seen:
                    raise GraphParseError(f"duplicate vertex {name!r}", lineno)
                seen.add(name)
            vertices = names
            continue

        parts = line.split()
        if parts[0] != "edge":
            raise GraphParseError(f"malformed line {raw.strip()!r}", lineno)
        if len(parts) != 4:
            raise GraphParseError("expected `edge <src> <dst> <mult>`", lineno)
        if vertices is None:
            raise GraphParseError("edge before `vertices:` declaration", lineno)
        _, src, dst, token = parts
        for name in (src, dst):
            if name not in vertices:
                raise GraphParseError(f"edge references undeclared vertex {name!r}", lineno)
        try:
            m = parse_ext(token)
        except ValueError as exc:
            raise GraphParseError(str(exc), lineno) from None
        if m == 0:
            raise GraphParseError("edge multiplicity must be at least 1", lineno)
        if (src, dst) in edges:
            raise GraphParseError(f"repeated edge line for {src} -> {dst}", lineno)
        edges[(src, dst)] = m

    if vertices is None:
        raise GraphParseError("missing `vertices:` declaration")

    g = Graph.from_edges(vertices, edges)
    logger.debug("Parsed graph with %d vertices and %d edge bundles", g.n, len(edges))
    return g


def parse_matrix(text: str) -> Graph:
    """Parse the CLI shorthand `"a,b;c,d"` (any square size, `inf` allowed)."""
    rows = [r for r in text.strip().split(";")]
    try:
        table = [[parse_ext(tok) for tok in r.split(",")] for r in rows]
    except ValueError as exc:
        raise GraphParseError(f"bad matrix shorthand {text!r}: {exc}") from None
    n = len(table)
    if any(len(r) != n for r in table):
        raise GraphParseError(f"matrix shorthand {text!r} is not square")
    return Graph.from_matrix(table)


def format_graph(g: Graph) -> str:
    """Canonical graph-file text; parse_graph(format_graph(g)) == g."""
    lines = ["vertices: " + " ".join(g.vertices)]
    for v, w, x in g.edges():
        lines.append(f"edge {v} {w} {format_ext(x)}")
    return "\n".join(lines) + "\n"
