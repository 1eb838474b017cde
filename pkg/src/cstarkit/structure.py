"""
Structure: hereditary/saturated vertex sets, the admissible-pair lattice,
Condition (K), subgraphs and quotients, and the constructive witnesses
(cycle with an entry into H, path families entering H, corner skeleton).
"""

from __future__ import annotations

import enum
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import config
from .errors import ExactnessError, PreconditionError, ScopeError
from .graph import (
    Graph,
    VertexSet,
    classify_vertices,
    ext_sum,
    is_inf,
    reachable_set,
)

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════
# Domain types
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class AdmissiblePair:
    """(H, S): saturated hereditary H and S ⊆ B_H."""
    H: VertexSet
    S: VertexSet = frozenset()

    def __le__(self, other: "AdmissiblePair") -> bool:
        return self.H <= other.H and self.S <= (other.H | other.S)

    def __lt__(self, other: "AdmissiblePair") -> bool:
        return self <= other and self != other

    def to_dict(self, g: Graph) -> dict:
        return {"H": g.ordered(self.H), "S": g.ordered(self.S)}


@dataclass(frozen=True)
class IdealLattice:
    pairs: Tuple[AdmissiblePair, ...]
    vertices: FrozenSet[str]

    @property
    def size(self) -> int:
        return len(self.pairs)

    @property
    def bottom(self) -> AdmissiblePair:
        return AdmissiblePair(frozenset(), frozenset())

    @property
    def top(self) -> AdmissiblePair:
        return AdmissiblePair(self.vertices, frozenset())

    def proper(self) -> List[AdmissiblePair]:
        return [p for p in self.pairs if p != self.top]

    def check_order(self) -> None:
        """Verify the admissible-pair order is a partial order with bottom and top."""
        if self.bottom not in self.pairs or self.top not in self.pairs:
            raise ExactnessError("ideal lattice is missing its bottom or top")
        for p in self.pairs:
            if not (self.bottom <= p <= self.top):
                raise ExactnessError(f"{p} lies outside [bottom, top]")
        for p, q in itertools.product(self.pairs, repeat=2):
            if p <= q and q <= p and p != q:
                raise ExactnessError(f"order not antisymmetric on {p}, {q}")
        for p, q, r in itertools.product(self.pairs, repeat=3):
            if p <= q and q <= r and not p <= r:
                raise ExactnessError(f"order not transitive on {p}, {q}, {r}")

    def to_dict(self, g: Graph) -> dict:
        return {
            "size": self.size,
            "pairs": [p.to_dict(g) for p in self.pairs],
        }


class CaseTag(str, enum.Enum):
    """Ideal/quotient type: 1 for AF, ∞ for Kirchberg."""
    AF_AF = "[11]"
    AF_PI = "[1∞]"
    PI_AF = "[∞1]"
    PI_PI = "[∞∞]"

    @property
    def ideal_is_af(self) -> bool:
        return self in (CaseTag.AF_AF, CaseTag.AF_PI)

    @property
    def quotient_is_af(self) -> bool:
        return self in (CaseTag.AF_AF, CaseTag.PI_AF)


@dataclass(frozen=True)
class CycleWitness:
    cycle: Tuple[str, ...]            # base repeated at the end
    entry_edge: Tuple[str, str]

    @property
    def base(self) -> str:
        return self.cycle[0]

    def to_dict(self) -> dict:
        return {"cycle": list(self.cycle), "entry_edge": list(self.entry_edge)}


@dataclass(frozen=True)
class ConditionK:
    """Condition (K) with simple-cycle counts per vertex, capped at 2."""
    holds: bool
    counts: Dict[str, int]

    def __bool__(self) -> bool:
        return self.holds

    def failing(self) -> List[str]:
        return [v for v, c in self.counts.items() if c == 1]


@dataclass(frozen=True)
class UniqueIdealStructure:
    H: VertexSet
    checks: Dict[str, bool]

    def to_dict(self, g: Graph) -> dict:
        return {"H": g.ordered(self.H), "checks": dict(self.checks)}


@dataclass(frozen=True)
class EntranceFamily:
    """F_H: paths starting outside H that enter H exactly at their last vertex."""
    infinite: bool
    cycle: Optional[Tuple[str, ...]] = None         # cycle outside H whose vertices reach H
    infinite_edge: Optional[Tuple[str, str]] = None  # ∞ bundle among vertices reaching H
    count: Optional[int] = None                      # |F_H| when finite

    def to_dict(self) -> dict:
        return {
            "infinite": self.infinite,
            "cycle": list(self.cycle) if self.cycle else None,
            "infinite_edge": list(self.infinite_edge) if self.infinite_edge else None,
            "count": self.count,
        }


@dataclass(frozen=True)
class CornerWitness:
    """Skeleton of the full-corner argument: p = p_v + p_w with v = s(f), w = r(f)."""
    v: str
    w: str
    cycle: CycleWitness
    # E_H is acyclic, so the only path from w back to w is trivial.
    ideal_subgraph_acyclic: bool
    # λⁿ = γⁿ f are pairwise distinct paths v → w of these lengths.
    family_lengths: Tuple[int, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "w": self.w,
            "cycle": self.cycle.to_dict(),
            "ideal_subgraph_acyclic": self.ideal_subgraph_acyclic,
            "family_lengths": list(self.family_lengths),
        }


# ═══════════════════════════════════════════════════════════════════════
# Hereditary and saturated sets
# ═══════════════════════════════════════════════════════════════════════

def is_hereditary(g: Graph, X: VertexSet) -> bool:
    X = g.check_subset(X)
    return all(w in X for v in X for w in g.successors(v))


def is_saturated(g: Graph, X: VertexSet) -> bool:
    X = g.check_subset(X)
    regular = classify_vertices(g).regular
    for v in regular:
        if v not in X and all(w in X for w in g.successors(v)):
            return False
    return True


def hereditary_closure(g: Graph, X: VertexSet) -> VertexSet:
    X = g.check_subset(X)
    out = set()
    for v in X:
        out |= reachable_set(g, v)
    return frozenset(out)


def saturate(g: Graph, X: VertexSet) -> VertexSet:
    """Smallest saturated hereditary superset of a hereditary X."""
    X = g.check_subset(X)
    if not is_hereditary(g, X):
        raise PreconditionError(f"saturate needs a hereditary set, got {g.ordered(X)}")
    regular = classify_vertices(g).regular
    current = set(X)
    changed = True
    while changed:
        changed = False
        for v in g.vertices:
            if v in regular and v not in current and all(w in current for w in g.successors(v)):
                current.add(v)
                changed = True
    return frozenset(current)


def _canonical_key(g: Graph, X: VertexSet) -> Tuple[int, Tuple[int, ...]]:
    return (len(X), tuple(sorted(g.index(v) for v in X)))


def saturated_hereditary_sets(g: Graph) -> List[VertexSet]:
    """All saturated hereditary subsets in (size, then lexicographic) order.

    Hereditary sets are exactly the unions of principal sets reach(v), so
    those are generated first and then filtered by saturation.
    """
    if g.n > config.MAX_VERTICES:
        raise ScopeError(
            f"{g.n} vertices exceeds the enumeration bound {config.MAX_VERTICES} "
            f"(set {config.MAX_VERTICES_ENV} to raise it)"
        )
    bit = {v: 1 << i for i, v in enumerate(g.vertices)}
    reach_mask = {}
    for v in g.vertices:
        reach_mask[v] = sum(bit[w] for w in reachable_set(g, v))
    succ_mask = {v: sum(bit[w] for w in g.successors(v)) for v in g.vertices}
    regular = classify_vertices(g).regular

    family = {0}
    for v in g.vertices:
        family |= {S | reach_mask[v] for S in family}

    out = []
    for S in family:
        if any(
            not (S & bit[v]) and (succ_mask[v] & ~S) == 0
            for v in regular
        ):
            continue
        out.append(frozenset(v for v in g.vertices if S & bit[v]))
    out.sort(key=lambda X: _canonical_key(g, X))
    logger.debug("Found %d saturated hereditary sets", len(out))
    return out


def breaking_vertices(g: Graph, H: VertexSet) -> VertexSet:
    H = g.check_subset(H)
    if not (is_hereditary(g, H) and is_saturated(g, H)):
        raise PreconditionError(f"{g.ordered(H)} is not saturated hereditary")
    out = set()
    for v in g.vertices:
        if not is_inf(g.out_degree(v)):
            continue
        escape = ext_sum(g.m(v, w) for w in g.vertices if w not in H)
        if not is_inf(escape) and escape > 0:
            out.add(v)
    return frozenset(out)


def ideal_lattice(g: Graph) -> IdealLattice:
    """All admissible pairs, grouped by H (canonical order) then S."""
    pairs = []
    for H in saturated_hereditary_sets(g):
        B = g.ordered(breaking_vertices(g, H))
        subsets = [frozenset(c) for k in range(len(B) + 1) for c in itertools.combinations(B, k)]
        for S in subsets:
            pairs.append(AdmissiblePair(H, S))
    lattice = IdealLattice(tuple(pairs), frozenset(g.vertices))
    lattice.check_order()
    logger.info("Ideal lattice has %d admissible pairs", lattice.size)
    return lattice


def hasse_diagram(lattice: IdealLattice) -> List[Tuple[int, int]]:
    """Covering pairs (i, j): pairs[i] < pairs[j] with nothing strictly between."""
    P = lattice.pairs
    covers = []
    for i, j in itertools.permutations(range(len(P)), 2):
        if P[i] < P[j] and not any(P[i] < P[k] < P[j] for k in range(len(P))):
            covers.append((i, j))
    covers.sort()
    return covers


# ═══════════════════════════════════════════════════════════════════════
# Cycles and Condition (K)
# ═══════════════════════════════════════════════════════════════════════

def _cap(x) -> int:
    return 2 if is_inf(x) or x >= 2 else int(x)


def _graph_has_cycle(g: Graph, among: Sequence[str]) -> bool:
    among = set(among)
    color = {v: 0 for v in among}

    def visit(u) -> bool:
        color[u] = 1
        for w in g.successors(u):
            if w not in among:
                continue
            if color[w] == 1:
                return True
            if color[w] == 0 and visit(w):
                return True
        color[u] = 2
        return False

    return any(color[v] == 0 and visit(v) for v in g.ordered(among))


def has_cycle(g: Graph) -> bool:
    return _graph_has_cycle(g, g.vertices)


def simple_cycle_count(g: Graph, v: str) -> int:
    """Number of simple cycles based at v (edge sequences returning to v once), capped at 2."""
    others = [u for u in g.vertices if u != v]
    # Vertices reachable from v's successors and co-reachable to v, avoiding v in between.
    fwd = set()
    queue = deque(u for u in g.successors(v) if u != v)
    fwd.update(queue)
    while queue:
        u = queue.popleft()
        for w in g.successors(u):
            if w != v and w not in fwd:
                fwd.add(w)
                queue.append(w)
    back = set()
    queue = deque(u for u in g.predecessors(v) if u != v)
    back.update(queue)
    while queue:
        u = queue.popleft()
        for w in g.predecessors(u):
            if w != v and w not in back:
                back.add(w)
                queue.append(w)
    relevant = [u for u in others if u in fwd and u in back]

    total = _cap(g.m(v, v))
    if not relevant:
        return total
    if _graph_has_cycle(g, relevant):
        return 2

    memo: Dict[str, int] = {}

    def paths_home(u: str) -> int:
        if u in memo:
            return memo[u]
        count = _cap(g.m(u, v))
        for w in g.successors(u):
            if w in relevant:
                count = min(2, count + _cap(g.m(u, w)) * paths_home(w))
        memo[u] = count
        return count

    for u in relevant:
        if g.m(v, u) != 0:
            total = min(2, total + _cap(g.m(v, u)) * paths_home(u))
    return total


def condition_K(g: Graph) -> ConditionK:
    counts = {v: simple_cycle_count(g, v) for v in g.vertices}
    holds = all(c != 1 for c in counts.values())
    if not holds:
        logger.info("Condition (K) fails at %s", [v for v, c in counts.items() if c == 1])
    return ConditionK(holds, counts)


# ═══════════════════════════════════════════════════════════════════════
# Subgraphs
# ═══════════════════════════════════════════════════════════════════════

def _require_saturated_hereditary(g: Graph, H: VertexSet) -> VertexSet:
    H = g.check_subset(H)
    if not (is_hereditary(g, H) and is_saturated(g, H)):
        raise PreconditionError(f"{g.ordered(H)} is not saturated hereditary")
    return H


def quotient_graph(g: Graph, H: VertexSet) -> Graph:
    """E∖H: vertices outside H, every edge into H deleted."""
    H = _require_saturated_hereditary(g, H)
    if H == frozenset(g.vertices):
        raise PreconditionError("quotient by H = E^0 has no vertices")
    return g.induced(v for v in g.vertices if v not in H)


def ideal_subgraph(g: Graph, H: VertexSet) -> Graph:
    """E_H: vertices H and every edge with source in H."""
    H = g.check_subset(H)
    if not H or not is_hereditary(g, H):
        raise PreconditionError(f"{g.ordered(H)} is not a nonempty hereditary set")
    sub = g.induced(H)
    for v in H:
        if ext_sum(g.mult[g.index(v)]) != ext_sum(sub.mult[sub.index(v)]):
            raise ExactnessError(f"edges from {v} leave the hereditary set")
    return sub


# ═══════════════════════════════════════════════════════════════════════
# Ideal structure
# ═══════════════════════════════════════════════════════════════════════

def unique_ideal_structure(g: Graph) -> Optional[UniqueIdealStructure]:
    """H with the six structural checks when C*(E) has exactly one proper nontrivial ideal."""
    K = condition_K(g)
    if not K:
        return None
    sh = saturated_hereditary_sets(g)
    if len(sh) != 3:
        return None
    H = sh[1]
    if breaking_vertices(g, H):
        return None

    meets_H = all(reachable_set(g, x) & H for x in g.vertices)
    sinks = classify_vertices(g).sinks
    sink_ok = len(sinks) <= 1 and sinks <= H
    checks = {
        "condition_K": True,
        "three_saturated_hereditary_sets": True,
        "no_breaking_vertices": True,
        "gauge_invariant_ideal_is_I_H": True,
        "hereditary_sets_meet_H": meets_H,
        "at_most_one_sink_in_H": sink_ok,
    }
    if not (meets_H and sink_ok):
        raise ExactnessError(f"unique-ideal consequences fail for H={g.ordered(H)}: {checks}")
    return UniqueIdealStructure(H, checks)


def largest_proper_ideal(g: Graph) -> Optional[AdmissiblePair]:
    if not condition_K(g):
        raise ScopeError("Condition (K) fails; ideals beyond the gauge-invariant ones are not enumerable")
    lattice = ideal_lattice(g)
    proper = lattice.proper()
    for p in proper:
        if all(q <= p for q in proper):
            return p
    return None


def is_largest_saturated(g: Graph, H: VertexSet) -> bool:
    """Every saturated hereditary K satisfies K ⊆ H or K = E^0."""
    everything = frozenset(g.vertices)
    return H != everything and all(K <= H or K == everything for K in saturated_hereditary_sets(g))


def case_tag(g: Graph, H: VertexSet) -> CaseTag:
    H = _require_saturated_hereditary(g, H)
    if not H or H == frozenset(g.vertices):
        raise PreconditionError("case_tag needs a proper nontrivial H")
    ideal_pi = has_cycle(ideal_subgraph(g, H))
    quot_pi = has_cycle(quotient_graph(g, H))
    return {
        (False, False): CaseTag.AF_AF,
        (False, True): CaseTag.AF_PI,
        (True, False): CaseTag.PI_AF,
        (True, True): CaseTag.PI_PI,
    }[(ideal_pi, quot_pi)]


# ═══════════════════════════════════════════════════════════════════════
# Witnesses
# ═══════════════════════════════════════════════════════════════════════

def _shortest_path(g: Graph, start: str, targets, allowed=None) -> Optional[List[str]]:
    """BFS path of length ≥ 1 from start to the nearest vertex of `targets`.

    Intermediate vertices are restricted to `allowed` when given.
    """
    targets = set(targets)
    parent: Dict[str, Optional[str]] = {}
    if start not in targets:
        parent[start] = None
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in g.successors(u):
            if w in parent:
                continue
            parent[w] = u
            if w in targets:
                path = [w]
                node = u
                while True:
                    path.append(node)
                    if node == start:
                        break
                    node = parent[node]
                return list(reversed(path))
            if allowed is None or w in allowed:
                queue.append(w)
    return None


def _check_cycle_witness(g: Graph, H: VertexSet, wit: CycleWitness) -> None:
    cyc = wit.cycle
    if len(cyc) < 2 or cyc[0] != cyc[-1]:
        raise ExactnessError(f"cycle {cyc} is not closed")
    for a, b in zip(cyc, cyc[1:]):
        if g.m(a, b) == 0:
            raise ExactnessError(f"cycle step {a} -> {b} has no edge")
    if any(x in H for x in cyc):
        raise ExactnessError("cycle meets H")
    s, r = wit.entry_edge
    if s != wit.base or r not in H or g.m(s, r) == 0:
        raise ExactnessError(f"entry edge {wit.entry_edge} does not leave the base into H")
    for x in g.vertices:
        if (wit.base in reachable_set(g, x)) != (x not in H):
            raise ExactnessError(f"reachability biconditional fails at {x}")


def cycle_with_entry(g: Graph, H: VertexSet) -> CycleWitness:
    """Cycle γ in E∖H with an edge f from its base into H.

    Built by taking a cycle α in E∖H, a shortest path μ from s(α) into H,
    and re-basing the cycle at the last vertex of μ outside H.
    """
    H = _require_saturated_hereditary(g, H)
    if not is_largest_saturated(g, H):
        raise PreconditionError(f"{g.ordered(H)} is not the H of a largest proper ideal")
    outside = [v for v in g.vertices if v not in H]
    quotient = g.induced(outside)
    alpha = None
    for v in outside:
        loop = _shortest_path(quotient, v, [v])
        if loop is not None:
            alpha = loop
            break
    if alpha is None:
        raise PreconditionError("quotient graph has no cycle")

    mu = _shortest_path(g, alpha[0], H)
    if mu is None:
        raise ExactnessError(f"no path from {alpha[0]} into H")
    base = mu[-2]
    if base == alpha[0]:
        gamma = alpha
    else:
        nu = _shortest_path(quotient, base, [alpha[0]])
        if nu is None:
            raise ExactnessError(f"{base} does not return to {alpha[0]}")
        gamma = nu + mu[1:-1]
    wit = CycleWitness(tuple(gamma), (base, mu[-1]))
    _check_cycle_witness(g, H, wit)
    return wit


def entrance_paths(g: Graph, H: VertexSet) -> EntranceFamily:
    """Decide whether F_H is infinite, with a certificate when it is."""
    H = g.check_subset(H)
    relevant = [x for x in g.vertices if x not in H and reachable_set(g, x) & H]
    rel = set(relevant)
    for x in relevant:
        for y in g.successors(x):
            if (y in H or y in rel) and is_inf(g.m(x, y)):
                return EntranceFamily(True, infinite_edge=(x, y))
    for x in relevant:
        loop = _shortest_path(g.induced(relevant), x, [x])
        if loop is not None:
            return EntranceFamily(True, cycle=tuple(loop))

    memo: Dict[str, int] = {}

    def count_from(x: str) -> int:
        if x not in memo:
            memo[x] = sum(g.m(x, y) for y in H) + sum(
                g.m(x, y) * count_from(y) for y in g.successors(x) if y in rel
            )
        return memo[x]

    return EntranceFamily(False, count=sum(count_from(x) for x in relevant))


def corner_witness(g: Graph, H: VertexSet) -> CornerWitness:
    """v = s(f), w = r(f) for the full corner p_v + p_w over an AF largest ideal."""
    H = _require_saturated_hereditary(g, H)
    if breaking_vertices(g, H):
        raise ScopeError("breaking vertices present")
    sub = ideal_subgraph(g, H)
    if has_cycle(sub):
        raise PreconditionError("ideal subgraph has a cycle; the ideal is not AF")
    wit = cycle_with_entry(g, H)
    period = len(wit.cycle) - 1
    return CornerWitness(
        v=wit.entry_edge[0],
        w=wit.entry_edge[1],
        cycle=wit,
        ideal_subgraph_acyclic=True,
        family_lengths=tuple(n * period + 1 for n in range(4)),
    )
