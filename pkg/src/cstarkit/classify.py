"""
Stable-isomorphism decisions.

Routes, tried in order by decide_pair:
    (a) two-vertex graphs with Condition (K): closed-form five-case test
    (b) both graphs with exactly one proper nontrivial ideal: K_six + Ext orbit
    (c) both graphs with a largest proper ideal that is AF: same machinery,
        quotient order dropped
    (d) both graphs simple: purely infinite vs AF split, (K0, K1) comparison

Anything outside these hypotheses is answered Unknown, never guessed.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from math import gcd
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from . import config
from .errors import ExactnessError, PreconditionError, ScopeError
from .extensions import ShortExactSequence, ses_isomorphic
from .graph import ExtNat, Graph, INF, format_ext, is_inf
from .groups import ConeTag, group_iso
from .ktheory import IndexMap, af_cone_tag, assemble_k_six, k_groups
from .structure import (
    CaseTag,
    breaking_vertices,
    case_tag,
    condition_K,
    corner_witness,
    has_cycle,
    ideal_lattice,
    ideal_subgraph,
    largest_proper_ideal,
    quotient_graph,
    unique_ideal_structure,
)
from .verdict import Answer, Verdict

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════
# Two-vertex parameters
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class TwoVertexParams:
    """Vertex matrix [[a, b], [c, d]] with vertices ordered so that c ≤ b."""
    a: ExtNat
    b: ExtNat
    c: ExtNat
    d: ExtNat
    swapped: bool = False

    @classmethod
    def from_graph(cls, g: Graph) -> "TwoVertexParams":
        if g.n != 2:
            raise PreconditionError(f"expected a two-vertex graph, got {g.n} vertices")
        (a, b), (c, d) = g.mult
        if c > b:
            return cls(d, c, b, a, swapped=True)
        return cls(a, b, c, d)

    def to_dict(self) -> dict:
        return {
            "a": format_ext(self.a),
            "b": format_ext(self.b),
            "c": format_ext(self.c),
            "d": format_ext(self.d),
            "swapped": self.swapped,
        }


def _in_unique_ideal_family(P: TwoVertexParams) -> bool:
    if P.c != 0 or P.b == 0 or 1 in (P.a, P.d):
        return False
    if P.a == 0 and not is_inf(P.b):
        return False
    return not is_inf(P.b) or P.a in (0, INF)


# ═══════════════════════════════════════════════════════════════════════
# Unit congruences
# ═══════════════════════════════════════════════════════════════════════

def _units(m: int) -> List[int]:
    return [z for z in range(m) if gcd(z, m) == 1]


def unit_orbit_eq(b: int, b2: int, m: int) -> Tuple[bool, Optional[int]]:
    """Is b ≡ z·b2 (mod m) for a unit z? m = 0 means Z, whose units are ±1."""
    if m < 0:
        raise PreconditionError("modulus must be nonnegative")
    if m == 0:
        witness = next((z for z in (1, -1) if b == z * b2), None)
        shortcut = abs(b) == abs(b2)
    else:
        witness = next((z for z in _units(m) if (b - z * b2) % m == 0), None)
        shortcut = gcd(b, m) == gcd(b2, m)
    if (witness is not None) != shortcut:
        raise ExactnessError(f"unit enumeration and gcd test disagree on ({b}, {b2}, {m})")
    return witness is not None, witness


def decide_theorem_5_1(P: TwoVertexParams, P2: TwoVertexParams) -> Verdict:
    """Unique-ideal two-vertex graphs [[a, b], [0, d]]."""
    route = "unique ideal congruence"
    for Q in (P, P2):
        if not _in_unique_ideal_family(Q):
            raise PreconditionError(f"{Q.to_dict()} is not a unique-ideal two-vertex matrix")
    if P.a != P2.a:
        return Verdict.no(route, condition="a = a'", left=format_ext(P.a), right=format_ext(P2.a))
    if P.d != P2.d:
        return Verdict.no(route, condition="d = d'", left=format_ext(P.d), right=format_ext(P2.d))

    a, d = P.a, P.d
    if a in (0, INF):
        # K0 of the quotient is free, so every extension splits.
        return Verdict.yes(route, condition="a in {0, inf}")
    if is_inf(P.b) or is_inf(P2.b):
        raise PreconditionError("b = inf requires a in {0, inf}")
    b, b2 = int(P.b), int(P2.b)

    if d in (0, INF):
        ok, z = unit_orbit_eq(b, b2, a - 1)
        if ok:
            return Verdict.yes(route, condition="[b] = [z][b'] mod a-1", z=z)
        return Verdict.no(route, condition="[b] = [z][b'] mod a-1", b=b, b_prime=b2, modulus=a - 1)

    g = gcd(a - 1, d - 1)
    if (a - 1) * (d - 1) > config.MAX_UNIT_PAIRS:
        return Verdict.unknown(f"{route}: unit-pair search exceeds {config.MAX_UNIT_PAIRS}")
    found = None
    for z1 in _units(d - 1):
        for z2 in _units(a - 1):
            if (z1 * b - z2 * b2) % g == 0:
                found = (z1, z2)
                break
        if found:
            break
    shortcut, _ = unit_orbit_eq(b, b2, g)
    if (found is not None) != shortcut:
        raise ExactnessError(f"unit-pair search and gcd test disagree on b={b}, b'={b2}, g={g}")
    if found:
        return Verdict.yes(route, condition="[z1][b] = [z2][b'] mod gcd(a-1, d-1)", z1=found[0], z2=found[1])
    return Verdict.no(route, condition="[z1][b] = [z2][b'] mod gcd(a-1, d-1)", b=b, b_prime=b2, modulus=g)


# ═══════════════════════════════════════════════════════════════════════
# Two-vertex classification
# ═══════════════════════════════════════════════════════════════════════

_CASE_LATTICE_SIZE = {"i": 2, "ii": 2, "iii": 3, "iv": 4, "v": 4}


def two_vertex_case(P: TwoVertexParams) -> Optional[str]:
    a, b, c, d = P.a, P.b, P.c, P.d
    if b == 0 and c == 0:
        return "v"
    if c == 0 and a == 0 and d == 0 and not is_inf(b):
        return "ii"
    if (b != 0 and c != 0) or (c == 0 and a == 0 and not is_inf(b) and d >= 2):
        return "i"
    if c == 0 and is_inf(b) and not is_inf(a) and a >= 2:
        return "iv"
    if _in_unique_ideal_family(P):
        return "iii"
    return None


def decide_two_vertex(g: Graph, g2: Graph) -> Verdict:
    if g.n != 2 or g2.n != 2:
        raise PreconditionError("both graphs must have exactly two vertices")
    if not condition_K(g) or not condition_K(g2):
        raise ScopeError("Condition (K) fails")
    P, P2 = TwoVertexParams.from_graph(g), TwoVertexParams.from_graph(g2)
    cases = []
    for graph, Q in ((g, P), (g2, P2)):
        case = two_vertex_case(Q)
        size = ideal_lattice(graph).size
        if case is None or _CASE_LATTICE_SIZE[case] != size:
            logger.warning("Matrix pattern %s and lattice size %d disagree", Q.to_dict(), size)
            return Verdict.unknown("pattern/lattice anomaly")
        cases.append(case)

    route = f"two-vertex case ({cases[0]})"
    if cases[0] != cases[1]:
        return Verdict.no("two-vertex cases", case_left=cases[0], case_right=cases[1])
    case = cases[0]

    if case == "i":
        K, K2 = k_groups(g), k_groups(g2)
        if group_iso(K[0], K2[0]) and group_iso(K[1], K2[1]):
            return Verdict.yes(route, k0=K[0].to_dict(), k1=K[1].to_dict())
        return Verdict.no(
            route,
            mismatch="(coker, ker)",
            left=[K[0].to_dict(), K[1].to_dict()],
            right=[K2[0].to_dict(), K2[1].to_dict()],
        )
    if case == "ii":
        # Both are matrix algebras over C, stably the compacts.
        return Verdict.yes(route, b=format_ext(P.b), b_prime=format_ext(P2.b))
    if case == "iii":
        return decide_theorem_5_1(P, P2).with_route(f"{route}: unique ideal congruence")
    if case == "iv":
        if P.a == P2.a and P.d == P2.d:
            return Verdict.yes(route, a=format_ext(P.a), d=format_ext(P.d))
        return Verdict.no(route, condition="a = a' and d = d'", left=P.to_dict(), right=P2.to_dict())
    if sorted([P.a, P.d]) == sorted([P2.a, P2.d]):
        return Verdict.yes(route, diagonal=[format_ext(P.a), format_ext(P.d)], swapped=P.a != P2.a)
    return Verdict.no(route, condition="{a, d} = {a', d'}", left=P.to_dict(), right=P2.to_dict())


# ═══════════════════════════════════════════════════════════════════════
# General routes
# ═══════════════════════════════════════════════════════════════════════

def graphs_isomorphic(g: Graph, g2: Graph) -> Optional[Tuple[str, ...]]:
    """A vertex bijection carrying g onto g2, as the image order of g2's vertices."""
    if g.n != g2.n or g.n > config.MAX_ISOMORPHISM_VERTICES:
        return None
    for perm in itertools.permutations(g.vertices):
        if g.reordered(perm).mult == g2.mult:
            return perm
    return None


def _sequence(g: Graph, H, ideal_cone: ConeTag, quotient_cone: ConeTag) -> Optional[ShortExactSequence]:
    k = assemble_k_six(g, H)
    if k.index_map != IndexMap.ZERO:
        return None
    return ShortExactSequence(k.i0, k.p0, ideal_cone, quotient_cone)


def decide_unique_ideal(g: Graph, g2: Graph) -> Verdict:
    route = "unique ideal K_six"
    u, u2 = unique_ideal_structure(g), unique_ideal_structure(g2)
    if u is None or u2 is None:
        raise PreconditionError("both graphs need exactly one proper nontrivial ideal")
    tag, tag2 = case_tag(g, u.H), case_tag(g2, u2.H)
    if tag != tag2:
        return Verdict.no(route, mismatch="case tags", left=tag.value, right=tag2.value)

    sequences = []
    for graph, H in ((g, u.H), (g2, u2.H)):
        # Ideal and quotient are simple here.
        S = _sequence(
            graph,
            H,
            _simple_cone(ideal_subgraph(graph, H)),
            _simple_cone(quotient_graph(graph, H)),
        )
        if S is None:
            return Verdict.unknown(f"{route}: K1 of the quotient is nonzero; index map not computed")
        sequences.append(S)

    v = ses_isomorphic(*sequences)
    route = f"{route} {tag.value}"
    if tag == CaseTag.AF_AF and v.answer == Answer.YES:
        perm = graphs_isomorphic(g, g2)
        if perm is None:
            return Verdict.unknown(f"{route}: middle order not verified in case [11]")
        return Verdict.yes(route, graph_isomorphism=list(perm), case_tag=tag.value)
    if v.answer == Answer.YES:
        return Verdict.yes(route, case_tag=tag.value, **v.witness)
    return v.with_route(f"{route}: {v.route}")


def _simple_cone(g: Graph) -> ConeTag:
    return ConeTag.trivial() if has_cycle(g) else af_cone_tag(g)


def decide_largest_af_ideal(g: Graph, g2: Graph) -> Verdict:
    route = "largest AF ideal"
    sequences, corners = [], []
    for graph in (g, g2):
        top = largest_proper_ideal(graph)
        if top is None or not top.H:
            raise PreconditionError("no nonzero largest proper ideal")
        if top.S or breaking_vertices(graph, top.H):
            return Verdict.unknown(f"{route}: breaking vertices present; desingularization not supported")
        sub = ideal_subgraph(graph, top.H)
        if has_cycle(sub):
            return Verdict.unknown(f"{route}: largest ideal is not AF")
        if not has_cycle(quotient_graph(graph, top.H)):
            return Verdict.unknown(f"{route}: algebra is AF; dimension groups not supported")
        # Only K0 of the ideal is ordered.
        S = _sequence(graph, top.H, af_cone_tag(sub), ConeTag.trivial())
        if S is None:
            return Verdict.unknown(f"{route}: K1 of the quotient is nonzero; index map not computed")
        sequences.append(S)
        corners.append(corner_witness(graph, top.H).to_dict())

    v = ses_isomorphic(*sequences)
    if v.answer == Answer.YES:
        return Verdict.yes(route, corners=corners, **v.witness)
    return v.with_route(f"{route}: {v.route}")


def decide_simple(g: Graph, g2: Graph) -> Verdict:
    route = "simple"
    pi, pi2 = has_cycle(g), has_cycle(g2)
    if pi != pi2:
        return Verdict.no(route, mismatch="purely infinite vs AF", left_purely_infinite=pi, right_purely_infinite=pi2)
    if not pi:
        # A simple finite AF graph algebra is a matrix algebra.
        return Verdict.yes(f"{route} AF", stably="compact operators")
    K, K2 = k_groups(g), k_groups(g2)
    if group_iso(K[0], K2[0]) and group_iso(K[1], K2[1]):
        return Verdict.yes(f"{route} purely infinite", k0=K[0].to_dict(), k1=K[1].to_dict())
    return Verdict.no(
        f"{route} purely infinite",
        mismatch="(K0, K1)",
        left=[K[0].to_dict(), K[1].to_dict()],
        right=[K2[0].to_dict(), K2[1].to_dict()],
    )


def decide_pair(g: Graph, g2: Graph) -> Verdict:
    try:
        return _decide_pair(g, g2)
    except ScopeError as exc:
        return Verdict.unknown(f"out of scope: {exc}")


def _decide_pair(g: Graph, g2: Graph) -> Verdict:
    if not condition_K(g) or not condition_K(g2):
        return Verdict.unknown("Condition (K) fails")
    if g.n == 2 and g2.n == 2:
        return decide_two_vertex(g, g2)

    L, L2 = ideal_lattice(g), ideal_lattice(g2)
    if L.size != L2.size:
        return Verdict.no("ideal lattices", mismatch="ideal lattices differ", left=L.size, right=L2.size)

    if unique_ideal_structure(g) and unique_ideal_structure(g2):
        return decide_unique_ideal(g, g2)

    tops = [largest_proper_ideal(x) for x in (g, g2)]
    if all(t is not None and t.H for t in tops):
        if all(not has_cycle(ideal_subgraph(x, t.H)) for x, t in zip((g, g2), tops)):
            return decide_largest_af_ideal(g, g2)

    if L.size == 2:
        return decide_simple(g, g2)
    return Verdict.unknown("no decision route applies")


# ═══════════════════════════════════════════════════════════════════════
# Batch
# ═══════════════════════════════════════════════════════════════════════

def classify_many(
    pairs: Sequence[Tuple[Graph, Graph]],
    workers: Optional[int] = None,
    decide: Callable[[Graph, Graph], Verdict] = decide_pair,
    progress: bool = False,
) -> List[Verdict]:
    """Decide many pairs concurrently; results keep the input order."""
    workers = workers or config.MANIFEST_WORKERS
    results: Dict[int, Verdict] = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(decide, g, g2): idx for idx, (g, g2) in enumerate(pairs)}
        with tqdm(total=len(futures), desc="Classifying pairs", disable=not progress) as pbar:
            for fut in as_completed(futures):
                results[futures[fut]] = fut.result()
                pbar.update(1)
    return [results[i] for i in range(len(pairs))]
