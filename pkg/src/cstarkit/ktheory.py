"""
K-theory of graph algebras.

K0(C*(E)) = coker(B_E) and K1(C*(E)) = ker(B_E), where B_E is the
E^0 × E^0_reg submatrix of A_E^t − I. Gauge-invariant ideals I_H without
breaking vertices give the induced maps by coordinate inclusion Z^H ↪ Z^{E^0}
and coordinate projection Z^{E^0} ↠ Z^{E^0∖H}.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import ExactnessError, PreconditionError, ScopeError
from .graph import Graph, VertexSet, classify_vertices, is_inf
from .groups import ConeTag, FgAbGroup, GroupHom, is_exact_at
from .smith import IntMatrix, integer_kernel, solve_integer
from .structure import (
    breaking_vertices,
    condition_K,
    has_cycle,
    ideal_lattice,
    ideal_subgraph,
    is_hereditary,
    is_saturated,
    quotient_graph,
)

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════
# K-groups
# ═══════════════════════════════════════════════════════════════════════

def regular_vertices(g: Graph) -> list:
    return g.ordered(classify_vertices(g).regular)


def b_matrix(g: Graph) -> IntMatrix:
    """Rows: all vertices. Columns: regular vertices. Entry (w, v) = A_E(v, w) − [v = w]."""
    reg = regular_vertices(g)
    cols = []
    for v in reg:
        col = []
        for w in g.vertices:
            x = g.m(v, w)
            if is_inf(x):
                raise ExactnessError(f"regular vertex {v} has an infinite edge bundle")
            col.append(int(x) - int(v == w))
        cols.append(col)
    return IntMatrix.from_columns(cols, g.n)


def k1_basis(g: Graph) -> IntMatrix:
    """Columns: a Z-basis of ker(B_E) inside Z^{E^0_reg}."""
    return integer_kernel(b_matrix(g))


def k_groups(g: Graph) -> Tuple[FgAbGroup, FgAbGroup]:
    B = b_matrix(g)
    K0 = FgAbGroup.coker(B)
    K1 = FgAbGroup.free(k1_basis(g).cols)
    rank = K0.snf.rank
    if K0.free_rank + rank != g.n or K1.free_rank != B.cols - rank:
        raise ExactnessError("rank–nullity fails for B_E")
    logger.debug("K-theory of %d-vertex graph: K0=%s K1=%s", g.n, K0, K1)
    return K0, K1


# ═══════════════════════════════════════════════════════════════════════
# Positive cones
# ═══════════════════════════════════════════════════════════════════════

def _vertex_vector(g: Graph, v: str) -> Tuple[int, ...]:
    return tuple(int(w == v) for w in g.vertices)


def af_cone_tag(g: Graph) -> ConeTag:
    """Acyclic row-finite graph: K0 ≅ Z^{#sinks}, positive cone spanned by the sink classes."""
    vc = classify_vertices(g)
    if has_cycle(g) or not vc.row_finite:
        return ConeTag.unknown()
    sinks = g.ordered(vc.sinks)
    tag = ConeTag.standard([_vertex_vector(g, s) for s in sinks])
    tag.basis_nf(k_groups(g)[0])
    return tag


def cone_tag(g: Graph) -> ConeTag:
    """Order on K0 of a simple graph algebra."""
    if not condition_K(g) or ideal_lattice(g).size != 2:
        raise PreconditionError("cone_tag needs a simple graph algebra")
    if has_cycle(g):
        return ConeTag.trivial()
    return af_cone_tag(g)


def order_tag(g: Graph) -> ConeTag:
    """Best available cone for a subquotient graph: AF cone, trivial cone when simple, else unknown."""
    if not has_cycle(g):
        return af_cone_tag(g)
    try:
        return cone_tag(g)
    except (PreconditionError, ScopeError):
        return ConeTag.unknown()


# ═══════════════════════════════════════════════════════════════════════
# Induced maps
# ═══════════════════════════════════════════════════════════════════════

def _check_ideal(g: Graph, H: VertexSet) -> VertexSet:
    H = g.check_subset(H)
    if not (is_hereditary(g, H) and is_saturated(g, H)):
        raise PreconditionError(f"{g.ordered(H)} is not saturated hereditary")
    bv = breaking_vertices(g, H)
    if bv:
        raise ScopeError(f"breaking vertices {g.ordered(bv)} for H={g.ordered(H)}")
    return H


def _ideal_graph(g: Graph, H: VertexSet) -> Optional[Graph]:
    return ideal_subgraph(g, H) if H else None


def _quotient(g: Graph, H: VertexSet) -> Optional[Graph]:
    return quotient_graph(g, H) if H != frozenset(g.vertices) else None


def induced_k0_maps(g: Graph, H: VertexSet) -> Tuple[GroupHom, GroupHom]:
    """(i0, p0): K0(E_H) → K0(E) → K0(E∖H)."""
    H = _check_ideal(g, H)
    K0 = k_groups(g)[0]
    sub, quo = _ideal_graph(g, H), _quotient(g, H)

    K0_I = k_groups(sub)[0] if sub else FgAbGroup.trivial()
    K0_Q = k_groups(quo)[0] if quo else FgAbGroup.trivial()
    sub_names = sub.vertices if sub else ()
    quo_names = quo.vertices if quo else ()

    incl = IntMatrix.from_rows([[int(w == h) for h in sub_names] for w in g.vertices], len(sub_names))
    proj = IntMatrix.from_rows([[int(w == q) for w in g.vertices] for q in quo_names], g.n)
    return GroupHom(K0_I, K0, incl), GroupHom(K0, K0_Q, proj)


def induced_k1_map(g: Graph, H: VertexSet) -> Tuple[GroupHom, GroupHom]:
    """(i1, p1) in the kernel bases returned by k1_basis."""
    H = _check_ideal(g, H)
    sub, quo = _ideal_graph(g, H), _quotient(g, H)
    reg = regular_vertices(g)
    basis = k1_basis(g)
    K1 = FgAbGroup.free(basis.cols)

    cols = []
    K1_I = FgAbGroup.trivial()
    if sub:
        sub_reg = regular_vertices(sub)
        sub_basis = k1_basis(sub)
        K1_I = FgAbGroup.free(sub_basis.cols)
        for vec in sub_basis.columns():
            coords = dict(zip(sub_reg, vec))
            embedded = tuple(coords.get(v, 0) for v in reg)
            sol = solve_integer(basis, embedded)
            if sol is None:
                raise ExactnessError("K1 class of the ideal does not lie in K1 of the graph")
            cols.append(sol)
    i1 = GroupHom(K1_I, K1, IntMatrix.from_columns(cols, K1.n_gens))

    cols = []
    K1_Q = FgAbGroup.trivial()
    if quo:
        quo_reg = regular_vertices(quo)
        quo_basis = k1_basis(quo)
        K1_Q = FgAbGroup.free(quo_basis.cols)
        for vec in basis.columns():
            coords = dict(zip(reg, vec))
            restricted = tuple(coords.get(v, 0) for v in quo_reg)
            sol = solve_integer(quo_basis, restricted)
            if sol is None:
                raise ExactnessError("restricted K1 class is not in K1 of the quotient")
            cols.append(sol)
    p1 = GroupHom(K1, K1_Q, IntMatrix.from_columns(cols, K1_Q.n_gens))
    return i1, p1


# ═══════════════════════════════════════════════════════════════════════
# Six-term invariant
# ═══════════════════════════════════════════════════════════════════════

class IndexMap(str, enum.Enum):
    ZERO = "zero"
    UNAVAILABLE = "unavailable"


@dataclass(frozen=True)
class KSixInvariant:
    k0_ideal: FgAbGroup
    k0_alg: FgAbGroup
    k0_quot: FgAbGroup
    cone_ideal: ConeTag
    cone_alg: ConeTag
    cone_quot: ConeTag
    k1_ideal: FgAbGroup
    k1_alg: FgAbGroup
    k1_quot: FgAbGroup
    i0: GroupHom
    p0: GroupHom
    i1: GroupHom
    p1: GroupHom
    index_map: IndexMap
    # K0(A/I) → K1(I) vanishes for real rank zero.
    exp_map: str = "zero"

    def to_dict(self) -> dict:
        return {
            "k0": {
                "ideal": {**self.k0_ideal.to_dict(), "cone": self.cone_ideal.to_dict()},
                "algebra": {**self.k0_alg.to_dict(), "cone": self.cone_alg.to_dict()},
                "quotient": {**self.k0_quot.to_dict(), "cone": self.cone_quot.to_dict()},
            },
            "k1": {
                "ideal": self.k1_ideal.to_dict(),
                "algebra": self.k1_alg.to_dict(),
                "quotient": self.k1_quot.to_dict(),
            },
            "maps": {
                "i0": self.i0.to_json(),
                "p0": self.p0.to_json(),
                "i1": self.i1.to_json(),
                "p1": self.p1.to_json(),
            },
            "index_map": self.index_map.value,
            "exp_map": self.exp_map,
        }


def verify_exactness(k: KSixInvariant) -> None:
    """Both rows short exact when the boundary maps vanish."""
    for name, i, p in (("K0", k.i0, k.p0), ("K1", k.i1, k.p1)):
        if not i.is_injective():
            raise ExactnessError(f"{name}: inclusion map is not injective")
        if not p.is_surjective():
            raise ExactnessError(f"{name}: quotient map is not surjective")
        if not is_exact_at(i, p):
            raise ExactnessError(f"{name}: ker(p) != im(i)")


def assemble_k_six(g: Graph, H: VertexSet) -> KSixInvariant:
    if not condition_K(g):
        raise ScopeError("Condition (K) fails")
    H = g.check_subset(H)
    if not H or H == frozenset(g.vertices):
        raise PreconditionError("the ideal must be proper and nonzero")
    i0, p0 = induced_k0_maps(g, H)
    i1, p1 = induced_k1_map(g, H)
    index_map = IndexMap.ZERO if p1.target.is_trivial else IndexMap.UNAVAILABLE

    k = KSixInvariant(
        k0_ideal=i0.source,
        k0_alg=i0.target,
        k0_quot=p0.target,
        cone_ideal=order_tag(ideal_subgraph(g, H)),
        cone_alg=order_tag(g),
        cone_quot=order_tag(quotient_graph(g, H)),
        k1_ideal=i1.source,
        k1_alg=i1.target,
        k1_quot=p1.target,
        i0=i0,
        p0=p0,
        i1=i1,
        p1=p1,
        index_map=index_map,
    )
    if index_map == IndexMap.ZERO:
        verify_exactness(k)
    else:
        logger.info("K1 of the quotient is %s; index map not computed", k.k1_quot)
    return k
