"""
Extensions of finitely generated abelian groups.

For 0 → B --i--> M --p--> A → 0, Ext(A, B) = ⊕_j B / n_j B over the torsion
factors n_j of A. The class of the sequence is read off by lifting each
torsion generator a_j of A to m_j ∈ M and solving n_j·m_j = i(c_j).

Two sequences with isomorphic outer groups are isomorphic iff their classes
lie in one orbit of Aut(B) × Aut(A). The orbit is computed as the meeting of
the Aut(B)-orbit of one class with the Aut(A)-orbit of the other, and a
middle isomorphism β is rebuilt from the meeting point.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import config
from .errors import ExactnessError, PreconditionError, ScopeError
from .groups import ConeKind, ConeTag, FgAbGroup, GroupHom, aut_generators, group_iso, is_exact_at
from .smith import IntMatrix, solve_integer
from .verdict import Verdict

logger = logging.getLogger(__name__)

ClassCoords = Tuple[Tuple[int, ...], ...]


# ═══════════════════════════════════════════════════════════════════════
# Sequences and classes
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class ShortExactSequence:
    """0 → B → M → A → 0 with the positive cones of the outer groups."""
    i: GroupHom
    p: GroupHom
    cone_sub: ConeTag = field(default_factory=ConeTag.trivial)
    cone_quot: ConeTag = field(default_factory=ConeTag.trivial)

    def __post_init__(self):
        if self.i.target != self.p.source:
            raise PreconditionError("i and p do not compose")

    @property
    def B(self) -> FgAbGroup:
        return self.i.source

    @property
    def M(self) -> FgAbGroup:
        return self.i.target

    @property
    def A(self) -> FgAbGroup:
        return self.p.target

    @classmethod
    def from_k_six(cls, k) -> "ShortExactSequence":
        """The K0 row of a KSixInvariant."""
        return cls(k.i0, k.p0, k.cone_ideal, k.cone_quot)

    def verify(self) -> None:
        if not self.i.is_injective():
            raise ExactnessError("i is not injective")
        if not self.p.is_surjective():
            raise ExactnessError("p is not surjective")
        if not is_exact_at(self.i, self.p):
            raise ExactnessError("ker(p) != im(i)")


@dataclass(frozen=True)
class ExtClass:
    """Element of ⊕_j B/n_j B, one row per torsion factor n_j of A, in B's normal form."""
    orders: Tuple[int, ...]
    moduli: ClassCoords
    element: ClassCoords

    @property
    def is_zero(self) -> bool:
        return not any(x for row in self.element for x in row)

    @property
    def ambient_order(self) -> int:
        total = 1
        for row in self.moduli:
            for m in row:
                total *= m
        return total

    def to_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "ambient": [list(r) for r in self.moduli],
            "element": [list(r) for r in self.element],
        }


def ext_moduli(A: FgAbGroup, B: FgAbGroup) -> ClassCoords:
    return tuple(tuple(n if m == 0 else gcd(n, m) for m in B.moduli) for n in A.torsion)


def _reduce(rows: Sequence[Sequence[int]], moduli: ClassCoords) -> ClassCoords:
    return tuple(tuple(x % m for x, m in zip(r, mods)) for r, mods in zip(rows, moduli))


def _lifts_and_defects(i: GroupHom, p: GroupHom) -> Tuple[List[Tuple[int, ...]], List[Tuple[int, ...]]]:
    """Per torsion generator a_j of A: a lift m_j ∈ M and c_j ∈ B with n_j·m_j = i(c_j)."""
    A = p.target
    r = A.free_rank
    lifts, defects = [], []
    for j, n in enumerate(A.torsion):
        a = A.from_normal(A.nf_unit(r + j))
        m = p.preimage(a)
        if m is None:
            raise ExactnessError("torsion generator has no lift")
        c = i.preimage(tuple(n * x for x in m))
        if c is None:
            raise ExactnessError("n·lift is not in the image of i")
        lifts.append(m)
        defects.append(c)
    return lifts, defects


def ext_class(S: ShortExactSequence) -> ExtClass:
    S.verify()
    _, defects = _lifts_and_defects(S.i, S.p)
    moduli = ext_moduli(S.A, S.B)
    element = _reduce([S.B.to_normal(c) for c in defects], moduli)
    return ExtClass(S.A.torsion, moduli, element)


# ═══════════════════════════════════════════════════════════════════════
# Functoriality
# ═══════════════════════════════════════════════════════════════════════

def pushforward(e: ClassCoords, alpha_nf: IntMatrix, A: FgAbGroup, B: FgAbGroup) -> ClassCoords:
    """α_* for α ∈ Hom(B', B) given in normal form; result reduced in Ext(A, B)."""
    return _reduce([alpha_nf.apply(row) for row in e], ext_moduli(A, B))


def pullback(e: ClassCoords, gamma_nf: IntMatrix, A: FgAbGroup, A2: FgAbGroup, B: FgAbGroup) -> ClassCoords:
    """γ^* for γ: A → A2 given in normal form; e lives in Ext(A2, B)."""
    r, r2 = A.free_rank, A2.free_rank
    width = B.nf_dim
    rows = []
    for j, n in enumerate(A.torsion):
        acc = [0] * width
        for k, n2 in enumerate(A2.torsion):
            num = n * gamma_nf.entries[r2 + k][r + j]
            if num % n2:
                raise ExactnessError("normal-form matrix does not define a hom on torsion")
            coeff = num // n2
            for t in range(width):
                acc[t] += coeff * e[k][t]
        rows.append(acc)
    return _reduce(rows, ext_moduli(A, B))


def _orbit(
    start: ClassCoords,
    gens: List[IntMatrix],
    act,
    combine,
    dim: int,
) -> Optional[Dict[ClassCoords, IntMatrix]]:
    """Closure of start under gens, each element tagged with the composite that reaches it."""
    seen: Dict[ClassCoords, IntMatrix] = {start: IntMatrix.identity(dim)}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for N in gens:
            y = act(x, N)
            if y in seen:
                continue
            seen[y] = combine(seen[x], N)
            if len(seen) > config.MAX_ORBIT_SIZE:
                return None
            queue.append(y)
    return seen


# ═══════════════════════════════════════════════════════════════════════
# Isomorphism of sequences
# ═══════════════════════════════════════════════════════════════════════

def _identification(G: FgAbGroup, cone: ConeTag, G2: FgAbGroup, cone2: ConeTag) -> Tuple[IntMatrix, IntMatrix]:
    """Cone-respecting isomorphism G2 → G and its inverse, as normal-form matrices."""
    if cone.kind == ConeKind.STANDARD_SIMPLICIAL:
        B, B2 = cone.basis_nf(G), cone2.basis_nf(G2)
        return B @ B2.inverse_unimodular(), B2 @ B.inverse_unimodular()
    I = IntMatrix.identity(G.nf_dim)
    return I, I


def _scaled_identity(n: int, k: int) -> IntMatrix:
    return IntMatrix.from_rows([[k * int(a == b) for b in range(n)] for a in range(n)], n)


def _middle_map(S: ShortExactSequence, i2: GroupHom, p2: GroupHom, alpha: GroupHom, gamma: GroupHom) -> GroupHom:
    """β: M → M2 with β∘i = i2∘α and p2∘β = γ∘p."""
    A, B, M, M2 = S.A, S.B, S.M, i2.target
    r = A.free_rank

    def lift_through(hom: GroupHom, y) -> Tuple[int, ...]:
        x = hom.preimage(y)
        if x is None:
            raise ExactnessError("element has no preimage")
        return x

    def add(*vecs):
        return tuple(sum(xs) for xs in zip(*vecs))

    def scale(k, v):
        return tuple(k * x for x in v)

    free_lifts, free_images = [], []
    for f in range(r):
        a = A.from_normal(A.nf_unit(f))
        free_lifts.append(lift_through(S.p, a))
        free_images.append(lift_through(p2, gamma.apply(a)))

    lifts, defects = _lifts_and_defects(S.i, S.p)
    tors_images = []
    for j, n in enumerate(A.torsion):
        a = A.from_normal(A.nf_unit(r + j))
        m2 = lift_through(p2, gamma.apply(a))
        d = lift_through(i2, scale(n, m2))
        rhs = add(alpha.apply(defects[j]), scale(-1, d))
        sol = solve_integer(_scaled_identity(B.n_gens, n).hstack(B.relations), rhs)
        if sol is None:
            raise ExactnessError("Ext classes do not match at the meeting point")
        delta = sol[: B.n_gens]
        tors_images.append(add(m2, i2.apply(delta)))

    columns = []
    zero_m = (0,) * M.n_gens
    zero_m2 = (0,) * M2.n_gens
    for k in range(M.n_gens):
        e_k = tuple(int(t == k) for t in range(M.n_gens))
        coords = A.to_normal(S.p.apply(e_k))
        base, image = zero_m, zero_m2
        for f in range(r):
            base = add(base, scale(coords[f], free_lifts[f]))
            image = add(image, scale(coords[f], free_images[f]))
        for j in range(len(A.torsion)):
            base = add(base, scale(coords[r + j], lifts[j]))
            image = add(image, scale(coords[r + j], tors_images[j]))
        b = lift_through(S.i, add(e_k, scale(-1, base)))
        columns.append(add(image, i2.apply(alpha.apply(b))))
    return GroupHom(M, M2, IntMatrix.from_columns(columns, M2.n_gens))


def _check_morphism(S: ShortExactSequence, i2, p2, alpha, beta, gamma) -> None:
    if not beta.compose(S.i).equals(i2.compose(alpha)):
        raise ExactnessError("left square does not commute")
    if not p2.compose(beta).equals(gamma.compose(S.p)):
        raise ExactnessError("right square does not commute")
    if not beta.is_isomorphism():
        raise ExactnessError("middle map is not bijective")


def _rows(e: ClassCoords) -> List[List[int]]:
    return [list(r) for r in e]


def ses_isomorphic(S: ShortExactSequence, S2: ShortExactSequence) -> Verdict:
    route = "Ext orbit"
    for name, G, G2 in (("ideal", S.B, S2.B), ("quotient", S.A, S2.A)):
        if not group_iso(G, G2):
            return Verdict.no(route, mismatch=f"{name} group", left=str(G), right=str(G2))
    for name, c, c2 in (("ideal", S.cone_sub, S2.cone_sub), ("quotient", S.cone_quot, S2.cone_quot)):
        if ConeKind.UNKNOWN in (c.kind, c2.kind):
            return Verdict.unknown(f"{route}: positive cone of the {name} unknown")
        if c.kind != c2.kind or c.rank != c2.rank:
            return Verdict.no(route, mismatch=f"{name} order", left=str(c), right=str(c2))

    A, B = S.A, S.B
    e = ext_class(S)
    e2 = ext_class(S2)
    phiB, phiB_inv = _identification(B, S.cone_sub, S2.B, S2.cone_sub)
    phiA, phiA_inv = _identification(A, S.cone_quot, S2.A, S2.cone_quot)
    # Class of S2 re-read over (A, B).
    moved = pushforward(pullback(e2.element, phiA_inv, A, S2.A, S2.B), phiB, A, B)

    try:
        gens_B = [a.normal_form_matrix() for a in aut_generators(B, S.cone_sub)]
        gens_A = [a.normal_form_matrix() for a in aut_generators(A, S.cone_quot)]
    except ScopeError as exc:
        return Verdict.unknown(f"{route}: {exc}")

    pushed = _orbit(
        e.element, gens_B,
        act=lambda x, N: pushforward(x, N, A, B),
        combine=lambda acc, N: N @ acc,
        dim=B.nf_dim,
    )
    pulled = _orbit(
        moved, gens_A,
        act=lambda x, N: pullback(x, N, A, A, B),
        combine=lambda acc, N: acc @ N,
        dim=A.nf_dim,
    )
    if pushed is None or pulled is None:
        return Verdict.unknown(f"{route}: orbit exceeds {config.MAX_ORBIT_SIZE} classes")
    logger.debug("Ext orbits: %d pushed, %d pulled", len(pushed), len(pulled))

    common = set(pushed) & set(pulled)
    if not common:
        return Verdict.no(
            route,
            mismatch="Ext classes in different orbits",
            ext_left=_rows(e.element),
            ext_right=_rows(moved),
            orbit_left=sorted(_rows(x) for x in pushed),
            orbit_right=sorted(_rows(x) for x in pulled),
        )
    meet = moved if moved in pushed else min(common)

    alpha0 = GroupHom.from_nf(B, B, pushed[meet])
    gamma0 = GroupHom.from_nf(A, A, pulled[meet])
    phiB_inv_hom = GroupHom.from_nf(B, S2.B, phiB_inv)
    phiA_hom = GroupHom.from_nf(S2.A, A, phiA)
    phiA_inv_hom = GroupHom.from_nf(A, S2.A, phiA_inv)
    i2 = S2.i.compose(phiB_inv_hom)
    p2 = phiA_hom.compose(S2.p)

    beta = _middle_map(S, i2, p2, alpha0, gamma0)
    _check_morphism(S, i2, p2, alpha0, beta, gamma0)

    alpha = phiB_inv_hom.compose(alpha0)
    gamma = phiA_inv_hom.compose(gamma0)
    _check_morphism(S, S2.i, S2.p, alpha, beta, gamma)
    return Verdict.yes(
        route,
        alpha=alpha.to_json(),
        beta=beta.to_json(),
        beta_presentation=beta.matrix.to_json(),
        gamma=gamma.to_json(),
        ext_class=e.to_dict(),
    )
