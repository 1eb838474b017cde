"""
Finitely generated abelian groups with presentations, homomorphisms between
them, positive-cone tags, and generating sets of automorphism groups.

A group is Z^n / im(R). Its Smith decomposition U·R·V = D converts a
presentation vector x into normal-form coordinates y = U·x: first the free
coordinates, then the torsion coordinates reduced mod their invariant
factors. Coordinates with invariant factor 1 are dropped.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import List, Optional, Sequence, Tuple

from . import config
from .errors import ExactnessError, PreconditionError, ScopeError
from .smith import (
    IntMatrix,
    SmithDecomposition,
    integer_kernel,
    smith_normal_form,
    solve_integer,
)

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


# ═══════════════════════════════════════════════════════════════════════
# FgAbGroup
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class FgAbGroup:
    """coker(R : Z^r → Z^n), with Smith data for normal-form coordinates."""
    n_gens: int
    relations: IntMatrix

    def __post_init__(self):
        if self.relations.rows != self.n_gens:
            raise PreconditionError(
                f"relation matrix has {self.relations.rows} rows for {self.n_gens} generators"
            )

    # ── Constructors ──────────────────────────────────────────────────

    @classmethod
    def coker(cls, R: IntMatrix) -> "FgAbGroup":
        return cls(R.rows, R)

    @classmethod
    def free(cls, rank: int) -> "FgAbGroup":
        return cls(rank, IntMatrix.zeros(rank, 0))

    @classmethod
    def trivial(cls) -> "FgAbGroup":
        return cls.free(0)

    @classmethod
    def from_invariants(cls, free_rank: int, torsion: Sequence[int] = ()) -> "FgAbGroup":
        n = free_rank + len(torsion)
        cols = []
        for k, t in enumerate(torsion):
            col = [0] * n
            col[free_rank + k] = t
            cols.append(col)
        return cls(n, IntMatrix.from_columns(cols, n))

    # ── Smith data ────────────────────────────────────────────────────

    @cached_property
    def snf(self) -> SmithDecomposition:
        return smith_normal_form(self.relations)

    @cached_property
    def _factors(self) -> Tuple[int, ...]:
        diag = self.snf.diagonal
        return tuple(diag[i] if i < len(diag) else 0 for i in range(self.n_gens))

    @cached_property
    def _free_idx(self) -> Tuple[int, ...]:
        return tuple(i for i, d in enumerate(self._factors) if d == 0)

    @cached_property
    def _tors_idx(self) -> Tuple[int, ...]:
        return tuple(i for i, d in enumerate(self._factors) if d > 1)

    @property
    def free_rank(self) -> int:
        return len(self._free_idx)

    @property
    def torsion(self) -> Tuple[int, ...]:
        return tuple(self._factors[i] for i in self._tors_idx)

    @property
    def nf_dim(self) -> int:
        return self.free_rank + len(self._tors_idx)

    @property
    def moduli(self) -> Tuple[int, ...]:
        """Per normal-form coordinate: 0 for Z, n for Z_n."""
        return (0,) * self.free_rank + self.torsion

    @property
    def is_trivial(self) -> bool:
        return self.nf_dim == 0

    @cached_property
    def nf_projection(self) -> IntMatrix:
        """T: presentation coordinates → normal-form coordinates (before reduction)."""
        return self.snf.U.select_rows(list(self._free_idx + self._tors_idx))

    @cached_property
    def nf_section(self) -> IntMatrix:
        """S: normal-form coordinates → presentation coordinates."""
        return self.snf.U_inv.select_columns(list(self._free_idx + self._tors_idx))

    # ── Elements ──────────────────────────────────────────────────────

    def reduce_nf(self, z: Sequence[int]) -> Vector:
        return tuple(x % m if m else x for x, m in zip(z, self.moduli))

    def to_normal(self, x: Sequence[int]) -> Vector:
        if len(x) != self.n_gens:
            raise PreconditionError(f"element of length {len(x)} in a group with {self.n_gens} generators")
        return self.reduce_nf(self.nf_projection.apply(x))

    def from_normal(self, z: Sequence[int]) -> Vector:
        if len(z) != self.nf_dim:
            raise PreconditionError(f"normal-form vector of length {len(z)}, expected {self.nf_dim}")
        return self.nf_section.apply(z)

    def nf_unit(self, j: int) -> Vector:
        return tuple(int(i == j) for i in range(self.nf_dim))

    def is_zero(self, x: Sequence[int]) -> bool:
        return not any(self.to_normal(x))

    def equal(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return self.to_normal(x) == self.to_normal(y)

    # ── Serialization ─────────────────────────────────────────────────

    def to_dict(self) -> dict:
        return {"rank": self.free_rank, "factors": list(self.torsion)}

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts.extend(f"Z_{t}" for t in self.torsion)
        return " ⊕ ".join(parts) if parts else "0"


def group_iso(G: FgAbGroup, H: FgAbGroup) -> bool:
    return G.free_rank == H.free_rank and G.torsion == H.torsion


# ═══════════════════════════════════════════════════════════════════════
# GroupHom
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class GroupHom:
    """Homomorphism given by an integer matrix in presentation coordinates."""
    source: FgAbGroup
    target: FgAbGroup
    matrix: IntMatrix

    def __post_init__(self):
        if (self.matrix.rows, self.matrix.cols) != (self.target.n_gens, self.source.n_gens):
            raise PreconditionError(
                f"hom matrix is {self.matrix.rows}x{self.matrix.cols}, "
                f"expected {self.target.n_gens}x{self.source.n_gens}"
            )
        for col in self.source.relations.columns():
            if not self.target.is_zero(self.matrix.apply(col)):
                raise ExactnessError("hom matrix does not map relations into relations")

    # ── Constructors ──────────────────────────────────────────────────

    @classmethod
    def identity(cls, G: FgAbGroup) -> "GroupHom":
        return cls(G, G, IntMatrix.identity(G.n_gens))

    @classmethod
    def zero(cls, G: FgAbGroup, H: FgAbGroup) -> "GroupHom":
        return cls(G, H, IntMatrix.zeros(H.n_gens, G.n_gens))

    @classmethod
    def from_nf(cls, G: FgAbGroup, H: FgAbGroup, N: IntMatrix) -> "GroupHom":
        """Hom whose normal-form matrix is N."""
        if (N.rows, N.cols) != (H.nf_dim, G.nf_dim):
            raise PreconditionError(f"normal-form matrix must be {H.nf_dim}x{G.nf_dim}")
        return cls(G, H, H.nf_section @ N @ G.nf_projection)

    # ── Evaluation ────────────────────────────────────────────────────

    def apply(self, x: Sequence[int]) -> Vector:
        return self.matrix.apply(x)

    def apply_nf(self, z: Sequence[int]) -> Vector:
        return self.target.to_normal(self.matrix.apply(self.source.from_normal(z)))

    def normal_form_matrix(self) -> IntMatrix:
        cols = [self.apply_nf(self.source.nf_unit(j)) for j in range(self.source.nf_dim)]
        return IntMatrix.from_columns(cols, self.target.nf_dim)

    def compose(self, other: "GroupHom") -> "GroupHom":
        """self ∘ other."""
        if other.target != self.source:
            raise PreconditionError("composition of homs with mismatched groups")
        return GroupHom(other.source, self.target, self.matrix @ other.matrix)

    def equals(self, other: "GroupHom") -> bool:
        if other.source != self.source or other.target != self.target:
            return False
        return all(
            self.target.equal(self.matrix.column(j), other.matrix.column(j))
            for j in range(self.source.n_gens)
        )

    # ── Kernel and image ──────────────────────────────────────────────

    def _with_relations(self) -> IntMatrix:
        return self.matrix.hstack(self.target.relations)

    def image_contains(self, y: Sequence[int]) -> bool:
        return solve_integer(self._with_relations(), y) is not None

    def preimage(self, y: Sequence[int]) -> Optional[Vector]:
        sol = solve_integer(self._with_relations(), y)
        return None if sol is None else sol[: self.source.n_gens]

    def kernel_generators(self) -> List[Vector]:
        """Presentation vectors generating ker, nonzero elements only."""
        K = integer_kernel(self._with_relations())
        gens = []
        for col in K.columns():
            x = col[: self.source.n_gens]
            if not self.source.is_zero(x):
                gens.append(x)
        return gens

    def is_injective(self) -> bool:
        return not self.kernel_generators()

    def is_surjective(self) -> bool:
        n = self.target.n_gens
        return all(self.image_contains(tuple(int(i == j) for i in range(n))) for j in range(n))

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def is_zero(self) -> bool:
        return all(self.target.is_zero(c) for c in self.matrix.columns())

    def to_json(self) -> List[List[int]]:
        return self.normal_form_matrix().to_json()


def is_exact_at(f: GroupHom, g: GroupHom) -> bool:
    """im f = ker g for A --f--> B --g--> C."""
    if f.target != g.source:
        raise PreconditionError("homs do not compose")
    if not g.compose(f).is_zero():
        return False
    return all(f.image_contains(x) for x in g.kernel_generators())


# ═══════════════════════════════════════════════════════════════════════
# Cone tags
# ═══════════════════════════════════════════════════════════════════════

class ConeKind(str, enum.Enum):
    TRIVIAL = "trivial"
    STANDARD_SIMPLICIAL = "standard_simplicial"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ConeTag:
    """Positive cone on K0: everything, a simplicial cone on a basis, or unknown."""
    kind: ConeKind
    rank: int = 0
    # Designated basis of the simplicial cone, as presentation vectors.
    basis: Tuple[Vector, ...] = field(default=())

    @classmethod
    def trivial(cls) -> "ConeTag":
        return cls(ConeKind.TRIVIAL)

    @classmethod
    def standard(cls, basis: Sequence[Sequence[int]]) -> "ConeTag":
        basis = tuple(tuple(b) for b in basis)
        return cls(ConeKind.STANDARD_SIMPLICIAL, len(basis), basis)

    @classmethod
    def unknown(cls) -> "ConeTag":
        return cls(ConeKind.UNKNOWN)

    def basis_nf(self, G: FgAbGroup) -> IntMatrix:
        """Designated basis in normal-form coordinates; unimodular by construction."""
        if self.kind != ConeKind.STANDARD_SIMPLICIAL:
            raise PreconditionError("only simplicial cones carry a basis")
        if G.torsion or G.free_rank != self.rank:
            raise ExactnessError(f"simplicial cone of rank {self.rank} on {G}")
        B = IntMatrix.from_columns([G.to_normal(b) for b in self.basis], G.nf_dim)
        if abs(B.determinant()) != 1:
            raise ExactnessError("designated cone basis is not a basis")
        return B

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "rank": self.rank}

    def __str__(self) -> str:
        if self.kind == ConeKind.STANDARD_SIMPLICIAL:
            return f"StandardSimplicial({self.rank})"
        return "Trivial" if self.kind == ConeKind.TRIVIAL else "UnknownOrder"


# ═══════════════════════════════════════════════════════════════════════
# Automorphisms
# ═══════════════════════════════════════════════════════════════════════

def unit_group_generators(n: int) -> List[int]:
    """Greedy generating set of (Z/n)^×, smallest units first."""
    units = [u for u in range(1, n) if gcd(u, n) == 1]
    generated = {1 % n} if n > 1 else set()
    gens: List[int] = []
    for u in units:
        if u in generated:
            continue
        gens.append(u)
        frontier = list(generated)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = x * g % n
                if y not in generated:
                    generated.add(y)
                    frontier.append(y)
    return gens


def _elementary(m: int, entries: Sequence[Tuple[int, int, int]]) -> IntMatrix:
    rows = [[int(i == j) for j in range(m)] for i in range(m)]
    for i, j, val in entries:
        rows[i][j] = val
    return IntMatrix.from_rows(rows, m)


def _permutation(m: int, a: int, b: int) -> IntMatrix:
    return _elementary(m, [(a, a, 0), (b, b, 0), (a, b, 1), (b, a, 1)])


def aut_generators(G: FgAbGroup, cone: ConeTag) -> List[GroupHom]:
    """Finite generating set of the cone-preserving automorphisms of G.

    Raises ScopeError for an unknown cone or a free part above MAX_FREE_RANK.
    """
    m = G.nf_dim
    r = G.free_rank
    if cone.kind == ConeKind.UNKNOWN:
        raise ScopeError("positive cone unknown; ordered automorphisms not available")

    mats: List[IntMatrix] = []
    if cone.kind == ConeKind.STANDARD_SIMPLICIAL:
        B = cone.basis_nf(G)
        B_inv = B.inverse_unimodular()
        for k in range(cone.rank - 1):
            mats.append(B @ _permutation(m, k, k + 1) @ B_inv)
    else:
        if r > config.MAX_FREE_RANK:
            raise ScopeError(f"free rank {r} exceeds the automorphism scope bound {config.MAX_FREE_RANK}")
        if r == 1:
            mats.append(_elementary(m, [(0, 0, -1)]))
        elif r == 2:
            mats.append(_elementary(m, [(0, 0, -1)]))
            mats.append(_permutation(m, 0, 1))
            mats.append(_elementary(m, [(1, 0, 1)]))

        tors = G.torsion
        for k, n in enumerate(tors):
            for u in unit_group_generators(n):
                mats.append(_elementary(m, [(r + k, r + k, u)]))
        for i, ni in enumerate(tors):
            for j, nj in enumerate(tors):
                if i != j:
                    # e_i ↦ e_i + c·e_j needs ni·c ≡ 0 mod nj.
                    mats.append(_elementary(m, [(r + j, r + i, nj // gcd(ni, nj))]))
        for i in range(r):
            for k in range(len(tors)):
                mats.append(_elementary(m, [(r + k, i, 1)]))

    auts = [GroupHom.from_nf(G, G, N) for N in mats]
    if not auts:
        return [GroupHom.identity(G)]
    for a in auts:
        if not a.is_isomorphism():
            raise ExactnessError("automorphism generator is not invertible")
    logger.debug("Aut(%s) under %s: %d generators", G, cone, len(auts))
    return auts
