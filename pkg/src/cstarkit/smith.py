"""
Exact integer matrices and Smith normal form.

The decomposition itself comes from sympy's `smith_normal_decomp` over ZZ;
the result is then normalized so the diagonal is nonnegative, forms a
divisibility chain, and keeps its zeros last. Every decomposition is
re-verified (U·A·V = D, U and V unimodular) before it is returned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp

from .errors import ExactnessError, PreconditionError

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════
# IntMatrix
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise PreconditionError(f"entry table does not match shape {self.rows}x{self.cols}")
        object.__setattr__(self, "entries", tuple(tuple(int(x) for x in r) for r in self.entries))

    # ── Constructors ──────────────────────────────────────────────────

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, tuple(tuple(r) for r in rows))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        return cls(rows, len(columns), tuple(tuple(c[i] for c in columns) for i in range(rows)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def from_domain(cls, dm: DomainMatrix) -> "IntMatrix":
        r, c = dm.shape
        return cls(r, c, tuple(tuple(int(x) for x in row) for row in dm.to_list()))

    # ── Conversion and arithmetic ─────────────────────────────────────

    def to_domain(self) -> DomainMatrix:
        return DomainMatrix([[ZZ(x) for x in r] for r in self.entries], (self.rows, self.cols), ZZ)

    def to_list(self) -> List[List[int]]:
        return [list(r) for r in self.entries]

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> List[Tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else tuple(() for _ in range(self.cols)))

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise PreconditionError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if 0 in (self.rows, self.cols, other.cols):
            return IntMatrix.zeros(self.rows, other.cols)
        return IntMatrix.from_domain(self.to_domain() * other.to_domain())

    def apply(self, vec: Sequence[int]) -> Tuple[int, ...]:
        if len(vec) != self.cols:
            raise PreconditionError(f"vector of length {len(vec)} for a matrix with {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.entries)

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise PreconditionError("hstack needs equal row counts")
        return IntMatrix(self.rows, self.cols + other.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def select_rows(self, idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix(len(idx), self.cols, tuple(self.entries[i] for i in idx))

    def select_columns(self, idx: Sequence[int]) -> "IntMatrix":
        return IntMatrix(self.rows, len(idx), tuple(tuple(r[j] for j in idx) for r in self.entries))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def determinant(self) -> int:
        if self.rows != self.cols:
            raise PreconditionError("determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        return int(self.to_domain().det())

    def inverse_unimodular(self) -> "IntMatrix":
        """Exact inverse of a matrix with determinant ±1."""
        if self.rows == 0:
            return self
        det = self.determinant()
        if det not in (1, -1):
            raise PreconditionError(f"matrix is not unimodular (det={det})")
        inv = Matrix(self.to_list()).adjugate() * det
        return IntMatrix.from_rows(inv.tolist(), self.cols)

    def to_json(self) -> List[List[int]]:
        return self.to_list()


# ═══════════════════════════════════════════════════════════════════════
# Smith normal form
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class SmithDecomposition:
    """U·A·V = D with U, V unimodular and D diagonal, d₁ | d₂ | ..., zeros last."""
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.D.entries[i][i] for i in range(min(self.D.rows, self.D.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @cached_property
    def U_inv(self) -> IntMatrix:
        return self.U.inverse_unimodular()


def _swap(rows: List[List[int]], i: int, j: int) -> None:
    rows[i], rows[j] = rows[j], rows[i]


def _normalize(U: List[List[int]], d: List[int], V: List[List[int]]) -> None:
    """Fix signs, push zeros last and enforce divisibility, updating U and V in place.

    V is stored transposed (rows of the list are columns of V).
    """
    k = len(d)
    for i in range(k):
        if d[i] < 0:
            d[i] = -d[i]
            U[i] = [-x for x in U[i]]
    for i in range(k):
        for j in range(i + 1, k):
            if d[i] == 0 and d[j] != 0:
                d[i], d[j] = d[j], d[i]
                _swap(U, i, j)
                _swap(V, i, j)
            elif d[i] != 0 and d[j] % d[i] != 0:
                a, b = d[i], d[j]
                g = gcd(a, b)
                _, x, y = _gcdex(a, b)
                # L = [[x, y], [-b/g, a/g]] on rows, R = [[1, -y·b/g], [1, x·a/g]] on columns.
                Ui, Uj = U[i], U[j]
                U[i] = [x * p + y * q for p, q in zip(Ui, Uj)]
                U[j] = [-(b // g) * p + (a // g) * q for p, q in zip(Ui, Uj)]
                Vi, Vj = V[i], V[j]
                V[i] = [p + q for p, q in zip(Vi, Vj)]
                V[j] = [-(y * b // g) * p + (x * a // g) * q for p, q in zip(Vi, Vj)]
                d[i], d[j] = g, a // g * b


def _gcdex(a: int, b: int) -> Tuple[int, int, int]:
    """(g, x, y) with x·a + y·b = g = gcd(a, b) ≥ 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    m, n = A.rows, A.cols
    if m == 0 or n == 0:
        return SmithDecomposition(IntMatrix.identity(m), IntMatrix.zeros(m, n), IntMatrix.identity(n))

    D0, S, T = smith_normal_decomp(A.to_domain())
    d = [int(D0.to_list()[i][i]) for i in range(min(m, n))]
    U = [[int(x) for x in r] for r in S.to_list()]
    Vt = [list(c) for c in zip(*[[int(x) for x in r] for r in T.to_list()])]
    _normalize(U, d, Vt)

    D = IntMatrix(m, n, tuple(tuple(d[i] if i == j and i < len(d) else 0 for j in range(n)) for i in range(m)))
    dec = SmithDecomposition(
        U=IntMatrix.from_rows(U, m),
        D=D,
        V=IntMatrix.from_columns(Vt, n),
    )
    _verify(A, dec)
    return dec


def _verify(A: IntMatrix, dec: SmithDecomposition) -> None:
    if dec.U @ A @ dec.V != dec.D:
        raise ExactnessError("U·A·V != D")
    if abs(dec.U.determinant()) != 1 or abs(dec.V.determinant()) != 1:
        raise ExactnessError("Smith transforms are not unimodular")
    diag = dec.diagonal
    for a, b in zip(diag, diag[1:]):
        if a < 0 or b < 0 or (a == 0 and b != 0) or (a != 0 and b % a != 0):
            raise ExactnessError(f"diagonal {diag} is not a divisibility chain")


# ═══════════════════════════════════════════════════════════════════════
# Integer linear systems
# ═══════════════════════════════════════════════════════════════════════

def solve_integer(A: IntMatrix, b: Sequence[int]) -> Optional[Tuple[int, ...]]:
    """An integer x with A·x = b, or None."""
    if len(b) != A.rows:
        raise PreconditionError("right-hand side length does not match the matrix")
    if A.cols == 0:
        return () if all(x == 0 for x in b) else None
    dec = smith_normal_form(A)
    c = dec.U.apply(b)
    diag = dec.diagonal
    y = [0] * A.cols
    for i, ci in enumerate(c):
        di = diag[i] if i < len(diag) else 0
        if di == 0:
            if ci != 0:
                return None
        else:
            if ci % di != 0:
                return None
            y[i] = ci // di
    x = dec.V.apply(y)
    if A.apply(x) != tuple(b):
        raise ExactnessError("integer solve produced a wrong solution")
    return x


def integer_kernel(A: IntMatrix) -> IntMatrix:
    """Columns form a Z-basis of {x ∈ Z^cols : A·x = 0}."""
    if A.rows == 0:
        return IntMatrix.identity(A.cols)
    if A.cols == 0:
        return IntMatrix.zeros(0, 0)
    dec = smith_normal_form(A)
    r = dec.rank
    return dec.V.select_columns(list(range(r, A.cols)))


def in_lattice(A: IntMatrix, b: Sequence[int]) -> bool:
    """True iff b lies in the column lattice of A."""
    return solve_integer(A, b) is not None


def matrix_from_columns(columns: Iterable[Sequence[int]], rows: int) -> IntMatrix:
    return IntMatrix.from_columns(list(columns), rows)
