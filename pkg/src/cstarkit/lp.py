"""
Exact linear feasibility.

Decides whether {x ≥ 0 : E·x = e, G·x ≥ h} is nonempty with a Phase-I
simplex over Fractions using Bland's rule. A feasible point or a Farkas
certificate y (y_G ≥ 0, Eᵀy_E + Gᵀy_G ≤ 0, e·y_E + h·y_G > 0) is returned
and re-checked exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction as Frac
from typing import List, Optional, Sequence

from .errors import ExactnessError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    # Feasible point, one value per variable.
    x: Optional[List[Frac]] = None
    # Farkas multipliers, one per constraint row (equalities first).
    certificate: Optional[List[Frac]] = None


class PhaseOneTableau:
    """Dense tableau for min Σ artificials s.t. A·x + I·a = b, b ≥ 0."""

    def __init__(self, rows: Sequence[Sequence[Frac]], rhs: Sequence[Frac]):
        self.m = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.width = self.n + self.m
        self.A = [
            [Frac(v) for v in r] + [Frac(int(i == k)) for k in range(self.m)]
            for i, r in enumerate(rows)
        ]
        self.b = [Frac(v) for v in rhs]
        self.c = [Frac(0)] * self.n + [Frac(1)] * self.m
        self.basis = list(range(self.n, self.width))
        self.pivots = 0

    def reduced_costs(self) -> List[Frac]:
        cb = [self.c[j] for j in self.basis]
        return [
            self.c[j] - sum(cb[i] * self.A[i][j] for i in range(self.m))
            for j in range(self.width)
        ]

    def pivot(self, i: int, j: int) -> None:
        piv = self.A[i][j]
        self.A[i] = [v / piv for v in self.A[i]]
        self.b[i] /= piv
        for k in range(self.m):
            if k != i and self.A[k][j] != 0:
                f = self.A[k][j]
                self.A[k] = [a - f * p for a, p in zip(self.A[k], self.A[i])]
                self.b[k] -= f * self.b[i]
        self.basis[i] = j
        self.pivots += 1

    def bland_step(self) -> bool:
        """One pivot by Bland's rule. False once optimal."""
        red = self.reduced_costs()
        entering = next((j for j in range(self.width) if red[j] < 0), None)
        if entering is None:
            return False
        candidates = [
            (self.b[i] / self.A[i][entering], self.basis[i], i)
            for i in range(self.m)
            if self.A[i][entering] > 0
        ]
        # Phase I is bounded below by zero.
        _, _, leaving = min(candidates)
        self.pivot(leaving, entering)
        return True

    def solve(self) -> None:
        while self.bland_step():
            pass

    @property
    def objective(self) -> Frac:
        return sum((self.c[j] * self.b[i] for i, j in enumerate(self.basis)), Frac(0))

    def primal(self) -> List[Frac]:
        x = [Frac(0)] * self.n
        for i, j in enumerate(self.basis):
            if j < self.n:
                x[j] = self.b[i]
        return x

    def dual(self) -> List[Frac]:
        """y = c_B·B⁻¹, read from the artificial columns."""
        cb = [self.c[j] for j in self.basis]
        return [sum(cb[k] * self.A[k][self.n + i] for k in range(self.m)) for i in range(self.m)]


def _dot(u: Sequence[Frac], v: Sequence[Frac]) -> Frac:
    return sum((a * b for a, b in zip(u, v)), Frac(0))


def check_point(x, eq_rows, eq_rhs, ge_rows, ge_rhs) -> bool:
    return (
        all(v >= 0 for v in x)
        and all(_dot(r, x) == e for r, e in zip(eq_rows, eq_rhs))
        and all(_dot(r, x) >= h for r, h in zip(ge_rows, ge_rhs))
    )


def check_certificate(y, n, eq_rows, eq_rhs, ge_rows, ge_rhs) -> bool:
    rows = list(eq_rows) + list(ge_rows)
    rhs = list(eq_rhs) + list(ge_rhs)
    if any(v < 0 for v in y[len(eq_rows):]):
        return False
    if any(_dot(y, [r[j] for r in rows]) > 0 for j in range(n)):
        return False
    return _dot(y, rhs) > 0


def find_feasible_point(
    n: int,
    eq_rows: Sequence[Sequence[Frac]] = (),
    eq_rhs: Sequence[Frac] = (),
    ge_rows: Sequence[Sequence[Frac]] = (),
    ge_rhs: Sequence[Frac] = (),
) -> Feasibility:
    if len(eq_rows) != len(eq_rhs) or len(ge_rows) != len(ge_rhs):
        raise PreconditionError("every constraint row needs a right-hand side")
    if any(len(r) != n for r in list(eq_rows) + list(ge_rows)):
        raise PreconditionError(f"constraint rows must have {n} coefficients")
    eq_rows = [[Frac(v) for v in r] for r in eq_rows]
    ge_rows = [[Frac(v) for v in r] for r in ge_rows]
    eq_rhs = [Frac(v) for v in eq_rhs]
    ge_rhs = [Frac(v) for v in ge_rhs]

    n_ge = len(ge_rows)
    rows, rhs, signs = [], [], []
    for r, e in zip(eq_rows, eq_rhs):
        rows.append(r + [Frac(0)] * n_ge)
        rhs.append(e)
    for k, (r, h) in enumerate(zip(ge_rows, ge_rhs)):
        rows.append(r + [Frac(-int(t == k)) for t in range(n_ge)])
        rhs.append(h)
    for i in range(len(rows)):
        s = -1 if rhs[i] < 0 else 1
        signs.append(s)
        rows[i] = [s * v for v in rows[i]]
        rhs[i] = s * rhs[i]

    if not rows:
        return Feasibility(True, x=[Frac(0)] * n)

    tab = PhaseOneTableau(rows, rhs)
    tab.solve()
    logger.debug("Phase I finished after %d pivots, objective %s", tab.pivots, tab.objective)

    if tab.objective == 0:
        x = tab.primal()[:n]
        if not check_point(x, eq_rows, eq_rhs, ge_rows, ge_rhs):
            raise ExactnessError("Phase I point violates a constraint")
        return Feasibility(True, x=x)

    y = [s * v for s, v in zip(signs, tab.dual())]
    if not check_certificate(y, n, eq_rows, eq_rhs, ge_rows, ge_rhs):
        raise ExactnessError("Phase I dual is not a Farkas certificate")
    return Feasibility(False, certificate=y)
