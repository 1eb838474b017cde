"""
Stability of the unique ideal, and graph traces.

On a finite graph the unique proper ideal I_H is always stable. The witness
depends on the quotient: a cycle outside H with an entry into H, or an
infinite family of paths entering H (an Infinity bundle or a cycle among
vertices that reach H).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

from .errors import ExactnessError, ScopeError
from .graph import Graph, classify_vertices, is_inf, reachable_set
from .lp import find_feasible_point
from .structure import (
    CycleWitness,
    EntranceFamily,
    cycle_with_entry,
    entrance_paths,
    has_cycle,
    ideal_subgraph,
    quotient_graph,
    unique_ideal_structure,
)

logger = logging.getLogger(__name__)


# ═══════════════════════════════════════════════════════════════════════
# Stability of the unique ideal
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class StabilityReport:
    H: tuple
    stable: bool
    witness_kind: str
    cycle_witness: Optional[CycleWitness]
    entrance: EntranceFamily
    ideal_has_cycle: bool
    # H is finite, so the ideal subgraph algebra has a unit.
    ideal_subgraph_unital: bool = True

    def to_dict(self) -> dict:
        return {
            "H": list(self.H),
            "stable": self.stable,
            "witness_kind": self.witness_kind,
            "cycle_witness": self.cycle_witness.to_dict() if self.cycle_witness else None,
            "entrance": self.entrance.to_dict(),
            "ideal_has_cycle": self.ideal_has_cycle,
            "ideal_subgraph_unital": self.ideal_subgraph_unital,
        }


def _check_entrance(g: Graph, H, fam: EntranceFamily) -> None:
    if not fam.infinite:
        raise ExactnessError("entrance family is finite on a unique-ideal graph")
    reaches = lambda x: x not in H and bool(reachable_set(g, x) & H)
    if fam.infinite_edge is not None:
        x, y = fam.infinite_edge
        if not (reaches(x) and is_inf(g.m(x, y)) and (y in H or reaches(y))):
            raise ExactnessError(f"{x} -> {y} is not an Infinity bundle on a path into H")
    elif fam.cycle is not None:
        cyc = fam.cycle
        if cyc[0] != cyc[-1] or not all(reaches(x) for x in cyc):
            raise ExactnessError(f"{cyc} is not a cycle on a path into H")
        if any(g.m(a, b) == 0 for a, b in zip(cyc, cyc[1:])):
            raise ExactnessError(f"{cyc} uses a missing edge")
    else:
        raise ExactnessError("infinite entrance family without a certificate")


def stability_of_unique_ideal(g: Graph) -> StabilityReport:
    u = unique_ideal_structure(g)
    if u is None:
        raise ScopeError("graph algebra does not have exactly one proper nontrivial ideal")
    H = u.H
    entrance = entrance_paths(g, H)
    if has_cycle(quotient_graph(g, H)):
        wit = cycle_with_entry(g, H)
        kind = "cycle with entry"
    else:
        wit = None
        kind = "infinite entrance family"
        _check_entrance(g, H, entrance)
    return StabilityReport(
        H=tuple(g.ordered(H)),
        stable=True,
        witness_kind=kind,
        cycle_witness=wit,
        entrance=entrance,
        ideal_has_cycle=has_cycle(ideal_subgraph(g, H)),
    )


# ═══════════════════════════════════════════════════════════════════════
# Graph traces
# ═══════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class GraphTraceResult:
    exists: bool
    trace: Optional[Dict[str, Fraction]] = None
    # Constraint label → Farkas multiplier.
    certificate: Optional[Dict[str, Fraction]] = None

    def to_dict(self) -> dict:
        as_str = lambda d: {k: str(v) for k, v in d.items()} if d is not None else None
        return {"exists": self.exists, "trace": as_str(self.trace), "certificate": as_str(self.certificate)}


def graph_trace_constraints(g: Graph):
    """(labels_eq, eq_rows, eq_rhs, labels_ge, ge_rows, ge_rhs) over the vertex order."""
    vc = classify_vertices(g)
    n = g.n
    eq_labels: List[str] = []
    eq_rows, eq_rhs = [], []
    ge_labels: List[str] = []
    ge_rows, ge_rhs = [], []

    for i, v in enumerate(g.vertices):
        if v in vc.regular:
            row = [-Fraction(int(x)) for x in g.mult[i]]
            row[i] += 1
            eq_labels.append(f"flow({v})")
            eq_rows.append(row)
            eq_rhs.append(Fraction(0))
        elif v in vc.infinite_emitters:
            row = [Fraction(0)] * n
            row[i] += 1
            for j, x in enumerate(g.mult[i]):
                if is_inf(x):
                    vanish = [Fraction(int(t == j)) for t in range(n)]
                    eq_labels.append(f"vanish({v}->{g.vertices[j]})")
                    eq_rows.append(vanish)
                    eq_rhs.append(Fraction(0))
                else:
                    row[j] -= x
            ge_labels.append(f"emit({v})")
            ge_rows.append(row)
            ge_rhs.append(Fraction(0))

    eq_labels.append("normalization")
    eq_rows.append([Fraction(1)] * n)
    eq_rhs.append(Fraction(1))
    return eq_labels, eq_rows, eq_rhs, ge_labels, ge_rows, ge_rhs


def graph_trace_feasibility(g: Graph) -> GraphTraceResult:
    """Is there a nonzero bounded graph trace (normalized to total mass 1)?"""
    eq_labels, eq_rows, eq_rhs, ge_labels, ge_rows, ge_rhs = graph_trace_constraints(g)
    res = find_feasible_point(g.n, eq_rows, eq_rhs, ge_rows, ge_rhs)
    if res.feasible:
        return GraphTraceResult(True, trace=dict(zip(g.vertices, res.x)))
    labels = eq_labels + ge_labels
    cert = {lab: y for lab, y in zip(labels, res.certificate) if y != 0}
    logger.info("No graph trace; certificate uses %d constraints", len(cert))
    return GraphTraceResult(False, certificate=cert)
