"""
cstarkit: combinatorial and K-theoretic invariants of graph C*-algebras,
with stable-isomorphism decisions for small ideal lattices.
"""

__version__ = "0.1.0"

from .graph import Graph, INF, parse_graph, parse_matrix
from .structure import ideal_lattice, unique_ideal_structure, largest_proper_ideal
from .ktheory import assemble_k_six, k_groups
from .classify import classify_many, decide_pair
from .verdict import Answer, Verdict

__all__ = [
    "Graph",
    "INF",
    "parse_graph",
    "parse_matrix",
    "ideal_lattice",
    "unique_ideal_structure",
    "largest_proper_ideal",
    "k_groups",
    "assemble_k_six",
    "decide_pair",
    "classify_many",
    "Answer",
    "Verdict",
]
