import itertools
import random

import pytest

from cstarkit import config
from cstarkit.errors import PreconditionError, ScopeError
from cstarkit.graph import INF, Graph, classify_vertices, format_graph, parse_graph
from cstarkit.structure import (
    AdmissiblePair,
    CaseTag,
    breaking_vertices,
    case_tag,
    condition_K,
    corner_witness,
    cycle_with_entry,
    entrance_paths,
    has_cycle,
    hasse_diagram,
    hereditary_closure,
    ideal_lattice,
    ideal_subgraph,
    is_hereditary,
    is_largest_saturated,
    is_saturated,
    largest_proper_ideal,
    quotient_graph,
    saturate,
    saturated_hereditary_sets,
    simple_cycle_count,
    unique_ideal_structure,
)

from conftest import random_corpus, two_vertex

CHAIN = "vertices: u v w\nedge u v 1\nedge v w 1"


def _fs(*names):
    return frozenset(names)


# ── Hereditary and saturated sets ──────────────────────────────────────────


def test_hereditary_closure():
    g = two_vertex(4, 1, 0)
    assert hereditary_closure(g, {"v"}) == {"v", "w"}
    assert hereditary_closure(g, {"w"}) == {"w"}
    assert hereditary_closure(g, set()) == frozenset()


def test_saturate():
    assert saturate(parse_graph("vertices: v w\nedge v w 1"), {"w"}) == {"v", "w"}
    assert saturate(two_vertex(4, 1, 0), {"w"}) == {"w"}
    assert saturate(two_vertex(0, INF, 3), {"w"}) == {"w"}


def test_saturate_rejects_non_hereditary_sets():
    with pytest.raises(PreconditionError):
        saturate(two_vertex(4, 1, 0), {"v"})


def test_saturated_hereditary_sets():
    assert saturated_hereditary_sets(two_vertex(4, 1, 0)) == [_fs(), _fs("w"), _fs("v", "w")]
    assert saturated_hereditary_sets(two_vertex(3, 0, 5)) == [_fs(), _fs("v"), _fs("w"), _fs("v", "w")]
    assert saturated_hereditary_sets(Graph.from_matrix([[2]])) == [_fs(), _fs("v")]


def test_saturated_hereditary_sets_respects_vertex_bound(default_config, monkeypatch):
    monkeypatch.setattr(config, "MAX_VERTICES", 3)
    g = Graph.from_matrix([[0] * 4 for _ in range(4)])
    with pytest.raises(ScopeError):
        saturated_hereditary_sets(g)


def _brute_force_saturated_hereditary(g: Graph):
    n = g.n
    succ = [sum(1 << j for j in range(n) if g.mult[i][j] != 0) for i in range(n)]
    regular = [g.vertices[i] in classify_vertices(g).regular for i in range(n)]
    found = set()
    for S in range(1 << n):
        hereditary = all(succ[i] & ~S == 0 for i in range(n) if S >> i & 1)
        saturated = all(succ[i] & ~S != 0 for i in range(n) if regular[i] and not S >> i & 1)
        if hereditary and saturated:
            found.add(frozenset(g.vertices[i] for i in range(n) if S >> i & 1))
    return found


def test_saturated_hereditary_sets_match_brute_force():
    for g in random_corpus(seed=11, count=150, max_vertices=7):
        sets = saturated_hereditary_sets(g)
        assert set(sets) == _brute_force_saturated_hereditary(g)
        assert len(sets) == len(set(sets))
        assert all(is_hereditary(g, X) and is_saturated(g, X) for X in sets)


@pytest.mark.slow
def test_saturated_hereditary_sets_match_brute_force_large():
    for g in random_corpus(seed=12, count=1000, max_vertices=12):
        assert set(saturated_hereditary_sets(g)) == _brute_force_saturated_hereditary(g)


def _random_subset(rng, g):
    return frozenset(v for v in g.vertices if rng.random() < 0.3)


def test_closure_laws_on_random_graphs():
    rng = random.Random(71)
    for g in random_corpus(seed=71, count=200, max_vertices=7):
        sets = _brute_force_saturated_hereditary(g)
        X = _random_subset(rng, g)
        Y = X | _random_subset(rng, g)

        hx, hy = hereditary_closure(g, X), hereditary_closure(g, Y)
        assert X <= hx
        assert hereditary_closure(g, hx) == hx
        assert hx <= hy
        assert is_hereditary(g, hx) and is_hereditary(g, hy)

        sx, sy = saturate(g, hx), saturate(g, hy)
        assert hx <= sx
        assert saturate(g, sx) == sx
        assert sx <= sy
        assert is_hereditary(g, sx) and is_saturated(g, sx)
        assert sx == frozenset.intersection(*(S for S in sets if hx <= S))


# ── Breaking vertices and the lattice ──────────────────────────────────────


def test_breaking_vertices():
    assert breaking_vertices(two_vertex(3, INF, 5), {"w"}) == {"v"}
    assert breaking_vertices(two_vertex(0, INF, 3), {"w"}) == frozenset()
    assert breaking_vertices(two_vertex(4, 1, 0), {"w"}) == frozenset()
    # Infinitely many edges escape, so v is not breaking.
    assert breaking_vertices(two_vertex(INF, 2, 0), {"w"}) == frozenset()


def test_ideal_lattice():
    lattice = ideal_lattice(two_vertex(4, 1, 0))
    assert lattice.pairs == (
        AdmissiblePair(_fs()),
        AdmissiblePair(_fs("w")),
        AdmissiblePair(_fs("v", "w")),
    )

    lattice = ideal_lattice(two_vertex(3, INF, 5))
    assert lattice.size == 4
    assert lattice.pairs == (
        AdmissiblePair(_fs()),
        AdmissiblePair(_fs("w")),
        AdmissiblePair(_fs("w"), _fs("v")),
        AdmissiblePair(_fs("v", "w")),
    )
    assert ideal_lattice(Graph.from_matrix([[2]])).size == 2


def test_admissible_pair_order():
    a = AdmissiblePair(_fs("w"))
    b = AdmissiblePair(_fs("w"), _fs("v"))
    top = AdmissiblePair(_fs("v", "w"))
    assert a < b < top
    assert not b <= a
    assert AdmissiblePair(_fs("v")) <= top
    assert not AdmissiblePair(_fs("v")) <= AdmissiblePair(_fs("w"))


def test_hasse_diagram():
    assert hasse_diagram(ideal_lattice(two_vertex(3, INF, 5))) == [(0, 1), (1, 2), (2, 3)]
    # Disconnected: {v} and {w} are incomparable.
    assert hasse_diagram(ideal_lattice(two_vertex(3, 0, 5))) == [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_largest_proper_ideal():
    assert largest_proper_ideal(two_vertex(3, INF, 5)) == AdmissiblePair(_fs("w"), _fs("v"))
    assert largest_proper_ideal(two_vertex(3, 0, 5)) is None
    assert largest_proper_ideal(Graph.from_matrix([[2]])) == AdmissiblePair(_fs())


def test_largest_proper_ideal_needs_condition_k():
    with pytest.raises(ScopeError):
        largest_proper_ideal(two_vertex(1, 1, 1))


# ── Cycles and Condition (K) ───────────────────────────────────────────────


def test_condition_k_examples():
    assert not condition_K(Graph.from_matrix([[1]]))
    assert condition_K(Graph.from_matrix([[2]]))
    for b in (1, 2, 5):
        k = condition_K(two_vertex(1, b, 1))
        assert not k
        assert k.failing() == ["v", "w"]
    assert condition_K(parse_graph(CHAIN))


def test_simple_cycle_count_through_other_vertices():
    # v -> u -> v once: exactly one simple cycle at v and at u.
    g = parse_graph("vertices: u v\nedge u v 1\nedge v u 1")
    assert simple_cycle_count(g, "v") == 1
    # Two distinct returns v -> u -> v.
    g2 = parse_graph("vertices: u v\nedge u v 2\nedge v u 1")
    assert simple_cycle_count(g2, "v") == 2
    # A loop at u lets v return along infinitely many simple cycles.
    g3 = parse_graph("vertices: u v\nedge u v 1\nedge v u 1\nedge u u 1")
    assert simple_cycle_count(g3, "v") == 2
    assert simple_cycle_count(g3, "u") == 2


def _cap(x) -> int:
    return 2 if x == INF or x >= 2 else int(x)


def _vertex_simple_cycles(g: Graph, v: str) -> int:
    """Cycles through v with pairwise distinct intermediate vertices, by permutation, capped at 2."""
    others = [u for u in g.vertices if u != v]
    total = _cap(g.m(v, v))
    for k in range(1, len(others) + 1):
        for middle in itertools.permutations(others, k):
            route = (v,) + middle + (v,)
            weight = 1
            for s, r in zip(route, route[1:]):
                weight = min(2, weight * _cap(g.m(s, r)))
            total += weight
    return min(2, total)


def _return_paths(g: Graph, v: str) -> int:
    """Paths leaving v and returning to it exactly once, enumerated up to length 3|V|, capped at 2."""
    others = [u for u in g.vertices if u != v]
    back = {u for u in others if g.m(u, v)}
    grown = True
    while grown:
        grown = False
        for u in others:
            if u not in back and any(g.m(u, w) for w in back):
                back.add(u)
                grown = True

    limit = 3 * g.n
    total = _cap(g.m(v, v))

    def extend(u, weight, length):
        nonlocal total
        if total >= 2:
            return
        total += weight * _cap(g.m(u, v))
        if length == limit:
            return
        for w in others:
            if w in back and g.m(u, w):
                extend(w, min(2, weight * _cap(g.m(u, w))), length + 1)

    for u in others:
        if u in back and g.m(v, u):
            extend(u, _cap(g.m(v, u)), 1)
    return min(2, total)


def test_condition_k_matches_return_path_enumeration():
    for g in random_corpus(seed=21, count=300, max_vertices=6, weights=(8, 3, 1, 1)):
        k = condition_K(g)
        for v in g.vertices:
            assert k.counts[v] == _return_paths(g, v), (format_graph(g), v)
            simple = _vertex_simple_cycles(g, v)
            assert simple <= k.counts[v]
            rest = [u for u in g.vertices if u != v]
            if not rest or not has_cycle(g.induced(rest)):
                assert simple == k.counts[v], (format_graph(g), v)
        assert k.holds == all(c != 1 for c in k.counts.values())


def test_return_paths_may_repeat_intermediate_vertices():
    g = parse_graph("vertices: v u\nedge v u 1\nedge u u 1\nedge u v 1")
    assert _vertex_simple_cycles(g, "v") == 1
    assert simple_cycle_count(g, "v") == 2
    assert condition_K(g).holds


def test_has_cycle():
    assert has_cycle(two_vertex(4, 1, 0))
    assert not has_cycle(parse_graph(CHAIN))
    assert not has_cycle(two_vertex(0, INF, 0))


# ── Subgraphs and ideal structure ──────────────────────────────────────────


def test_quotient_graph():
    assert quotient_graph(two_vertex(4, 1, 0), {"w"}) == Graph(("v",), ((4,),))
    assert quotient_graph(two_vertex(0, INF, 3), {"w"}) == Graph(("v",), ((0,),))
    g = parse_graph("vertices: u v w\nedge u v 1\nedge v v 2\nedge v w 1")
    q = quotient_graph(g, {"w"})
    assert q.vertices == ("u", "v")
    assert q.edges() == [("u", "v", 1), ("v", "v", 2)]
    with pytest.raises(PreconditionError):
        quotient_graph(parse_graph(CHAIN), {"w"})


def test_ideal_subgraph():
    assert ideal_subgraph(two_vertex(4, 1, 0), {"w"}) == Graph(("w",), ((0,),))
    assert ideal_subgraph(two_vertex(0, INF, 3), {"w"}) == Graph(("w",), ((3,),))
    g = two_vertex(4, 1, 0)
    assert ideal_subgraph(g, {"v", "w"}) == g


def test_quotient_and_ideal_partition_the_edges():
    for g in random_corpus(seed=31, count=60, max_vertices=5):
        for H in saturated_hereditary_sets(g):
            if not H or H == frozenset(g.vertices):
                continue
            sub, quo = ideal_subgraph(g, H), quotient_graph(g, H)
            assert set(sub.vertices) | set(quo.vertices) == set(g.vertices)
            deleted = {(v, w) for v, w, _ in g.edges() if v not in H and w in H}
            kept = {(v, w) for v, w, _ in sub.edges()} | {(v, w) for v, w, _ in quo.edges()}
            assert kept | deleted == {(v, w) for v, w, _ in g.edges()}
            assert not kept & deleted


def test_unique_ideal_structure():
    u = unique_ideal_structure(two_vertex(4, 1, 0))
    assert u.H == {"w"}
    assert all(u.checks.values())
    assert unique_ideal_structure(two_vertex(3, INF, 5)) is None
    assert unique_ideal_structure(Graph.from_matrix([[2]])) is None


@pytest.mark.parametrize(
    "a, b, d, tag",
    [
        (4, 1, 0, CaseTag.AF_PI),
        (0, INF, 3, CaseTag.PI_AF),
        (4, 2, 4, CaseTag.PI_PI),
        (0, INF, 0, CaseTag.AF_AF),
    ],
)
def test_case_tag(a, b, d, tag):
    assert case_tag(two_vertex(a, b, d), {"w"}) == tag


def test_case_tag_needs_proper_nontrivial_h():
    with pytest.raises(PreconditionError):
        case_tag(two_vertex(4, 1, 0), set())


# ── Witnesses ──────────────────────────────────────────────────────────────


def test_cycle_with_entry_single_loop():
    wit = cycle_with_entry(two_vertex(4, 1, 0), {"w"})
    assert wit.cycle == ("v", "v")
    assert wit.entry_edge == ("v", "w")


def test_cycle_with_entry_rebases_the_cycle():
    g = parse_graph("vertices: u v w\nedge u v 1\nedge v u 1\nedge v w 1")
    wit = cycle_with_entry(g, {"w"})
    assert wit.cycle == ("v", "u", "v")
    assert wit.entry_edge == ("v", "w")


def test_cycle_with_entry_needs_a_cycle_outside_h():
    with pytest.raises(PreconditionError):
        cycle_with_entry(two_vertex(0, INF, 3), {"w"})


def test_cycle_with_entry_on_random_graphs():
    checked = 0
    for g in random_corpus(seed=73, count=600, max_vertices=6):
        for H in saturated_hereditary_sets(g):
            if not H or not is_largest_saturated(g, H):
                continue
            if not has_cycle(g.induced([v for v in g.vertices if v not in H])):
                continue
            wit = cycle_with_entry(g, H)
            cyc = wit.cycle
            assert cyc[0] == cyc[-1] == wit.base
            assert all(g.m(s, r) != 0 for s, r in zip(cyc, cyc[1:]))
            assert not set(cyc) & H
            s, r = wit.entry_edge
            assert s == wit.base and r in H and g.m(s, r) != 0
            checked += 1
    assert checked >= 10


def test_entrance_paths():
    fam = entrance_paths(two_vertex(4, 1, 0), {"w"})
    assert fam.infinite and fam.cycle == ("v", "v")

    fam = entrance_paths(two_vertex(0, INF, 0), {"w"})
    assert fam.infinite and fam.infinite_edge == ("v", "w")

    fam = entrance_paths(parse_graph("vertices: u v w\nedge u v 2\nedge v w 3\nedge u w 1"), {"w"})
    assert not fam.infinite
    # v->w (3 paths), u->w (1), u->v->w (2 * 3).
    assert fam.count == 10


def test_corner_witness():
    wit = corner_witness(two_vertex(4, 1, 0), {"w"})
    assert (wit.v, wit.w) == ("v", "w")
    assert wit.ideal_subgraph_acyclic
    assert wit.family_lengths == (1, 2, 3, 4)


def test_corner_witness_rejects_breaking_vertices():
    with pytest.raises(ScopeError):
        corner_witness(two_vertex(3, INF, 5), {"w"})
