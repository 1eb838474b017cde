import itertools
import random

import pytest

from cstarkit import config
from cstarkit.classify import (
    TwoVertexParams,
    classify_many,
    decide_pair,
    decide_theorem_5_1,
    decide_two_vertex,
    decide_unique_ideal,
    graphs_isomorphic,
    two_vertex_case,
    unit_orbit_eq,
)
from cstarkit.errors import PreconditionError, ScopeError
from cstarkit.extensions import ShortExactSequence, ses_isomorphic
from cstarkit.graph import INF, Graph, parse_graph
from cstarkit.groups import GroupHom
from cstarkit.ktheory import assemble_k_six, k_groups
from cstarkit.smith import IntMatrix
from cstarkit.verdict import Answer

from conftest import two_vertex

CHAIN = "vertices: u v w\nedge u v 1\nedge v w 1"


def _params(a, b, d):
    return TwoVertexParams.from_graph(two_vertex(a, b, d))


# ── Unit congruences ───────────────────────────────────────────────────────


def test_unit_orbit_eq():
    assert unit_orbit_eq(2, 1, 3) == (True, 2)
    assert unit_orbit_eq(1, 2, 4) == (False, None)
    assert unit_orbit_eq(3, -3, 0) == (True, -1)
    assert unit_orbit_eq(3, 2, 0) == (False, None)
    with pytest.raises(PreconditionError):
        unit_orbit_eq(1, 1, -1)


def test_params_put_the_zero_corner_below():
    P = TwoVertexParams.from_graph(Graph.from_matrix([[3, 0], [2, 4]]))
    assert (P.a, P.b, P.c, P.d, P.swapped) == (4, 2, 0, 3, True)
    assert P.to_dict()["swapped"] is True


def test_decide_unique_ideal_congruence():
    v = decide_theorem_5_1(_params(4, 1, 0), _params(4, 2, 0))
    assert v.answer == Answer.YES and v.witness["z"] == 2

    v = decide_theorem_5_1(_params(4, 1, 0), _params(4, 3, 0))
    assert v.answer == Answer.NO and v.obstruction["modulus"] == 3

    v = decide_theorem_5_1(_params(4, 1, 4), _params(4, 2, 4))
    assert v.answer == Answer.YES
    assert (v.witness["z1"] * 1 - v.witness["z2"] * 2) % 3 == 0

    assert decide_theorem_5_1(_params(0, INF, 3), _params(0, INF, 3)).answer == Answer.YES
    assert decide_theorem_5_1(_params(INF, 2, 3), _params(INF, 5, 3)).answer == Answer.YES

    v = decide_theorem_5_1(_params(4, 1, 0), _params(5, 1, 0))
    assert v.answer == Answer.NO and v.obstruction["condition"] == "a = a'"
    v = decide_theorem_5_1(_params(4, 1, 0), _params(4, 1, 2))
    assert v.answer == Answer.NO and v.obstruction["condition"] == "d = d'"


def test_decide_unique_ideal_congruence_rejects_other_matrices():
    with pytest.raises(PreconditionError):
        decide_theorem_5_1(_params(4, 1, 0), _params(0, 1, 0))
    with pytest.raises(PreconditionError):
        decide_theorem_5_1(_params(1, 1, 0), _params(1, 1, 0))


def test_decide_unique_ideal_congruence_search_bound(default_config, monkeypatch):
    monkeypatch.setattr(config, "MAX_UNIT_PAIRS", 4)
    v = decide_theorem_5_1(_params(4, 1, 4), _params(4, 2, 4))
    assert v.answer == Answer.UNKNOWN


# ── Two-vertex graphs ──────────────────────────────────────────────────────


@pytest.mark.parametrize(
    "rows, case",
    [
        ([[2, 1], [1, 2]], "i"),
        ([[0, 2], [0, 0]], "ii"),
        ([[4, 1], [0, 0]], "iii"),
        ([[3, INF], [0, 5]], "iv"),
        ([[2, 0], [0, 3]], "v"),
    ],
)
def test_two_vertex_case(rows, case):
    assert two_vertex_case(TwoVertexParams.from_graph(Graph.from_matrix(rows))) == case


def test_decide_two_vertex(fourex):
    v = decide_two_vertex(fourex[0], fourex[1])
    assert v.answer == Answer.YES
    assert v.route == "two-vertex case (iii): unique ideal congruence"
    assert decide_two_vertex(fourex[0], fourex[2]).answer == Answer.NO

    v = decide_two_vertex(two_vertex(2, 0, 3), two_vertex(3, 0, 2))
    assert v.answer == Answer.YES and v.witness["swapped"] is True

    v = decide_two_vertex(two_vertex(2, 1, 2, c=1), two_vertex(3, 1, 3, c=1))
    assert v.answer == Answer.NO and v.route == "two-vertex case (i)"

    assert decide_two_vertex(two_vertex(0, 2, 0), two_vertex(0, 5, 0)).answer == Answer.YES
    assert decide_two_vertex(two_vertex(3, INF, 5), two_vertex(3, INF, 5)).answer == Answer.YES
    assert decide_two_vertex(two_vertex(3, INF, 5), two_vertex(3, INF, 4)).answer == Answer.NO

    v = decide_two_vertex(two_vertex(2, 0, 3), fourex[0])
    assert v.answer == Answer.NO and v.route == "two-vertex cases"


def test_decide_two_vertex_needs_condition_k():
    with pytest.raises(ScopeError):
        decide_two_vertex(two_vertex(1, 1, 1), two_vertex(1, 1, 1))
    with pytest.raises(PreconditionError):
        decide_two_vertex(Graph.from_matrix([[2]]), two_vertex(4, 1, 0))


# ── General routes ─────────────────────────────────────────────────────────


def test_decide_unique_ideal_agrees_with_the_congruence(fourex):
    for g, g2 in itertools.combinations(fourex, 2):
        v = decide_unique_ideal(g, g2)
        assert v.route.startswith("unique ideal K_six [1∞]")
        assert v.answer == decide_pair(g, g2).answer


def test_decide_pair_largest_af_ideal(corner_pair):
    E, E_prime = corner_pair
    v = decide_pair(E, E_prime)
    assert v.answer == Answer.YES
    assert v.route == "largest AF ideal"
    assert len(v.witness["corners"]) == 2

    M, M2 = k_groups(E)[0], k_groups(E_prime)[0]
    beta = GroupHom(M, M2, IntMatrix.from_rows(v.witness["beta_presentation"]))
    expected = GroupHom(M, M2, IntMatrix.from_rows([[1, 0, 1], [0, 1, 1], [0, 0, 1]]))
    assert beta.equals(expected)
    assert beta.is_isomorphism()


def test_decide_pair_condition_k_fails():
    v = decide_pair(two_vertex(1, 1, 1), two_vertex(4, 1, 0))
    assert v.answer == Answer.UNKNOWN
    assert v.route == "Condition (K) fails"


def test_decide_pair_lattices_differ(corner_pair):
    v = decide_pair(corner_pair[0], parse_graph(CHAIN))
    assert v.answer == Answer.NO
    assert v.obstruction["mismatch"] == "ideal lattices differ"


def test_decide_pair_simple():
    v = decide_pair(Graph.from_matrix([[2]]), Graph.from_matrix([[3]]))
    assert v.answer == Answer.NO and v.route == "simple purely infinite"
    assert decide_pair(Graph.from_matrix([[3]]), Graph.from_matrix([[3]])).answer == Answer.YES
    v = decide_pair(Graph.from_matrix([[0]]), parse_graph(CHAIN))
    assert v.answer == Answer.YES and v.route == "simple AF"


def test_decide_pair_out_of_scope(default_config, monkeypatch):
    monkeypatch.setattr(config, "MAX_VERTICES", 3)
    g = Graph.from_matrix([[0] * 4 for _ in range(4)])
    v = decide_pair(g, g)
    assert v.answer == Answer.UNKNOWN
    assert v.route.startswith("out of scope:")


def test_graphs_isomorphic():
    g = two_vertex(4, 1, 0)
    assert graphs_isomorphic(g, g) == ("v", "w")
    assert graphs_isomorphic(g, g.reordered(["w", "v"])) is not None
    assert graphs_isomorphic(g, two_vertex(4, 2, 0)) is None


def test_graphs_isomorphic_respects_the_vertex_bound(default_config, monkeypatch):
    g = two_vertex(4, 1, 0)
    monkeypatch.setattr(config, "MAX_ISOMORPHISM_VERTICES", 1)
    assert graphs_isomorphic(g, g) is None
    h = Graph.from_matrix([[2]])
    assert graphs_isomorphic(h, h) == ("v",)
    v = decide_unique_ideal(two_vertex(0, INF, 0), two_vertex(0, INF, 0))
    assert v.answer == Answer.UNKNOWN
    assert "middle order not verified" in v.route


def test_classify_many_keeps_input_order(fourex):
    pairs = [(fourex[i], fourex[j]) for i in range(3) for j in range(3)]
    verdicts = classify_many(pairs, workers=3)
    expected = [decide_pair(g, g2) for g, g2 in pairs]
    assert [(v.answer, v.route) for v in verdicts] == [(v.answer, v.route) for v in expected]


def test_classify_many_accepts_a_custom_decider(fourex):
    pairs = [(fourex[0], fourex[1]), (fourex[0], fourex[2])]
    verdicts = classify_many(pairs, workers=1, decide=decide_unique_ideal)
    assert [v.answer for v in verdicts] == [Answer.YES, Answer.NO]


# ── Sweeps ─────────────────────────────────────────────────────────────────

FAMILY_DIAGONAL = [0, 2, 3, 4, 5, 6, 7, 8, INF]
FAMILY_B = list(range(1, 11)) + [INF]


def _family(diagonal=FAMILY_DIAGONAL, off_diagonal=FAMILY_B):
    for a, d, b in itertools.product(diagonal, diagonal, off_diagonal):
        if two_vertex_case(_params(a, b, d)) == "iii":
            yield a, d, b


def _by_diagonal(members):
    groups = {}
    for a, d, b in members:
        groups.setdefault((a, d), []).append(b)
    return groups


def _member_graph(a, d, b):
    return two_vertex(a, b, d)


def _same_class(a, d, b, b2):
    return decide_theorem_5_1(_params(a, b, d), _params(a, b2, d)).answer == Answer.YES


def test_family_covers_every_diagonal():
    groups = _by_diagonal(_family())
    assert set(groups) == set(itertools.product(FAMILY_DIAGONAL, repeat=2))
    assert groups[(0, 5)] == [INF]
    assert len(groups[(INF, 3)]) == len(FAMILY_B)
    assert len(groups[(4, 4)]) == len(FAMILY_B) - 1


@pytest.mark.slow
def test_congruence_matches_ext_orbits():
    sequences = {}
    for a, d, b in _family():
        g = two_vertex(a, b, d)
        sequences[(a, d, b)] = ShortExactSequence.from_k_six(assemble_k_six(g, {"w"}))
    compared = 0
    for (a, d), bs in _by_diagonal(sequences).items():
        for b, b2 in itertools.product(bs, repeat=2):
            by_congruence = decide_theorem_5_1(_params(a, b, d), _params(a, b2, d))
            by_orbits = ses_isomorphic(sequences[(a, d, b)], sequences[(a, d, b2)])
            assert Answer.UNKNOWN not in (by_congruence.answer, by_orbits.answer), (a, d, b, b2)
            assert by_congruence.answer == by_orbits.answer, (a, d, b, b2)
            compared += 1
    assert compared == 7398


@pytest.mark.slow
def test_congruence_is_an_equivalence_relation():
    for (a, d), bs in _by_diagonal(_family()).items():
        for b in bs:
            assert _same_class(a, d, b, b)
        for b, b2 in itertools.product(bs, repeat=2):
            assert _same_class(a, d, b, b2) == _same_class(a, d, b2, b)
        for b, b2, b3 in itertools.product(bs, repeat=3):
            if _same_class(a, d, b, b2) and _same_class(a, d, b2, b3):
                assert _same_class(a, d, b, b3), (a, d, b, b2, b3)


SMALL_DIAGONAL = [0, 2, 3, 5, INF]
SMALL_B = [1, 2, 4, 6, INF]


@pytest.mark.parametrize("a,d", list(itertools.product(SMALL_DIAGONAL, repeat=2)))
def test_congruence_and_k_six_routes_agree(a, d):
    members = list(_family(SMALL_DIAGONAL, SMALL_B))
    here = [(x, y, b) for x, y, b in members if (x, y) == (a, d)]
    others = [next(m for m in members if m[:2] == key) for key in itertools.product(SMALL_DIAGONAL, repeat=2)]
    for left, right in itertools.chain(itertools.product(here, repeat=2), ((here[0], o) for o in others)):
        g, g2 = _member_graph(*left), _member_graph(*right)
        by_congruence = decide_theorem_5_1(TwoVertexParams.from_graph(g), TwoVertexParams.from_graph(g2))
        by_k_six = decide_unique_ideal(g, g2)
        assert by_k_six.answer != Answer.UNKNOWN, (left, right)
        assert by_congruence.answer == by_k_six.answer, (left, right)

        forward, backward = decide_pair(g, g2), decide_pair(g2, g)
        assert forward.answer == backward.answer == by_congruence.answer, (left, right)


def test_decide_pair_is_symmetric_on_random_two_vertex_graphs():
    rng = random.Random(61)
    values = [0, 1, 2, INF]
    for _ in range(400):
        g = two_vertex(*(rng.choice(values) for _ in range(3)), c=rng.choice(values))
        g2 = two_vertex(*(rng.choice(values) for _ in range(3)), c=rng.choice(values))
        assert decide_pair(g, g2).answer == decide_pair(g2, g).answer, (g.mult, g2.mult)
