"""Backward surgery moves and the exhaustive boundary-chain certification."""

import pytest

from roundflow.manifolds import (
    E,
    S3,
    EIrreducibility,
    NonCoprimeParameters,
    connected_sum,
    copies_of_e,
    expression,
    h1,
    h1_oracle,
    is_E_irreducible,
    lens,
    normalize,
    parse_expression,
    surg,
)
from roundflow.surgery import (
    BRANCHED,
    DIVIDING,
    ELIMINATED,
    NONDIVIDING,
    SURVIVES,
    IllFormedMove,
    OpaqueBase,
    SurgeryMove,
    classify_candidate,
    enumerate_moves,
    surger_backward,
    verify_compr,
)

E_EXPR = copies_of_e(1)


def test_dividing_split_disk_side_e():
    move = SurgeryMove(0, DIVIDING, 5, 2, connected_sum(S3), connected_sum(E))
    result = surger_backward(E_EXPR, move)
    assert result.result == parse_expression("L(5,2) | Surg(E,5,2)")
    assert "L(5,2)" in result.solid_torus_note


def test_dividing_split_disk_side_s3():
    move = SurgeryMove(0, DIVIDING, 5, 2, connected_sum(E), connected_sum(S3))
    result = surger_backward(E_EXPR, move)
    assert result.result == normalize(parse_expression("L(5,2)#E | Surg(S3,5,2)"))


def test_nondividing_identity_surgery():
    move = SurgeryMove(0, NONDIVIDING, 0, 1, a2=connected_sum(S3))
    result = surger_backward(E_EXPR, move)
    assert result.result == E_EXPR
    # Cross-check: the resulting component has trivial torsion either way.
    assert all(g.torsion == () for g in h1_oracle(result.result))


def test_ill_formed_split_rejected():
    move = SurgeryMove(0, DIVIDING, 5, 2, connected_sum(E), connected_sum(E))
    with pytest.raises(IllFormedMove):
        surger_backward(E_EXPR, move)


def test_nondividing_needs_e_summand():
    move = SurgeryMove(0, NONDIVIDING, 2, 1, a2=connected_sum(S3))
    with pytest.raises(IllFormedMove):
        surger_backward(expression(connected_sum(lens(3, 1))), move)


def test_opaque_disk_side_rejected():
    lens_comp = connected_sum(lens(3, 1), lens(5, 2))
    move = SurgeryMove(0, DIVIDING, 2, 1, connected_sum(lens(3, 1)), connected_sum(lens(5, 2)))
    with pytest.raises(OpaqueBase):
        surger_backward(expression(lens_comp), move)


def test_noncoprime_slope_rejected():
    move = SurgeryMove(0, DIVIDING, 2, 4, connected_sum(S3), connected_sum(E))
    with pytest.raises(NonCoprimeParameters):
        surger_backward(E_EXPR, move)


# ---------------------------------------------------------------------------
# enumerate_moves


def test_enumeration_contains_identity_move():
    moves = enumerate_moves(E_EXPR, 1)
    identities = [
        (mv, res)
        for mv, res in moves
        if mv.case == NONDIVIDING and (mv.p, mv.q) == (0, 1) and res.result == E_EXPR
    ]
    assert identities


def test_enumeration_bound_two_shapes():
    results = {str(res.result) for _, res in enumerate_moves(E_EXPR, 2)}
    assert "L(2,1) | Surg(E,2,1)" in results
    assert "E#L(2,1) | Surg(S3,2,1)" in results
    assert "L(2,1)#Surg(S3,2,1)" in results


def test_enumeration_components_independent():
    single = enumerate_moves(E_EXPR, 1)
    double = enumerate_moves(copies_of_e(2), 1)
    assert len(double) == 2 * len(single)


def test_component_count_law():
    for bound in (1, 2, 3):
        for mv, res in enumerate_moves(copies_of_e(2), bound):
            delta = len(res.result.components) - 2
            assert delta == (1 if mv.case == DIVIDING else 0), mv.describe()


def test_h1_consistency_on_move_results():
    for _, res in enumerate_moves(E_EXPR, 4):
        if any(s.kind == "Surg" and s.base == "E" for c in res.result.components for s in c.summands):
            continue
        assert h1(res.result) == h1_oracle(res.result)


IRREDUCIBLE_CATALOG = [
    connected_sum(S3),
    connected_sum(lens(2, 1)),
    connected_sum(lens(5, 2)),
    connected_sum(surg("S3", 5, 2)),
    connected_sum(surg("S3", 1, 1)),
    connected_sum(lens(3, 1), lens(4, 1)),
    connected_sum(lens(5, 2), surg("S3", 7, 3)),
]


def test_ene_propagation_on_catalog():
    # Surgering an E-irreducible component always leaves an E-irreducible
    # component somewhere in the result.
    for comp in IRREDUCIBLE_CATALOG:
        assert is_E_irreducible(comp) is EIrreducibility.YES
        for padding in (0, 1):
            source = expression(comp, *[connected_sum(E)] * padding)
            moves = enumerate_moves(source, 5)
            assert moves
            for mv, res in moves:
                verdicts = [is_E_irreducible(c) for c in res.result.components]
                assert EIrreducibility.YES in verdicts, (str(source), mv.describe(), str(res.result))


# ---------------------------------------------------------------------------
# classify_candidate


def test_classify_all_e_survives():
    assert classify_candidate(copies_of_e(3)).status == SURVIVES


def test_classify_eliminates_lens():
    verdict = classify_candidate(parse_expression("L(5,2) | E"))
    assert verdict.status == ELIMINATED
    assert "is_E_irreducible(L(5,2)) = true" in verdict.predicate


def test_classify_branches_unit_surgery():
    verdict = classify_candidate(parse_expression("E | Surg(S3,1,0)"))
    assert verdict.status == BRANCHED
    assert [b.resolution for b in verdict.branches] == ["as E", "as E-irreducible"]
    assert verdict.branches[0].verdict.status == SURVIVES
    assert verdict.branches[0].verdict.expr == copies_of_e(2)
    assert verdict.branches[1].verdict.status == ELIMINATED
    assert verdict.closed()
    assert verdict.survivors() == [copies_of_e(2)]


def test_classify_counterexample_on_unclassifiable():
    verdict = classify_candidate(parse_expression("Surg(E,3,2)"))
    assert verdict.status == "COUNTEREXAMPLE"
    assert not verdict.closed()


# ---------------------------------------------------------------------------
# verify_compr


def test_compr_trivial_chain():
    cert = verify_compr(1, 0, 3)
    assert cert.success
    assert cert.stages == ()
    assert cert.survivors == ((copies_of_e(1),),)
    assert "Q-chain anchor: E" in cert.render()


def test_compr_one_saddle_examined_shapes():
    cert = verify_compr(1, 1, 3)
    assert cert.success
    assert not cert.counterexamples
    text = cert.render()
    assert "L(2,1) | Surg(E,2,1)" in text
    assert "E#L(2,1) | Surg(S3,2,1)" in text
    assert "L(2,1)#Surg(S3,2,1)" in text
    assert "branch as E" in text and "branch as E-irreducible" in text


def test_compr_two_attractors_survivor_counts():
    cert = verify_compr(2, 1, 2)
    assert cert.success
    assert set(cert.survivors[0]) == {copies_of_e(1)}
    assert set(cert.survivors[1]) == {copies_of_e(1), copies_of_e(2)}


def test_compr_every_elimination_names_the_predicate():
    cert = verify_compr(2, 2, 3)

    def walk(verdict):
        if verdict.status == ELIMINATED:
            assert "is_E_irreducible" in verdict.predicate
        for b in verdict.branches:
            walk(b.verdict)

    for record in cert.stages:
        for _, verdict in record.candidates:
            walk(verdict)


def test_compr_rejects_bad_counts():
    with pytest.raises(ValueError):
        verify_compr(3, 1, 2)
    with pytest.raises(ValueError):
        verify_compr(0, 0, 2)
