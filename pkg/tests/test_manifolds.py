"""Expression algebra: canonical forms, homology, E-irreducibility."""

import random
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_component, random_expression
from roundflow.manifolds import (
    E,
    S3,
    AbelianGroup,
    ConnectedSum,
    EIrreducibility,
    ExprParseError,
    Expression,
    NonCoprimeParameters,
    UnsupportedOpaquePiece,
    betti1,
    connected_sum,
    expression,
    format_expression,
    h1,
    h1_oracle,
    invariant_factors,
    is_E_irreducible,
    lens,
    normalize,
    normalize_sum,
    parse_expression,
    smith_normal_form,
    surg,
)


def expr(text: str) -> Expression:
    return parse_expression(text)


def lens_orbit_oracle(p: int, q: int) -> int:
    # Independent equivalence oracle: q' ~ q iff q' = +-q^{+-1} mod p.
    q = q % p
    candidates = set()
    for s in (q, p - q):
        candidates.add(s % p)
        candidates.add(pow(s, -1, p))
    candidates |= {(p - c) % p for c in set(candidates)}
    return min(c for c in candidates if c != 0) if p > 1 else 0


# ---------------------------------------------------------------------------
# normalize


def test_normalize_drops_trivial_lens_and_s3_summands():
    assert normalize(expr("L(1,7)#E")) == expr("E")


def test_normalize_rewrites_zero_lens_to_e():
    assert normalize(expr("L(0,1)")) == expr("E")


def test_normalize_lens_orbit_representative():
    assert lens_orbit_oracle(5, 3) == 2
    assert normalize(expr("L(5,3)")) == expr("L(5,2)")


def test_normalize_lens_orbit_matches_oracle_on_small_range():
    for p in range(2, 30):
        for q in range(1, p):
            if gcd(p, q) != 1:
                continue
            got = normalize(expression(connected_sum(lens(p, q))))
            want = lens_orbit_oracle(p, q)
            assert got.components[0].summands[0].q == want, (p, q)


def test_normalize_negative_lens_params():
    # L(-p,q) is the mirror L(p, p - q mod p); orientation never matters here.
    assert normalize(expr("L(-5,3)")) == normalize(expr("L(5,2)"))
    assert normalize(expr("L(5,-3)")) == normalize(expr("L(5,2)"))


def test_normalize_surgered_identity_and_sign():
    assert normalize(expr("Surg(S3,0,1)")) == expr("S3")
    assert normalize(expr("Surg(E,0,-1)")) == expr("E")
    assert normalize(expr("Surg(S3,-1,0)")) == expr("Surg(S3,1,0)")
    # Non-identity homology spheres stay wrapped.
    assert normalize(expr("Surg(S3,3,1)")) == expr("Surg(S3,3,1)")


def test_normalize_noncoprime_rejected():
    with pytest.raises(NonCoprimeParameters):
        normalize(expr("L(4,2)"))
    with pytest.raises(NonCoprimeParameters):
        normalize(expr("Surg(S3,0,0)"))
    with pytest.raises(NonCoprimeParameters):
        normalize(expr("L(0,5)"))


# ---------------------------------------------------------------------------
# betti1 / h1 / h1_oracle


def test_betti_of_e():
    assert betti1(normalize(expr("E"))) == (1,)


def test_betti_of_union():
    values = betti1(normalize(expr("L(5,2) | E#E")))
    assert sorted(v for v in values) == [0, 2]


def test_betti_of_surgered_sphere():
    assert betti1(normalize(expr("Surg(S3,5,2)"))) == (0,)


def test_betti_of_zero_framed_surgery_is_certain():
    # H1 = Z in both resolutions of the dichotomy, so beta_1 = 1 is certain.
    assert betti1(normalize(expr("Surg(S3,1,0)"))) == (1,)


def test_betti_unknown_for_opaque_pieces():
    assert betti1(normalize(expr("Surg(E,5,2)"))) == (None,)


def test_h1_lens_sum():
    (g,) = h1(normalize(expr("L(5,2)#L(3,1)")))
    assert g == AbelianGroup(True, 0, (15,))


def test_h1_trivial_sphere():
    (g,) = h1(normalize(expr("S3")))
    assert g == AbelianGroup(True, 0, ())


def test_h1_surgered_sphere():
    (g,) = h1(normalize(expr("Surg(S3,7,3)")))
    assert g == AbelianGroup(True, 0, (3,))


def test_h1_oracle_examples():
    (g,) = h1_oracle(normalize(expr("L(4,1)#E")))
    assert g == AbelianGroup(True, 1, (4,))
    (g,) = h1_oracle(normalize(expr("L(2,1)#L(2,1)")))
    assert g == AbelianGroup(True, 0, (2, 2))
    (g,) = h1_oracle(normalize(expr("S3")))
    assert g == AbelianGroup(True, 0, ())


def test_h1_oracle_rejects_opaque_pieces():
    with pytest.raises(UnsupportedOpaquePiece):
        h1_oracle(normalize(expr("Surg(E,5,2)")))


def test_h1_unnormalized_input_agrees_with_normalized():
    e = expr("L(1,3)#E | L(0,1)")
    assert h1(e) == h1(normalize(e))


def test_invariant_factors_divisibility():
    free, tors = invariant_factors([5, 3])
    assert (free, tors) == (0, (15,))
    free, tors = invariant_factors([0, 4, 6])
    assert (free, tors) == (1, (2, 12))
    assert invariant_factors([]) == (0, ())


def test_smith_normal_form_known_matrices():
    assert smith_normal_form([[2, 4], [6, 8]]) == [2, 4]
    assert smith_normal_form([[5, 0], [0, 3]]) == [1, 15]
    assert smith_normal_form([[1, 1], [1, 1]]) == [1, 0]
    assert smith_normal_form([[0]]) == [0]
    assert smith_normal_form([[6]]) == [6]


def _det(matrix):
    if len(matrix) == 1:
        return matrix[0][0]
    total = 0
    for j in range(len(matrix)):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        total += (-1) ** j * matrix[0][j] * _det(minor)
    return total


def _determinantal_divisor(matrix, k):
    import itertools

    rows, cols = len(matrix), len(matrix[0])
    minors = []
    for ri in itertools.combinations(range(rows), k):
        for ci in itertools.combinations(range(cols), k):
            minors.append(abs(_det([[matrix[i][j] for j in ci] for i in ri])))
    g = 0
    for m in minors:
        g = gcd(g, m)
    return g


@settings(max_examples=150)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.data(),
)
def test_smith_normal_form_matches_determinantal_divisors(rows, cols, data):
    # d_1 * ... * d_k equals the gcd of all k x k minors, the classical
    # characterization of the invariant factors.
    matrix = [
        [data.draw(st.integers(-6, 6)) for _ in range(cols)] for _ in range(rows)
    ]
    diag = smith_normal_form(matrix)
    assert len(diag) == min(rows, cols)
    nonzero = [d for d in diag if d != 0]
    assert diag == nonzero + [0] * (len(diag) - len(nonzero))
    for i in range(len(nonzero) - 1):
        assert nonzero[i + 1] % nonzero[i] == 0
    product = 1
    for k, d in enumerate(nonzero, start=1):
        product *= d
        assert product == _determinantal_divisor(matrix, k), (matrix, diag, k)
    if len(nonzero) < len(diag):
        assert _determinantal_divisor(matrix, len(nonzero) + 1) == 0


# ---------------------------------------------------------------------------
# is_E_irreducible


def test_e_is_not_e_irreducible():
    assert is_E_irreducible(connected_sum(E)) is EIrreducibility.NO


def test_lens_is_e_irreducible():
    assert is_E_irreducible(connected_sum(lens(5, 2))) is EIrreducibility.YES


def test_unit_surgery_branch_value():
    assert is_E_irreducible(connected_sum(surg("S3", 1, 0))) is EIrreducibility.E_OR_IRREDUCIBLE
    assert (
        is_E_irreducible(connected_sum(surg("S3", 1, 0)), assume_unit_surgery_irreducible=True)
        is EIrreducibility.YES
    )


def test_compound_certainties():
    assert is_E_irreducible(connected_sum(lens(5, 2), surg("S3", 7, 3))) is EIrreducibility.YES
    assert is_E_irreducible(connected_sum(surg("E", 2, 1))) is EIrreducibility.UNKNOWN
    assert is_E_irreducible(connected_sum(E, surg("E", 2, 1))) is EIrreducibility.NO
    assert is_E_irreducible(connected_sum(E, E)) is EIrreducibility.NO
    # Two unresolved unit surgeries force beta_1 = 2 in every resolution.
    assert is_E_irreducible(connected_sum(surg("S3", 1, 0), surg("S3", 1, 0))) is EIrreducibility.NO


# ---------------------------------------------------------------------------
# Randomized properties

_pq = st.tuples(st.integers(-20, 20), st.integers(-20, 20)).filter(
    lambda t: gcd(abs(t[0]), abs(t[1])) == 1
)
_prime = st.one_of(
    st.just(S3),
    st.just(E),
    _pq.map(lambda t: lens(*t)),
    _pq.map(lambda t: surg("S3", *t)),
    _pq.map(lambda t: surg("E", *t)),
)
_component = st.lists(_prime, min_size=1, max_size=6).map(ConnectedSum.of)
_expression = st.lists(_component, min_size=1, max_size=3).map(Expression.of)


@given(_expression)
def test_normalize_idempotent(e):
    once = normalize(e)
    assert normalize(once) == once


@given(_expression, st.randoms())
def test_normalize_permutation_invariant(e, rng):
    shuffled_components = []
    for comp in e.components:
        summands = list(comp.summands)
        rng.shuffle(summands)
        shuffled_components.append(ConnectedSum(tuple(summands)))
    rng.shuffle(shuffled_components)
    assert normalize(Expression(tuple(shuffled_components))) == normalize(e)


@settings(max_examples=200)
@given(st.lists(st.one_of(st.just(S3), st.just(E), _pq.map(lambda t: lens(*t)),
                           _pq.map(lambda t: surg("S3", *t))), min_size=1, max_size=6))
def test_h1_matches_snf_oracle(summands):
    e = normalize(expression(ConnectedSum.of(summands)))
    assert h1(e) == h1_oracle(e)


@given(_component)
def test_h1_commutes_with_normalize(comp):
    # A known group is never changed (or forgotten) by normalization; an
    # unknown one may become known when an identity surgery collapses, e.g.
    # Surg(E,0,1) -> E.
    (before,) = h1(expression(comp))
    (after,) = h1(expression(normalize_sum(comp)))
    if before.known:
        assert after == before


@given(st.lists(st.one_of(st.just(S3), st.just(E), _pq.map(lambda t: lens(*t)),
                           _pq.map(lambda t: surg("S3", *t))), min_size=1, max_size=6))
def test_betti_additive_over_connected_sum(summands):
    comp = ConnectedSum.of(summands)
    (total,) = betti1(expression(comp))
    parts = [betti1(expression(connected_sum(s)))[0] for s in summands]
    assert total == sum(parts)


@given(_component)
def test_e_summand_forces_reducible(comp):
    if E in comp.summands:
        assert is_E_irreducible(comp) is EIrreducibility.NO


def test_random_generators_cover_seeded_corpus():
    rng = random.Random(20240817)
    for _ in range(50):
        e = random_expression(rng)
        assert normalize(normalize(e)) == normalize(e)
        comp = random_component(rng)
        assert isinstance(is_E_irreducible(comp), EIrreducibility)


# ---------------------------------------------------------------------------
# Grammar


def test_parse_round_trip_examples():
    for text in ["S3", "E", "L(5,2)", "Surg(S3,1,0)", "L(5,2)#E | Surg(S3,1,0)"]:
        e = parse_expression(text)
        assert parse_expression(format_expression(e)) == e


def test_parse_whitespace_insignificant():
    assert parse_expression(" L( 5 , 2 )  #E|S3 ") == parse_expression("L(5,2)#E | S3")


@given(_expression)
def test_parse_serialize_round_trip(e):
    assert parse_expression(format_expression(e)) == e


def test_parse_errors_carry_column():
    with pytest.raises(ExprParseError) as info:
        parse_expression("L(5,2")
    assert info.value.column == 6
    with pytest.raises(ExprParseError) as info:
        parse_expression("L(5,2) ! E")
    assert info.value.column == 8
    with pytest.raises(ExprParseError) as info:
        parse_expression("Surg(L,1,2)")
    assert info.value.column == 6
    with pytest.raises(ExprParseError):
        parse_expression("")
