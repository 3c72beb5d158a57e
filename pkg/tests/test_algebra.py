"""Exact arithmetic layer: fields, matrices, polynomials, jets, roots."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from terracini.algebra import (
    FieldSpec,
    Jet2,
    Matrix,
    MultiPoly,
    exact_rank,
    jet2_eval,
    normalize_point,
    subspace_intersect,
    uni_roots_mod_p,
)
from terracini.errors import ConstructionError, FieldMismatchError

from oracles import (
    jet_by_symbolic_diff,
    rank_by_minors,
    rank_by_reverse_echelon,
    random_fraction_matrix,
    roots_by_scan,
)

QQ = FieldSpec.rationals()
F1009 = FieldSpec.prime(1009)
F2003 = FieldSpec.prime(2003)


# -- field spec -------------------------------------------------------------


def test_field_spec_rejects_small_or_composite_modulus():
    with pytest.raises(ConstructionError):
        FieldSpec.prime(251)  # prime but below the floor
    with pytest.raises(ConstructionError):
        FieldSpec.prime(1000)
    with pytest.raises(ConstructionError):
        FieldSpec(kind="prime", modulus=None)
    assert FieldSpec.prime(257).modulus == 257


def test_scalar_arithmetic_and_fermat_inverse():
    a = F1009.scalar(123)
    b = F1009.scalar(456)
    assert (a * b).value == 123 * 456 % 1009
    assert (a / b * b) == a
    assert (a - a).value == 0
    inv = F1009.scalar(2).inverse()
    assert (inv * 2).value == 1
    with pytest.raises(ZeroDivisionError):
        F1009.zero.inverse()


def test_scalar_field_mismatch_raises():
    with pytest.raises(FieldMismatchError):
        F1009.one + F2003.one
    with pytest.raises(FieldMismatchError):
        QQ.one * F1009.one


def test_rational_scalars_are_fractions():
    x = QQ.scalar(3) / QQ.scalar(7)
    assert x.value == Fraction(3, 7)
    assert (x * 7).value == 3


# -- matrices ---------------------------------------------------------------


def test_rank_matches_minor_expansion_oracle_over_rationals():
    # pinned random 5x7 instance, full-rank and low-rank variants
    rng = random.Random(1201)
    raw = random_fraction_matrix(rng, 5, 7)
    m = Matrix.from_rows(QQ, raw)
    assert exact_rank(m) == rank_by_minors(raw)

    raw_low = random_fraction_matrix(rng, 5, 7, rank_target=3)
    m_low = Matrix.from_rows(QQ, raw_low)
    assert rank_by_minors(raw_low) == 3
    assert exact_rank(m_low) == 3


def test_rank_matches_independent_echelon_over_prime_field():
    rng = random.Random(77)
    raw = [[rng.randrange(1009) for _ in range(7)] for _ in range(5)]
    m = Matrix.from_rows(F1009, raw)
    assert exact_rank(m) == rank_by_reverse_echelon(raw, 1009)
    assert exact_rank(m) == rank_by_minors([[Fraction(x) for x in row] for row in raw]) or exact_rank(m) <= 5


def test_rank_trivial_cases():
    assert exact_rank(Matrix.identity(F1009, 4)) == 4
    assert exact_rank(Matrix.zeros(F1009, 3, 5)) == 0
    assert exact_rank(Matrix.zeros(QQ, 2, 2)) == 0


def test_rank_transpose_and_permutation_invariance():
    rng = random.Random(5)
    for _ in range(20):
        raw = [[rng.randrange(-4, 5) for _ in range(6)] for _ in range(4)]
        m = Matrix.from_rows(F1009, raw)
        assert exact_rank(m) == exact_rank(m.transpose())
        shuffled = raw[:]
        rng.shuffle(shuffled)
        assert exact_rank(Matrix.from_rows(F1009, shuffled)) == exact_rank(m)


@given(
    st.lists(
        st.lists(st.integers(min_value=-20, max_value=20), min_size=4, max_size=4),
        min_size=2,
        max_size=5,
    )
)
@settings(max_examples=60, deadline=None)
def test_rank_agrees_between_rational_and_minor_oracle(rows):
    m = Matrix.from_rows(QQ, rows)
    assert exact_rank(m) == rank_by_minors([[Fraction(x) for x in row] for row in rows])


def test_null_space_is_exact_kernel():
    rng = random.Random(9)
    raw = [[rng.randrange(1009) for _ in range(8)] for _ in range(3)]
    m = Matrix.from_rows(F1009, raw)
    ker = m.null_space()
    assert ker.cols == 8 - exact_rank(m)
    for j in range(ker.cols):
        image = m.matvec(ker.column(j))
        assert all(x.value == 0 for x in image)


def test_subspace_intersect_rank_identity():
    rng = random.Random(31)
    for _ in range(10):
        a = Matrix.from_rows(F1009, [[rng.randrange(1009) for _ in range(3)] for _ in range(6)])
        b = Matrix.from_rows(F1009, [[rng.randrange(1009) for _ in range(4)] for _ in range(6)])
        inter = subspace_intersect(a, b)
        expected = exact_rank(a) + exact_rank(b) - exact_rank(Matrix.hstack([a, b]))
        assert exact_rank(inter) == max(0, expected)
        assert inter.cols == exact_rank(inter)  # columns independent


def test_subspace_intersect_same_and_disjoint_spans():
    a = Matrix.from_rows(F1009, [[1, 0], [0, 1], [0, 0], [0, 0]])
    same = subspace_intersect(a, a)
    assert exact_rank(same) == 2
    b = Matrix.from_rows(F1009, [[0, 0], [0, 0], [1, 0], [0, 1]])
    disjoint = subspace_intersect(a, b)
    assert disjoint.cols == 0


def test_normalize_point_last_nonzero_is_one():
    v = (F1009.scalar(3), F1009.scalar(5), F1009.zero)
    w = normalize_point(v)
    assert w[1].value == 1
    assert w[0] == F1009.scalar(3) / F1009.scalar(5)
    with pytest.raises(ConstructionError):
        normalize_point((F1009.zero, F1009.zero))


# -- polynomials --------------------------------------------------------------


def test_multipoly_never_stores_zero_coefficients():
    x = MultiPoly.variable(F1009, 2, 0)
    y = MultiPoly.variable(F1009, 2, 1)
    q = (x + y) * (x - y) - x * x + y * y
    assert q.is_zero()
    assert q.terms == {}


def test_multipoly_graded_lex_term_order():
    f = MultiPoly.from_int_terms(
        F1009, 2, [(1, (0, 2)), (1, (1, 0)), (1, (2, 0)), (1, (0, 0))]
    )
    order = [e for e, _ in f.sorted_terms()]
    assert order == [(2, 0), (0, 2), (1, 0), (0, 0)]


def test_multipoly_compose_matches_pointwise_evaluation():
    rng = random.Random(17)
    x0 = MultiPoly.variable(F1009, 3, 0)
    x1 = MultiPoly.variable(F1009, 3, 1)
    x2 = MultiPoly.variable(F1009, 3, 2)
    f = x0 * x0 * x1 + x2 * x1 - x0 * 7 + MultiPoly.constant(F1009, 3, 5)
    u = MultiPoly.variable(F1009, 2, 0)
    v = MultiPoly.variable(F1009, 2, 1)
    args = [u * v + 1, u * u - v, v * v * u + u * 3]
    g = f.compose(args)
    for _ in range(10):
        pt = (F1009.random_scalar(rng), F1009.random_scalar(rng))
        direct = f.evaluate(tuple(a.evaluate(pt) for a in args))
        assert g.evaluate(pt) == direct


def test_multipoly_homogeneity_and_support():
    f = MultiPoly.from_int_terms(F1009, 3, [(2, (2, 1, 0)), (5, (0, 0, 3))])
    assert f.is_homogeneous()
    assert f.total_degree() == 3
    assert f.support() == frozenset({0, 1, 2})
    g = f + MultiPoly.constant(F1009, 3, 1)
    assert not g.is_homogeneous()


# -- jets ---------------------------------------------------------------------


def test_jet2_matches_symbolic_differentiation_oracle():
    # pinned random degree-4 polynomial in 3 variables
    rng = random.Random(404)
    terms = []
    for _ in range(12):
        expo = [rng.randrange(3) for _ in range(3)]
        while sum(expo) > 4:
            expo = [rng.randrange(3) for _ in range(3)]
        terms.append((rng.randrange(1, 1009), tuple(expo)))
    f = MultiPoly.from_int_terms(F1009, 3, terms)
    pt = tuple(F1009.scalar(v) for v in (311, 47, 902))
    jet = jet2_eval(f, pt)
    value, grad, hess = jet_by_symbolic_diff(f, pt)
    assert jet.value == value
    assert jet.gradient == grad
    assert jet.hessian == hess


def test_jet2_zero_hessian_below_degree_two():
    f = MultiPoly.from_int_terms(QQ, 2, [(3, (1, 0)), (7, (0, 1)), (11, (0, 0))])
    jet = jet2_eval(f, (QQ.scalar(5), QQ.scalar(-2)))
    assert all(all(h.value == 0 for h in row) for row in jet.hessian)
    assert jet.gradient == (QQ.scalar(3), QQ.scalar(7))


def test_jet2_hessian_exactly_symmetric_and_validated():
    rng = random.Random(7)
    x0 = MultiPoly.variable(F2003, 4, 0)
    x3 = MultiPoly.variable(F2003, 4, 3)
    f = (x0 + x3) ** 3
    pt = tuple(F2003.random_scalar(rng) for _ in range(4))
    jet = jet2_eval(f, pt)
    for i in range(4):
        for j in range(4):
            assert jet.hessian[i][j] == jet.hessian[j][i]
    with pytest.raises(ConstructionError):
        Jet2(
            F2003.zero,
            (F2003.zero, F2003.zero),
            ((F2003.zero, F2003.one), (F2003.zero, F2003.zero)),
        )


@given(st.integers(min_value=0, max_value=1008), st.integers(min_value=0, max_value=1008))
@settings(max_examples=30, deadline=None)
def test_jet2_additivity(a, b):
    x = MultiPoly.variable(F1009, 2, 0)
    y = MultiPoly.variable(F1009, 2, 1)
    f = x * x * y + x * 3
    g = y * y * y - x * y
    pt = (F1009.scalar(a), F1009.scalar(b))
    jf, jg, js = jet2_eval(f, pt), jet2_eval(g, pt), jet2_eval(f + g, pt)
    assert js.value == jf.value + jg.value
    assert js.gradient == tuple(p + q for p, q in zip(jf.gradient, jg.gradient))


# -- univariate roots ----------------------------------------------------------


def _uni(field, coeffs):
    return MultiPoly.from_int_terms(field, 1, [(c, (e,)) for e, c in enumerate(coeffs) if c])


def test_roots_match_bruteforce_scan_on_pinned_cubic():
    rng = random.Random(2024)
    coeffs = [rng.randrange(1009) for _ in range(3)] + [1]  # monic cubic
    f = _uni(F1009, coeffs)
    assert uni_roots_mod_p(f, F1009) == roots_by_scan(f, F1009)


def test_roots_of_factored_cubic():
    # (x - 3)(x - 17)(x - 500) over F_1009
    x = MultiPoly.variable(F1009, 1, 0)
    f = (x - MultiPoly.constant(F1009, 1, 3)) * (x - MultiPoly.constant(F1009, 1, 17)) * (
        x - MultiPoly.constant(F1009, 1, 500)
    )
    roots = {s.value for s in uni_roots_mod_p(f, F1009)}
    assert roots == {3, 17, 500}


def test_roots_value_independent_of_rng():
    rng_a, rng_b = random.Random(1), random.Random(999)
    coeffs = [5, 0, 7, 0, 0, 1]  # degree 5
    f = _uni(F1009, coeffs)
    assert uni_roots_mod_p(f, F1009, rng_a) == uni_roots_mod_p(f, F1009, rng_b)
    assert uni_roots_mod_p(f, F1009) == roots_by_scan(f, F1009)


def test_roots_handle_multiplicity_and_rootless():
    x = MultiPoly.variable(F2003, 1, 0)
    sq = (x - MultiPoly.constant(F2003, 1, 42)) ** 2
    assert {s.value for s in uni_roots_mod_p(sq, F2003)} == {42}
    # x^2 + 1 has no roots when p = 3 mod 4
    f = _uni(F2003, [1, 0, 1])
    assert uni_roots_mod_p(f, F2003) == frozenset()
    assert uni_roots_mod_p(f, F2003) == roots_by_scan(f, F2003)


def test_roots_reject_bad_inputs():
    with pytest.raises(ConstructionError):
        uni_roots_mod_p(MultiPoly.zero(F1009, 1), F1009)
    with pytest.raises(ConstructionError):
        uni_roots_mod_p(MultiPoly.variable(F1009, 2, 0), F1009)
    with pytest.raises(ConstructionError):
        uni_roots_mod_p(_uni(QQ, [1, 1]), QQ)


@given(st.lists(st.integers(min_value=0, max_value=1008), min_size=2, max_size=5))
@settings(max_examples=25, deadline=None)
def test_roots_against_scan_property(coeffs):
    coeffs = coeffs + [1]  # force nonzero leading coefficient
    f = _uni(F1009, coeffs)
    assert uni_roots_mod_p(f, F1009) == roots_by_scan(f, F1009)
