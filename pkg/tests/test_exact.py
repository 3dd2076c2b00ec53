from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toruslab import linalg
from toruslab.exact import (
    FactorizationError,
    NumberField,
    RatPolynomial,
    embeddings,
    field_mul,
    field_norm,
    field_trace,
    irreducibility_status,
    regular_rep,
    verify_factorization,
)

Q2 = NumberField(RatPolynomial.parse("x^2-2"))
Q3 = NumberField(RatPolynomial.parse("x^3-2"))
QI = NumberField(RatPolynomial.parse("x^2+1"))


def el(field, *c):
    return field.element([Fraction(x) for x in c])


@pytest.mark.parametrize(
    "field,a,b,expected",
    [
        (Q2, (0, 1), (0, 1), (2, 0)),
        (Q2, (1, 1), (1, -1), (-1, 0)),
        (Q3, (0, 1, 0), (0, 0, 1), (2, 0, 0)),
    ],
)
def test_field_mul_examples(field, a, b, expected):
    assert field_mul(el(field, *a), el(field, *b)).coords == tuple(map(Fraction, expected))


@pytest.mark.parametrize("field,a,expected", [(Q2, (1, 0), 1), (Q2, (1, 1), -1), (Q3, (0, 1, 0), 2)])
def test_field_norm_examples(field, a, expected):
    assert field_norm(el(field, *a)) == expected


def test_regular_rep_examples():
    basis = [el(Q2, 1, 0), el(Q2, 0, 1)]
    assert regular_rep(el(Q2, 1, 0), basis) == linalg.identity(2)
    assert regular_rep(el(Q2, 0, 1), basis) == [[0, 2], [1, 0]]
    m = regular_rep(el(Q2, 1, 1), basis)
    assert m == [[1, 2], [1, 1]]
    assert linalg.det(m) == -1


def test_regular_rep_other_basis_is_conjugate():
    basis = [el(Q2, 0, 1), el(Q2, 1, 0)]  # (theta, 1)
    m = regular_rep(el(Q2, 3, 2), basis)
    assert m == [[3, 2], [4, 3]]


@pytest.mark.parametrize(
    "field,r,s,roots",
    [
        (Q2, 2, 0, [-1.4142135623730951, 1.4142135623730951]),
        (QI, 0, 1, [1j, -1j]),
        (Q3, 1, 1, [1.2599210498948732, -0.6299605249474366 + 1.0911236359717214j, -0.6299605249474366 - 1.0911236359717214j]),
    ],
)
def test_embeddings(field, r, s, roots):
    assert (field.r, field.s) == (r, s)
    got = [complex(z) for z in embeddings(field)]
    assert got == pytest.approx(roots, abs=1e-14)


def test_cube_root_against_float():
    assert complex(embeddings(Q3)[0]).real == pytest.approx(2 ** (1 / 3), rel=1e-15)


def test_verify_factorization_examples():
    rep = verify_factorization(RatPolynomial.parse("x^2-2"), [RatPolynomial.parse("x^2-2")])
    assert (rep.l0, rep.a0) == (0, 1)
    f1, f2 = RatPolynomial.parse("(x-1)(x-2)"), RatPolynomial.parse("x^2-2")
    rep = verify_factorization(f1 * f2, [f1, f2])
    assert (rep.l0, rep.a0) == (2, 1)
    assert rep.split_roots == [1, 2]
    with pytest.raises(FactorizationError, match="repeated"):
        verify_factorization(RatPolynomial.parse("x^2-2x+1"), [RatPolynomial.parse("x^2-2x+1")])
    with pytest.raises(FactorizationError, match="differs"):
        verify_factorization(f1 * f2, [f1])


def test_irreducibility_flags():
    assert irreducibility_status(RatPolynomial.parse("x^3-2")) == "irreducible"
    assert irreducibility_status(RatPolynomial.parse("x^4-10x^2+1")) == "unverified-irreducible"
    assert irreducibility_status(RatPolynomial.parse("x^4+x+1")) == "irreducible"
    assert irreducibility_status(RatPolynomial.parse("(x-3)(x^2+1)")) == "reducible"


def test_polynomial_parse_and_arith():
    p = RatPolynomial.parse("(x-1)(x-2)")
    assert p.coeffs == (2, -3, 1)
    assert (p - 1).coeffs == (1, -3, 1)
    assert (1 - p).coeffs == (-1, 3, -1)
    assert p.rational_roots() == [1, 2]
    assert not RatPolynomial.parse("x^2").is_squarefree()


small = st.integers(-6, 6)


@given(st.sampled_from([Q2, Q3, QI]), st.data())
def test_norm_multiplicative(field, data):
    a = field.element(data.draw(st.lists(small, min_size=field.degree, max_size=field.degree)))
    b = field.element(data.draw(st.lists(small, min_size=field.degree, max_size=field.degree)))
    assert field_norm(a * b) == field_norm(a) * field_norm(b)
    assert regular_rep(a * b) == linalg.matmul(regular_rep(a), regular_rep(b))


@given(st.sampled_from([Q2, Q3, QI]), st.data())
def test_trace_is_sum_of_embeddings(field, data):
    a = field.element(data.draw(st.lists(small, min_size=field.degree, max_size=field.degree)))
    tr = field_trace(a)
    with mpmath.workdps(field.precision + 10):
        err = abs(mpmath.fsum(a.embed_all()) - mpmath.mpf(tr.numerator) / tr.denominator)
    assert err < mpmath.mpf(10) ** (-field.precision + 3)
