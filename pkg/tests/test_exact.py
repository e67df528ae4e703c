from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from linident.exact import (
    Dual,
    ExactMatrix,
    UniPolynomial,
    det_exact,
    exact_div,
    exact_rank,
    lagrange_interpolate,
    poly_gcd_monic,
    poly_gcd_monic_dual,
)

small = st.integers(min_value=-20, max_value=20)
rationals = st.fractions(min_value=-50, max_value=50, max_denominator=12)
duals = st.builds(Dual, rationals, rationals)


def matrices(max_n=5, entries=small):
    return st.integers(1, max_n).flatmap(
        lambda r: st.integers(1, max_n).flatmap(
            lambda c: st.lists(st.lists(entries, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def square(max_n=5, entries=small):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n)
    )


def test_exact_div_keeps_ints():
    assert exact_div(12, 4) == 3 and type(exact_div(12, 4)) is int
    assert exact_div(3, 6) == Fraction(1, 2)
    assert exact_div(Fraction(3, 2), 3) == Fraction(1, 2)


@given(duals, duals, duals)
def test_dual_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == 0
    assert a * 1 == a


@given(duals, duals)
def test_dual_division_inverts_multiplication(a, b):
    if b.value == 0:
        with pytest.raises(ZeroDivisionError):
            a / b
        return
    assert (a / b) * b == a


@given(rationals, st.integers(0, 6))
def test_dual_power_matches_derivative(x, k):
    d = Dual(x, 1) ** k
    assert d.value == x**k
    assert d.deriv == (k * x ** (k - 1) if k else 0)


@given(st.fractions(min_value=1, max_value=30, max_denominator=7))
def test_dual_chain_rule_against_symbolic(x0):
    # f(x) = (x^3 - 2x + 5) / (x^2 + 1), differentiated symbolically as the oracle.
    xs = sympy.Symbol("x")
    f = (xs**3 - 2 * xs + 5) / (xs**2 + 1)
    expected = sympy.Rational(sympy.diff(f, xs).subs(xs, sympy.Rational(x0.numerator, x0.denominator)))
    x = Dual(x0, 1)
    got = (x**3 - 2 * x + 5) / (x**2 + 1)
    assert Fraction(int(expected.p), int(expected.q)) == got.deriv


def test_dual_equality_with_scalars():
    assert Dual(3, 0) == 3
    assert Dual(3, 1) != 3
    assert hash(Dual(3, 0)) == hash(3)


def test_polynomial_basics():
    p = UniPolynomial([1, 2, 0, 0])
    assert p.degree == 1 and p.coeffs == (1, 2)
    assert UniPolynomial().degree == -1 and UniPolynomial().is_zero()
    assert (p * p).coeffs == (1, 4, 4)
    assert p(3) == 7
    assert str(UniPolynomial([0, 0, 1])) == "λ^2"


@given(st.lists(small, min_size=1, max_size=6), st.lists(small, min_size=1, max_size=4))
def test_polynomial_divmod(a, b):
    p, q = UniPolynomial(a), UniPolynomial(b)
    if q.is_zero():
        return
    quo, rem = p.divmod(q)
    assert quo * q + rem == p
    assert rem.degree < q.degree


@given(st.lists(small, min_size=1, max_size=5), st.lists(small, min_size=1, max_size=5))
@settings(max_examples=60)
def test_gcd_matches_sympy(a, b):
    p, q = UniPolynomial(a), UniPolynomial(b)
    if p.is_zero() and q.is_zero():
        with pytest.raises(ValueError):
            poly_gcd_monic(p, q)
        return
    lam = sympy.Symbol("l")
    sp = sum(c * lam**k for k, c in enumerate(a))
    sq = sum(c * lam**k for k, c in enumerate(b))
    ref = sympy.Poly(sympy.gcd(sp, sq), lam).monic()
    ref_coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(ref.all_coeffs())]
    assert poly_gcd_monic(p, q) == UniPolynomial(ref_coeffs)


def test_dual_gcd_tracks_derivative():
    # (λ + t)(λ + 2) and (λ + t)(λ + 3) at t = 5 with dt = 1.
    t = Dual(5, 1)
    p = UniPolynomial([t * 2, t + 2, 1])
    q = UniPolynomial([t * 3, t + 3, 1])
    g = poly_gcd_monic_dual(p, q)
    assert g.degree == 1
    assert g.coeffs[0] == Dual(5, 1) and g.coeffs[1] == 1


@given(st.lists(rationals, min_size=1, max_size=6))
def test_interpolation_round_trip(coeffs):
    p = UniPolynomial(coeffs)
    n = max(p.degree + 1, 1)
    nodes = list(range(n))
    assert lagrange_interpolate(nodes, [p(x) for x in nodes]) == p


def test_interpolation_rejects_repeated_nodes():
    with pytest.raises(ValueError):
        lagrange_interpolate([0, 0], [1, 2])


@given(matrices())
def test_rank_matches_transpose_and_sympy(rows):
    m = ExactMatrix.from_rows(rows)
    r = exact_rank(m)
    assert r == exact_rank(m.transpose())
    assert r == sympy.Matrix(rows).rank()


@given(matrices(entries=rationals))
@settings(max_examples=40)
def test_rank_over_rationals(rows):
    m = ExactMatrix.from_rows(rows)
    ref = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows]).rank()
    assert exact_rank(m) == ref


@given(square())
def test_det_matches_sympy(rows):
    assert det_exact(ExactMatrix.from_rows(rows)) == sympy.Matrix(rows).det()


@given(square(max_n=4), st.lists(small, min_size=16, max_size=16))
@settings(max_examples=40)
def test_dual_det_derivative_is_jacobi_formula(rows, dirs):
    # d/dt det(M + tD) at t = 0 against the symbolic derivative.
    n = len(rows)
    D = [dirs[i * n : (i + 1) * n] for i in range(n)]
    m = ExactMatrix.from_rows([[Dual(rows[i][j], D[i][j]) for j in range(n)] for i in range(n)])
    t = sympy.Symbol("t")
    sym = sympy.Matrix(n, n, lambda i, j: rows[i][j] + t * D[i][j]).det()
    got = det_exact(m)
    got_value = got.value if isinstance(got, Dual) else got
    got_deriv = got.deriv if isinstance(got, Dual) else 0
    assert got_value == sym.subs(t, 0)
    assert got_deriv == sympy.diff(sym, t).subs(t, 0)


def test_det_with_zero_value_pivots_uses_fallback():
    # Every value part on the leading diagonal is zero.
    e = Dual(0, 1)
    m = ExactMatrix.from_rows([[e, Dual(1)], [Dual(1), e]])
    assert det_exact(m) == Dual(-1, 0)


def test_det_rejects_non_square():
    with pytest.raises(ValueError):
        det_exact(ExactMatrix.from_rows([[1, 2]]))


def test_matrix_helpers():
    m = ExactMatrix.from_rows([[1, 2], [3, 4]])
    assert m.delete(row=0).to_lists() == [[3, 4]]
    assert m.delete(col=1).to_lists() == [[1], [3]]
    assert m.matmul(ExactMatrix.identity(2)) == m
    assert m.matvec([1, 1]) == [3, 7]
    assert m.vstack(m).rows == 4


def test_small_rank_det_gcd_interpolation_examples():
    assert exact_rank(ExactMatrix.identity(2)) == 2
    assert exact_rank(ExactMatrix.zeros(3, 4)) == 0
    assert exact_rank(ExactMatrix.from_rows([[1, 2], [2, 4]])) == 1
    assert det_exact(ExactMatrix.from_rows([[7]])) == 7
    assert det_exact(ExactMatrix.from_rows([[0, 1], [1, 0]])) == -1
    lam = UniPolynomial([0, 1])
    assert poly_gcd_monic(UniPolynomial([0, 1, 1]), lam) == lam
    assert poly_gcd_monic(UniPolynomial([-1, 0, 1]), UniPolynomial([-1, 1])) == UniPolynomial([-1, 1])
    assert poly_gcd_monic(UniPolynomial([0, 5, 1]), UniPolynomial([2, 1])) == UniPolynomial([1])
    assert lagrange_interpolate([0, 1], [1, 2]) == UniPolynomial([1, 1])
    assert lagrange_interpolate([0, 1, 2], [0, 1, 4]) == UniPolynomial([0, 0, 1])
    assert lagrange_interpolate([0, 1], [Fraction(3, 4)] * 2) == UniPolynomial([Fraction(3, 4)])
