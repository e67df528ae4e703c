"""Exact scalar and linear-algebra substrate.

Scalars are plain Python ``int`` and :class:`fractions.Fraction` (the
rational field) or :class:`Dual` numbers over those.  Nothing here ever
touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]
Scalar = Union[int, Fraction, "Dual"]


class DegeneratePointError(ArithmeticError):
    """Raised when an evaluation point turns out to be non-generic."""


def exact_div(a, b):
    """Divide exactly, keeping integer results as ``int``."""
    if type(a) is int and type(b) is int:
        q, r = divmod(a, b)
        if r == 0:
            return q
        return Fraction(a, b)
    return a / b


def is_zero(x) -> bool:
    return x == 0


def value_of(x) -> Rational:
    return x.value if isinstance(x, Dual) else x


def deriv_of(x) -> Rational:
    return x.deriv if isinstance(x, Dual) else 0


class Dual:
    """First-order dual number ``value + deriv*eps`` with ``eps**2 == 0``."""

    __slots__ = ("value", "deriv")

    def __init__(self, value: Rational = 0, deriv: Rational = 0):
        self.value = value
        self.deriv = deriv

    def __repr__(self) -> str:
        return f"Dual({self.value!s}, {self.deriv!s})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.deriv + other.deriv)
        return Dual(self.value + other, self.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.deriv - other.deriv)
        return Dual(self.value - other, self.deriv)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.deriv)

    def __neg__(self):
        return Dual(-self.value, -self.deriv)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                self.deriv * other.value + self.value * other.deriv,
            )
        return Dual(self.value * other, self.deriv * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.value == 0:
                raise ZeroDivisionError("dual division by an element with zero value part")
            v = exact_div(self.value, other.value)
            d = exact_div(
                self.deriv * other.value - self.value * other.deriv,
                other.value * other.value,
            )
            return Dual(v, d)
        if other == 0:
            raise ZeroDivisionError("dual division by zero")
        return Dual(exact_div(self.value, other), exact_div(self.deriv, other))

    def __rtruediv__(self, other):
        return Dual(other).__truediv__(self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Dual(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.value == other.value and self.deriv == other.deriv
        if isinstance(other, (int, Fraction)):
            return self.value == other and self.deriv == 0
        return NotImplemented

    def __hash__(self):
        if self.deriv == 0:
            return hash(self.value)
        return hash((self.value, self.deriv))


# ----------------------------------------------------------------------------
# Univariate polynomials
# ----------------------------------------------------------------------------


def _trim(coeffs: Sequence) -> tuple:
    end = len(coeffs)
    while end and is_zero(coeffs[end - 1]):
        end -= 1
    return tuple(coeffs[:end])


class UniPolynomial:
    """Polynomial in one indeterminate, coefficients in ascending degree.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        self.coeffs = _trim(list(coeffs))

    @classmethod
    def constant(cls, c) -> UniPolynomial:
        return cls([c])

    @classmethod
    def linear_root(cls, r) -> UniPolynomial:
        """The monic polynomial ``x - r``."""
        return cls([-r, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self):
        if not self.coeffs:
            return 0
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return 0

    def padded(self, length: int) -> list:
        if length < len(self.coeffs):
            raise ValueError(f"polynomial of degree {self.degree} does not fit in {length} slots")
        return list(self.coeffs) + [0] * (length - len(self.coeffs))

    def __repr__(self) -> str:
        return f"UniPolynomial({list(self.coeffs)!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if is_zero(c):
                continue
            mono = "" if k == 0 else ("λ" if k == 1 else f"λ^{k}")
            if mono and c == 1:
                terms.append(mono)
            elif mono:
                terms.append(f"({c})*{mono}")
            else:
                terms.append(f"({c})")
        return " + ".join(terms)

    def __eq__(self, other):
        if isinstance(other, UniPolynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self):
        return UniPolynomial([-c for c in self.coeffs])

    def __add__(self, other):
        if not isinstance(other, UniPolynomial):
            other = UniPolynomial([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPolynomial([self.coeff(k) + other.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, UniPolynomial):
            other = UniPolynomial([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, UniPolynomial):
            return UniPolynomial([c * other for c in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return UniPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for a_idx, a in enumerate(self.coeffs):
            if is_zero(a):
                continue
            for b_idx, b in enumerate(other.coeffs):
                out[a_idx + b_idx] = out[a_idx + b_idx] + a * b
        return UniPolynomial(out)

    __rmul__ = __mul__

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def scale(self, c) -> UniPolynomial:
        return UniPolynomial([exact_div(a, c) for a in self.coeffs])

    def monic(self) -> UniPolynomial:
        if not self.coeffs:
            raise ZeroDivisionError("the zero polynomial has no monic form")
        lead = self.lead
        if lead == 1:
            return self
        return self.scale(lead)

    def divmod(self, divisor: UniPolynomial) -> tuple[UniPolynomial, UniPolynomial]:
        """Long division; the divisor's leading coefficient must be invertible."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = divisor.degree
        lead = divisor.lead
        if len(rem) <= dd:
            return UniPolynomial(), UniPolynomial(rem)
        quot = [0] * (len(rem) - dd)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k]
            if is_zero(c):
                continue
            q = c if lead == 1 else exact_div(c, lead)
            quot[k - dd] = q
            for t, dc in enumerate(divisor.coeffs):
                rem[k - dd + t] = rem[k - dd + t] - q * dc
        return UniPolynomial(quot), UniPolynomial(rem[:dd])


def poly_gcd_monic(p: UniPolynomial, q: UniPolynomial) -> UniPolynomial:
    """Monic gcd over the rationals by the Euclidean algorithm."""
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd undefined for two zero polynomials")
    a, b = p, q
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r.monic() if not r.is_zero() else r
    return a.monic()


def _dual_strip(p: UniPolynomial) -> UniPolynomial:
    # A leading coefficient that vanishes only in value means the point
    # killed a generically nonzero term.
    if p.coeffs and isinstance(p.lead, Dual) and p.lead.value == 0:
        raise DegeneratePointError("leading coefficient vanishes at the evaluation point")
    return p


def poly_gcd_monic_dual(p: UniPolynomial, q: UniPolynomial) -> UniPolynomial:
    """Monic gcd over dual numbers, tracking first-order variation.

    Runs the same Euclidean remainder sequence as :func:`poly_gcd_monic`
    but over the dual ring.  Every divisor must have a leading coefficient
    with nonzero value part; otherwise the point is non-generic and
    :class:`DegeneratePointError` is raised.
    """
    if p.is_zero() and q.is_zero():
        raise ValueError("gcd undefined for two zero polynomials")
    a, b = _dual_strip(p), _dual_strip(q)
    if a.is_zero():
        a, b = b, a
    while not b.is_zero():
        _, r = a.divmod(b)
        r = _dual_strip(r)
        a, b = b, r.monic() if not r.is_zero() else r
    return a.monic()


def lagrange_interpolate(nodes: Sequence[Rational], values: Sequence) -> UniPolynomial:
    """Unique polynomial of degree < len(nodes) through the given points.

    Uses Newton divided differences; the only divisions are by differences
    of nodes, which are plain rationals.
    """
    if len(nodes) != len(values):
        raise ValueError("nodes and values differ in length")
    if len(set(nodes)) != len(nodes):
        raise ValueError("interpolation nodes must be pairwise distinct")
    n = len(nodes)
    if n == 0:
        return UniPolynomial()
    dd = list(values)
    for level in range(1, n):
        for k in range(n - 1, level - 1, -1):
            dd[k] = exact_div(dd[k] - dd[k - 1], nodes[k] - nodes[k - level])
    poly = UniPolynomial([dd[n - 1]])
    for k in range(n - 2, -1, -1):
        poly = poly * UniPolynomial.linear_root(nodes[k]) + dd[k]
    return poly


# ----------------------------------------------------------------------------
# Matrices
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactMatrix:
    """Dense matrix over an exact ring, stored as a tuple of row tuples."""

    rows: int
    cols: int
    entries: tuple[tuple, ...]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> ExactMatrix:
        entries = tuple(tuple(r) for r in rows)
        if cols is None:
            cols = len(entries[0]) if entries else 0
        if any(len(r) != cols for r in entries):
            raise ValueError("ragged matrix rows")
        return cls(len(entries), cols, entries)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> ExactMatrix:
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> ExactMatrix:
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def to_lists(self) -> list[list]:
        return [list(r) for r in self.entries]

    def transpose(self) -> ExactMatrix:
        return ExactMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else ())

    def matmul(self, other: ExactMatrix) -> ExactMatrix:
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        cols_t = list(zip(*other.entries)) if other.rows else [()] * other.cols
        out = []
        for row in self.entries:
            out.append(tuple(_dot(row, col) for col in cols_t))
        return ExactMatrix(self.rows, other.cols, tuple(out))

    def matvec(self, vec: Sequence) -> list:
        return [_dot(row, vec) for row in self.entries]

    def delete(self, row: int | None = None, col: int | None = None) -> ExactMatrix:
        """Drop one row and/or column (0-indexed)."""
        kept = [r for i, r in enumerate(self.entries) if i != row]
        if col is not None:
            kept = [tuple(x for j, x in enumerate(r) if j != col) for r in kept]
        return ExactMatrix(len(kept), self.cols - (col is not None), tuple(tuple(r) for r in kept))

    def vstack(self, other: ExactMatrix) -> ExactMatrix:
        if self.rows and other.rows and self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        cols = self.cols if self.rows else other.cols
        return ExactMatrix(self.rows + other.rows, cols, self.entries + other.entries)


def _dot(a: Sequence, b: Sequence):
    acc = 0
    for x, y in zip(a, b):
        if is_zero(x) or is_zero(y):
            continue
        acc = acc + x * y
    return acc


def _integer_rows(m: ExactMatrix) -> list[list[int]]:
    rows = []
    for r in m.entries:
        if any(isinstance(x, Dual) for x in r):
            raise TypeError("exact_rank expects rational entries")
        den = lcm(*(Fraction(x).denominator for x in r)) if r else 1
        rows.append([int(Fraction(x) * den) for x in r])
    return rows


def exact_rank(m: ExactMatrix) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    rows = _integer_rows(m)
    n_rows, n_cols = m.rows, m.cols
    rank = 0
    prev = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        piv = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][col]
        prow = rows[rank]
        for r in range(rank + 1, n_rows):
            row = rows[r]
            f = row[col]
            new = []
            for c in range(n_cols):
                num = row[c] * p - f * prow[c]
                q, rem = divmod(num, prev)
                if rem:
                    raise AssertionError("Bareiss division was not exact")
                new.append(q)
            rows[r] = new
        prev = p
        rank += 1
    return rank


def det_exact(m: ExactMatrix):
    """Exact determinant over the rationals or the dual ring.

    Bareiss elimination with pivots whose value part is nonzero; when a
    column has no such pivot the routine falls back to cofactor expansion
    along that column, which only uses ring operations.
    """
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_lists()
    sign = 1
    prev = 1
    for k in range(n - 1):
        piv = next((r for r in range(k, n) if value_of(a[r][k]) != 0), None)
        if piv is None:
            if all(is_zero(a[r][k]) for r in range(k, n)):
                return 0
            return _cofactor_fallback(m)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        p = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                num = row_i[j] * p - aik * row_k[j]
                row_i[j] = num if prev == 1 else exact_div(num, prev)
            row_i[k] = 0
        prev = p
    det = a[n - 1][n - 1]
    return det if sign == 1 else -det


def _cofactor_fallback(m: ExactMatrix):
    # Expand along the column with the fewest nonzero entries.
    n = m.rows
    best = min(range(n), key=lambda c: sum(not is_zero(m.entries[r][c]) for r in range(n)))
    total = 0
    for r in range(n):
        x = m.entries[r][best]
        if is_zero(x):
            continue
        minor = det_exact(m.delete(row=r, col=best))
        term = x * minor
        total = total + term if (r + best) % 2 == 0 else total - term
    return total

