"""Input-output equations and the coefficient, cycle and sum-of-paths maps.

Everything is evaluated at a concrete parameter point.  Passing a
``deriv_target`` evaluates over dual numbers instead, so each returned
entry also carries its partial derivative with respect to that parameter.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .exact import (
    DegeneratePointError,
    Dual,
    ExactMatrix,
    UniPolynomial,
    det_exact,
    exact_div,
    is_zero,
    lagrange_interpolate,
    poly_gcd_monic,
    poly_gcd_monic_dual,
    value_of,
)
from .graphs import cycle_space_basis, is_strongly_connected, shortest_paths, simple_cycles
from .model import CompartmentModel, ModelError, ParameterPoint, ParamId, build_matrix, random_point

ORACLE_MAX_N = 8
GCD_RETRIES = 5


class GcdReductionWarning(UserWarning):
    """A common factor was cancelled from an input-output equation."""


def derive_seed(seed: int, *salt) -> int:
    """Deterministic child seed; independent streams for trials and retries."""
    key = "/".join(str(s) for s in (seed, *salt))
    return random.Random(key).getrandbits(63)


# ----------------------------------------------------------------------------
# Characteristic polynomial and minors
# ----------------------------------------------------------------------------


def char_poly(a: ExactMatrix) -> UniPolynomial:
    """det(λI - A) by Faddeev-LeVerrier.

    The only divisions are by the integers 1..n, so this works over the
    rationals and the dual ring alike.
    """
    if a.rows != a.cols:
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = a.rows
    A = [list(r) for r in a.entries]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    M = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
    for k in range(1, n + 1):
        AM = _matmul(A, M, n)
        trace = 0
        for r in range(n):
            trace = trace + AM[r][r]
        c = -exact_div(trace, k)
        coeffs[n - k] = c
        if k < n:
            for r in range(n):
                AM[r][r] = AM[r][r] + c
            M = AM
    return UniPolynomial(coeffs)


def _matmul(A: list[list], B: list[list], n: int) -> list[list]:
    cols = list(zip(*B))
    out = []
    for row in A:
        nz = [(t, x) for t, x in enumerate(row) if not is_zero(x)]
        out_row = []
        for col in cols:
            acc = 0
            for t, x in nz:
                y = col[t]
                if not is_zero(y):
                    acc = acc + x * y
            out_row.append(acc)
        out.append(out_row)
    return out


def minor_det_poly(a: ExactMatrix, row: int, col: int) -> UniPolynomial:
    """det of λI - A with ``row`` and ``col`` deleted (1-indexed).

    Evaluated at the nodes λ = 0..n-1 and recovered by interpolation.
    """
    n = a.rows
    if not (1 <= row <= n and 1 <= col <= n):
        raise ValueError(f"minor index ({row}, {col}) outside 1..{n}")
    neg = [[-x for x in r] for r in a.entries]
    nodes = list(range(n))
    values = []
    for lam in nodes:
        b = [list(r) for r in neg]
        for d in range(n):
            b[d][d] = b[d][d] + lam
        m = ExactMatrix.from_rows(b, n).delete(row=row - 1, col=col - 1)
        values.append(det_exact(m))
    return lagrange_interpolate(nodes, values)


def augmented_char_poly_derivative(a: ExactMatrix, row: int, col: int) -> UniPolynomial:
    """d/dt of det(λI - Ã) where Ã is A with t added at entry (row, col).

    Cofactor expansion gives ``minor_det_poly(row, col) ==
    (-1)**(row+col+1) * augmented_char_poly_derivative(row, col)``; this is
    the sign convention used throughout.
    """
    n = a.rows
    rows = []
    for r in range(n):
        rows.append([Dual(value_of(x), 1 if (r, c) == (row - 1, col - 1) else 0) for c, x in enumerate(a.entries[r])])
    p = char_poly(ExactMatrix.from_rows(rows, n))
    return UniPolynomial([x.deriv if isinstance(x, Dual) else 0 for x in p.coeffs])


def char_poly_cycle_oracle(model: CompartmentModel, point: ParameterPoint) -> UniPolynomial:
    """Characteristic polynomial summed over vertex-disjoint cycle collections.

    The coefficient of λ^(n-k) is (-1)^k times the sum, over collections of
    disjoint cycles (self-cycles included) covering k edges, of the signed
    product of monomial cycles, with sign -1 for each even-length cycle.
    """
    n = model.n
    if n > ORACLE_MAX_N:
        raise ValueError("oracle limited to small models")
    A = build_matrix(model, point).entries
    cycles: list[tuple[frozenset[int], int, object]] = []
    for v in range(1, n + 1):
        cycles.append((frozenset([v]), 1, A[v - 1][v - 1]))
    for c in simple_cycles(model.graph):
        prod = 1
        for src, dst in c.edges:
            prod = prod * A[dst - 1][src - 1]
        sign = 1 if c.length % 2 else -1
        cycles.append((frozenset(c.vertices), c.length, sign * prod))
    sums = [0] * (n + 1)

    def walk(start: int, used: frozenset[int], k: int, prod) -> None:
        sums[k] = sums[k] + prod
        for idx in range(start, len(cycles)):
            verts, length, val = cycles[idx]
            if used & verts:
                continue
            walk(idx + 1, used | verts, k + length, prod * val)

    walk(0, frozenset(), 0, 1)
    return UniPolynomial([(-1) ** k * sums[k] for k in range(n, -1, -1)])


# ----------------------------------------------------------------------------
# Input-output equations
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class IoEquation:
    """lhs(∂) y_i = Σ_j rhs[j](∂) u_j after removing the common factor."""

    output: int
    lhs: UniPolynomial
    rhs: dict[int, UniPolynomial]
    gcd_degree: int
    point: ParameterPoint | None = None
    warnings: tuple[str, ...] = field(default=())


def _reduced_io(model: CompartmentModel, A: ExactMatrix, i: int) -> tuple[UniPolynomial, dict[int, UniPolynomial], int]:
    lhs = char_poly(A)
    rhs = {}
    for j in sorted(model.inputs):
        p = minor_det_poly(A, j, i)
        rhs[j] = -p if (i + j) % 2 else p
    dual = any(isinstance(x, Dual) for x in lhs.coeffs)
    g = _value_poly(lhs)
    for p in rhs.values():
        g = poly_gcd_monic(g, _value_poly(p))
    gdeg = g.degree
    if gdeg == 0:
        return lhs, rhs, 0
    if dual:
        g = lhs
        for p in rhs.values():
            g = poly_gcd_monic_dual(g, p)
        if g.degree != gdeg:
            raise DegeneratePointError("gcd degree changed under perturbation")
    lhs_q = _exact_quotient(lhs, g)
    rhs_q = {j: _exact_quotient(p, g) for j, p in rhs.items()}
    return lhs_q, rhs_q, gdeg


def _value_poly(p: UniPolynomial) -> UniPolynomial:
    return UniPolynomial([value_of(c) for c in p.coeffs])


def _exact_quotient(p: UniPolynomial, g: UniPolynomial) -> UniPolynomial:
    q, r = p.divmod(g)
    if not r.is_zero():
        raise DegeneratePointError("common divisor does not divide at first order")
    return q


def io_equation(
    model: CompartmentModel,
    point: ParameterPoint,
    output: int,
    seed: int = 0,
    retries: int = GCD_RETRIES,
) -> IoEquation:
    """The reduced input-output equation for output compartment ``output``.

    For strongly connected models with a leak the common factor is
    generically trivial, so a positive gcd degree there means an unlucky
    point: a fresh point is drawn (up to ``retries`` times) before giving
    up.  The point actually used is recorded on the result.
    """
    if output not in model.outputs:
        raise ModelError(f"compartment {output} is not an output")
    if not model.inputs:
        raise ModelError("model has no inputs")
    generic_coprime = bool(model.leaks) and is_strongly_connected(model.graph)
    pt = point
    for attempt in range(retries + 1):
        lhs, rhs, gdeg = _reduced_io(model, build_matrix(model, pt), output)
        if gdeg == 0 or not generic_coprime:
            break
        pt = random_point(model, derive_seed(seed, "gcd-retry", attempt))
    else:
        raise DegeneratePointError(
            f"gcd of degree {gdeg} persisted over {retries} fresh points on a strongly connected model with a leak"
        )
    notes: tuple[str, ...] = ()
    if gdeg > 0:
        msg = f"output {output}: cancelled a common factor of degree {gdeg} from the input-output equation"
        warnings.warn(msg, GcdReductionWarning, stacklevel=2)
        notes = (msg,)
    return IoEquation(output, lhs, rhs, gdeg, pt, notes)


# ----------------------------------------------------------------------------
# Maps
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientVector:
    entries: tuple
    layout: tuple[Hashable, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def values(self) -> tuple:
        return tuple(value_of(x) for x in self.entries)

    def derivs(self) -> tuple:
        return tuple(x.deriv if isinstance(x, Dual) else 0 for x in self.entries)


def coefficient_map(
    model: CompartmentModel,
    point: ParameterPoint,
    deriv_target: ParamId | None = None,
) -> CoefficientVector:
    """All coefficients of all reduced input-output equations.

    Layout per output ``i`` (ascending): the lhs coefficients below the
    monic lead, then for each input ``j`` (ascending) the rhs coefficients
    of λ^0..λ^(d-1) where ``d`` is the lhs degree.
    """
    if not model.inputs or not model.outputs:
        raise ModelError("coefficient map needs at least one input and one output")
    A = build_matrix(model, point, deriv_target)
    entries: list = []
    layout: list = []
    for i in sorted(model.outputs):
        lhs, rhs, _ = _reduced_io(model, A, i)
        d = lhs.degree
        for p in range(d):
            entries.append(lhs.coeff(p))
            layout.append((i, "lhs", 0, p))
        for j in sorted(rhs):
            for p, c in enumerate(rhs[j].padded(d)):
                entries.append(c)
                layout.append((i, "rhs", j, p))
    return CoefficientVector(tuple(entries), tuple(layout))


def _monomial_value(A: Sequence[Sequence], walk: Sequence[tuple[int, int]]):
    prod = 1
    for src, dst in walk:
        prod = prod * A[dst - 1][src - 1]
    return prod


def cycle_map(
    model: CompartmentModel,
    point: ParameterPoint,
    deriv_target: ParamId | None = None,
) -> CoefficientVector:
    """Self-cycles a_ii followed by a^C over a cycle-space basis (|E|+1 values)."""
    if not is_strongly_connected(model.graph):
        raise ModelError("cycle map requires a strongly connected graph")
    A = build_matrix(model, point, deriv_target).entries
    entries = [A[v - 1][v - 1] for v in model.graph.vertices]
    layout: list = [("self", v) for v in model.graph.vertices]
    for c in cycle_space_basis(model.graph):
        entries.append(_monomial_value(A, c.edges))
        layout.append(("cycle", c.vertices))
    return CoefficientVector(tuple(entries), tuple(layout))


def sum_of_paths_pairs(model: CompartmentModel) -> list[tuple[int, int]]:
    """(source, target) pairs feeding the sum-of-paths map.

    One entry per compartment of (In ∪ Out) \\ {1}: outputs use paths from
    1, pure inputs use paths into 1.
    """
    if 1 not in model.inputs or 1 not in model.outputs:
        raise ModelError("sum-of-paths map needs compartment 1 in In ∩ Out")
    pairs = []
    for v in sorted((model.inputs | model.outputs) - {1}):
        pairs.append((1, v) if v in model.outputs else (v, 1))
    return pairs


def sum_of_paths_map(
    model: CompartmentModel,
    point: ParameterPoint,
    deriv_target: ParamId | None = None,
) -> CoefficientVector:
    pairs = sum_of_paths_pairs(model)
    A = build_matrix(model, point, deriv_target).entries
    entries = []
    for src, dst in pairs:
        ps = shortest_paths(model.graph, src, dst)
        total = 0
        for path in ps.paths:
            total = total + _monomial_value(A, list(zip(path, path[1:])))
        entries.append(total)
    return CoefficientVector(tuple(entries), tuple(("paths", s, t) for s, t in pairs))
