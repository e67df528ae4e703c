"""Jacobian-rank identifiability tests.

A rank computed at one point is a lower bound for the generic rank.  Full
rank at any point therefore certifies generic local identifiability, while
a deficient rank at every trial point is strong but only probabilistic
evidence against it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .coeffs import (
    CoefficientVector,
    coefficient_map,
    cycle_map,
    derive_seed,
    sum_of_paths_map,
)
from .exact import DegeneratePointError, Dual, ExactMatrix, exact_rank
from .graphs import inductively_strongly_connected, is_strongly_connected
from .model import CompartmentModel, ModelError, ParameterPoint, ParamId, build_matrix, param_name, random_point

DEFAULT_TRIALS = 3
POINT_RETRIES = 5


class HypothesisError(ModelError):
    """A theorem's hypothesis does not hold for the given model."""


class Verdict(str, enum.Enum):
    IDENTIFIABLE = "GenericallyLocallyIdentifiable"
    UNIDENTIFIABLE = "Unidentifiable"
    INCONCLUSIVE = "Inconclusive"


MAP_KINDS = ("c", "f", "g", "cbar", "fbar")


def _evaluator(kind: str, model: CompartmentModel) -> Callable[[ParameterPoint, ParamId | None], CoefficientVector]:
    if kind == "c":
        return lambda pt, s: coefficient_map(model, pt, s)
    if kind == "f":
        return lambda pt, s: cycle_map(model, pt, s)
    if kind == "g":
        return lambda pt, s: sum_of_paths_map(model, pt, s)
    if kind in ("cbar", "fbar"):
        base = model.with_sets(inputs={1}, outputs={1})
        first = coefficient_map if kind == "cbar" else cycle_map

        def both(pt, s):
            head = first(base, pt, s)
            tail = sum_of_paths_map(model, pt, s)
            return CoefficientVector(head.entries + tail.entries, head.layout + tail.layout)

        return both
    raise ValueError(f"unknown map kind {kind!r}; expected one of {MAP_KINDS}")


@dataclass(frozen=True)
class Jacobian:
    matrix: ExactMatrix
    layout: tuple
    params: tuple[ParamId, ...]
    values: tuple

    def nonzero_rows(self) -> set[int]:
        return {r for r, row in enumerate(self.matrix.entries) if any(x != 0 for x in row)}


def jacobian_full(kind: str, model: CompartmentModel, point: ParameterPoint) -> Jacobian:
    """Exact Jacobian of a map, one dual pass per parameter."""
    evaluate = _evaluator(kind, model)
    params = tuple(model.parameters)
    columns = []
    layout = None
    values = None
    for s in params:
        vec = evaluate(point, s)
        if layout is None:
            layout, values = vec.layout, vec.values()
        elif vec.layout != layout:
            raise DegeneratePointError("map layout changed between derivative passes")
        columns.append(vec.derivs())
    if layout is None:
        vec = evaluate(point, None)
        layout, values = vec.layout, vec.values()
    rows = [tuple(col[r] for col in columns) for r in range(len(layout))]
    return Jacobian(ExactMatrix(len(layout), len(params), tuple(rows)), layout, params, values)


def jacobian(kind: str, model: CompartmentModel, point: ParameterPoint) -> ExactMatrix:
    """Rows follow the map's layout, columns ``model.parameters``."""
    return jacobian_full(kind, model, point).matrix


def _jacobian_with_retry(kind: str, model: CompartmentModel, seed: int, tag: str) -> tuple[Jacobian, ParameterPoint]:
    last: Exception | None = None
    for attempt in range(POINT_RETRIES + 1):
        pt = random_point(model, derive_seed(seed, tag, attempt))
        try:
            return jacobian_full(kind, model, pt), pt
        except DegeneratePointError as exc:
            last = exc
    raise DegeneratePointError(f"no generic point found after {POINT_RETRIES + 1} draws: {last}")


@dataclass
class IdentReport:
    model: CompartmentModel
    n_params: int
    n_coeffs: int
    n_nonconstant: int
    rank: int
    trials: int
    seed: int
    verdict: Verdict
    trial_ranks: list[int]
    points: list[ParameterPoint] = field(default_factory=list, repr=False)
    layout: tuple = field(default=(), repr=False)

    @property
    def identifiable(self) -> bool:
        return self.verdict is Verdict.IDENTIFIABLE


def analyze(
    model: CompartmentModel,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    point: ParameterPoint | None = None,
) -> IdentReport:
    """Rank of the coefficient-map Jacobian at ``trials`` random points.

    A user-supplied ``point`` replaces the first random draw.
    """
    if not model.inputs or not model.outputs:
        raise ModelError("analysis needs at least one input and one output")
    if trials < 1:
        raise ValueError("trials must be positive")
    n_params = model.n_params
    ranks: list[int] = []
    points: list[ParameterPoint] = []
    nonconstant: set[int] = set()
    layout: tuple = ()
    for t in range(trials):
        try:
            if t == 0 and point is not None:
                jac, pt = jacobian_full("c", model, point), point
            else:
                jac, pt = _jacobian_with_retry("c", model, seed, f"trial-{t}")
        except DegeneratePointError:
            continue
        if layout and jac.layout != layout:
            raise DegeneratePointError("coefficient layout differs between trials")
        layout = jac.layout
        nonconstant |= jac.nonzero_rows()
        ranks.append(exact_rank(jac.matrix))
        points.append(pt)
    if not ranks:
        verdict = Verdict.INCONCLUSIVE
    elif max(ranks) == n_params:
        verdict = Verdict.IDENTIFIABLE
    else:
        verdict = Verdict.UNIDENTIFIABLE
    return IdentReport(
        model=model,
        n_params=n_params,
        n_coeffs=len(layout),
        n_nonconstant=len(nonconstant),
        rank=max(ranks, default=0),
        trials=trials,
        seed=seed,
        verdict=verdict,
        trial_ranks=ranks,
        points=points,
        layout=layout,
    )


def monomial_gradient(model: CompartmentModel, point: ParameterPoint, monomial: Mapping[ParamId, int]) -> list:
    """Gradient of a monomial in the parameters, via dual passes."""
    unknown = set(monomial) - set(model.parameters)
    if unknown:
        raise ModelError(f"monomial uses parameters not in the model: {sorted(map(param_name, unknown))}")
    grad = []
    for s in model.parameters:
        acc = Dual(1, 0)
        for p, e in monomial.items():
            base = Dual(point[p], 1 if p == s else 0)
            if e >= 0:
                acc = acc * base**e
            else:
                acc = acc / base ** (-e)
        grad.append(acc.deriv)
    return grad


def is_identifiable_function(
    model: CompartmentModel,
    monomial: Mapping[ParamId, int],
    seed: int = 0,
    kind: str = "c",
) -> bool:
    """Whether the monomial's gradient lies in the row span of J(c).

    A negative answer is re-checked at a second point before being returned.
    """
    for attempt in range(2):
        jac, pt = _jacobian_with_retry(kind, model, seed, f"idfun-{attempt}")
        grad = monomial_gradient(model, pt, monomial)
        base = exact_rank(jac.matrix)
        stacked = exact_rank(jac.matrix.vstack(ExactMatrix.from_rows([grad], len(grad))))
        if stacked == base:
            return True
    return False


@dataclass
class ICMResult:
    is_icm: bool
    reasons: list[str]
    notes: list[str]
    rank: int | None
    target_rank: int
    isc_ordering: tuple[int, ...] | None
    isc_shortcut: bool


def check_icm(model: CompartmentModel, seed: int = 0, trials: int = DEFAULT_TRIALS) -> ICMResult:
    """Check the four identifiable-cycle-model conditions.

    Condition 4 (coefficient-map image of dimension |E|+1) is tested by the
    Jacobian rank at random points.  When |E| = 2|V|-2 an inductively
    strongly connected ordering is a sufficient shortcut; it is reported
    alongside, never in place of, the rank result.
    """
    g = model.graph
    reasons: list[str] = []
    if not is_strongly_connected(g):
        reasons.append("G is not strongly connected")
    if model.inputs != {1} or model.outputs != {1}:
        reasons.append("In = Out = {1} violated")
    if model.leaks != frozenset(g.vertices):
        reasons.append("Leak ≠ V")
    target = len(g.edges) + 1
    isc = inductively_strongly_connected(g, 1)
    shortcut = isc is not None and len(g.edges) == 2 * g.n - 2
    rank: int | None = None
    if model.inputs and model.outputs:
        rank = 0
        for t in range(trials):
            jac, _ = _jacobian_with_retry("c", model, seed, f"icm-{t}")
            rank = max(rank, exact_rank(jac.matrix))
            if rank == target:
                break
        if rank != target:
            reasons.append(f"dim image c = {rank} ≠ |E|+1 = {target}")
    notes = []
    if shortcut:
        notes.append(f"ISC w.r.t. 1 with |E| = 2|V|-2 = {len(g.edges)}: sufficient for condition 4")
    elif isc is None:
        notes.append("not ISC w.r.t. 1")
    return ICMResult(not reasons, reasons, notes, rank, target, isc, shortcut)


def restricted_cycle_rank(model: CompartmentModel, seed: int = 0, kind: str | None = None) -> int:
    """Jacobian rank of the cycle map (or cycle map plus sum-of-paths map)
    over the variant model's own parameters.

    The variant's non-leak diagonals are already tied to their outflows,
    which is exactly the restricted parameter slice.  ``kind`` defaults to
    ``"f"`` when In = Out = {1} and ``"fbar"`` otherwise.
    """
    if not is_strongly_connected(model.graph):
        raise HypothesisError("hypothesis failed: G must be strongly connected")
    if kind is None:
        kind = "f" if model.inputs == {1} and model.outputs == {1} else "fbar"
    if kind not in ("f", "fbar"):
        raise ValueError("restricted rank uses map kind 'f' or 'fbar'")
    if kind == "fbar":
        if 1 not in model.inputs or 1 not in model.outputs:
            raise HypothesisError("hypothesis failed: 1 ∈ In ∩ Out")
        if not model.leaks <= model.inputs | model.outputs:
            raise HypothesisError("hypothesis failed: Leak ⊆ In ∪ Out")
    jac, _ = _jacobian_with_retry(kind, model, seed, "restricted")
    return exact_rank(jac.matrix)


def krylov_rows(model: CompartmentModel, point: ParameterPoint, output: int) -> ExactMatrix:
    """Rows a·Ã^(k-1), k = 1..n-1, for the observability test."""
    A = build_matrix(model, point)
    i = output - 1
    a = [x for c, x in enumerate(A.entries[i]) if c != i]
    sub = A.delete(row=i, col=i)
    rows = []
    cur = a
    for _ in range(model.n - 1):
        rows.append(tuple(cur))
        cur = [sum(cur[r] * sub.entries[r][c] for r in range(len(cur))) for c in range(len(cur))]
    return ExactMatrix(len(rows), model.n - 1, tuple(rows))


def observability_check(model: CompartmentModel, output: int, seed: int = 0) -> bool:
    """True iff the Krylov rows of the output's incoming row are independent."""
    if not is_strongly_connected(model.graph):
        raise HypothesisError("observability check requires a strongly connected graph")
    if output not in model.outputs:
        raise ModelError(f"compartment {output} is not an output")
    if model.n == 1:
        return True
    for attempt in range(2):
        pt = random_point(model, derive_seed(seed, "observe", attempt))
        if exact_rank(krylov_rows(model, pt, output)) == model.n - 1:
            return True
    return False
