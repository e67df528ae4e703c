"""Linear compartment models, parameter points and the compartmental matrix."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .exact import Dual, ExactMatrix, Rational
from .graphs import DirectedGraph, inductively_strongly_connected, is_strongly_connected

# A parameter is named by its index pair: (i, j) is a_ij, the rate of the
# edge j -> i; (0, i) is the leak rate a_0i.
ParamId = tuple[int, int]

SAMPLE_MAX = 10**6


class ModelError(ValueError):
    pass


def param_name(p: ParamId) -> str:
    i, j = p
    if i < 10 and j < 10:
        return f"a{i}{j}"
    return f"a{i}_{j}"


@dataclass(frozen=True)
class CompartmentModel:
    """The quadruple (G, In, Out, Leak)."""

    graph: DirectedGraph
    inputs: frozenset[int] = frozenset()
    outputs: frozenset[int] = frozenset()
    leaks: frozenset[int] = frozenset()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        for attr in ("inputs", "outputs", "leaks"):
            vals = frozenset(int(v) for v in getattr(self, attr))
            bad = [v for v in vals if not 1 <= v <= self.graph.n]
            if bad:
                raise ModelError(f"{attr} contain vertices outside 1..{self.graph.n}: {sorted(bad)}")
            object.__setattr__(self, attr, vals)

    @classmethod
    def build(cls, n: int, edges: Iterable[tuple[int, int]], inputs=(), outputs=(), leaks=(), name=None):
        return cls(DirectedGraph(n, tuple(edges)), frozenset(inputs), frozenset(outputs), frozenset(leaks), name)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def parameters(self) -> list[ParamId]:
        """Edges in graph order, then leaks in vertex order."""
        return [(i, j) for j, i in self.graph.edges] + [(0, k) for k in sorted(self.leaks)]

    @property
    def n_params(self) -> int:
        return len(self.graph.edges) + len(self.leaks)

    def with_sets(self, inputs=None, outputs=None, leaks=None, name=None) -> CompartmentModel:
        return replace(
            self,
            inputs=self.inputs if inputs is None else frozenset(inputs),
            outputs=self.outputs if outputs is None else frozenset(outputs),
            leaks=self.leaks if leaks is None else frozenset(leaks),
            name=name,
        )

    def describe(self) -> str:
        return (
            f"(G[n={self.n}, |E|={len(self.graph.edges)}], In={_fmt(self.inputs)}, "
            f"Out={_fmt(self.outputs)}, Leak={_fmt(self.leaks)})"
        )


@dataclass(frozen=True)
class ParameterPoint:
    """Exact positive rates for every edge and leak parameter."""

    values: Mapping[ParamId, Rational]

    @property
    def edge_rates(self) -> dict[tuple[int, int], Rational]:
        """Keyed by edge ``(from j, to i)``."""
        return {(j, i): v for (i, j), v in self.values.items() if i != 0}

    @property
    def leak_rates(self) -> dict[int, Rational]:
        return {j: v for (i, j), v in self.values.items() if i == 0}

    def __getitem__(self, p: ParamId) -> Rational:
        return self.values[p]

    def check(self, model: CompartmentModel) -> None:
        expected = set(model.parameters)
        got = set(self.values)
        if expected != got:
            missing = sorted(map(param_name, expected - got))
            extra = sorted(map(param_name, got - expected))
            raise ModelError(f"parameter point does not match model (missing {missing}, extra {extra})")
        for p, v in self.values.items():
            if v <= 0:
                raise ModelError(f"rate {param_name(p)} must be positive, got {v}")

    def shifted(self, p: ParamId, h: Rational) -> ParameterPoint:
        vals = dict(self.values)
        vals[p] = vals[p] + h
        return ParameterPoint(vals)


def random_point(model: CompartmentModel, seed: int) -> ParameterPoint:
    """Integer rates in [1, 10**6], pairwise distinct, fixed by ``seed``."""
    rng = random.Random(seed)
    params = model.parameters
    draws = rng.sample(range(1, SAMPLE_MAX + 1), len(params))
    return ParameterPoint(dict(zip(params, draws)))


@dataclass(frozen=True)
class CompartmentalMatrix(ExactMatrix):
    """A(G) at a parameter point, with provenance."""

    model: CompartmentModel | None = field(default=None, compare=False, repr=False)
    point: ParameterPoint | None = field(default=None, compare=False, repr=False)


def build_matrix(
    model: CompartmentModel,
    point: ParameterPoint,
    deriv_target: ParamId | None = None,
) -> CompartmentalMatrix:
    """The compartmental matrix of ``model`` at ``point``.

    With ``deriv_target`` set every entry is a :class:`Dual` whose
    derivative part is the partial derivative of that entry with respect
    to the target parameter.
    """
    point.check(model)
    if deriv_target is not None and deriv_target not in point.values:
        raise ModelError(f"unknown derivative target {deriv_target}")
    n = model.n
    dual = deriv_target is not None

    def rate(p: ParamId):
        v = point.values[p]
        if dual:
            return Dual(v, 1 if p == deriv_target else 0)
        return v

    zero = Dual(0, 0) if dual else 0
    a = [[zero] * n for _ in range(n)]
    for j, i in model.graph.edges:
        r = rate((i, j))
        a[i - 1][j - 1] = r
        a[j - 1][j - 1] = a[j - 1][j - 1] - r
    for k in model.leaks:
        a[k - 1][k - 1] = a[k - 1][k - 1] - rate((0, k))
    return CompartmentalMatrix(n, n, tuple(tuple(r) for r in a), model, point)


def validate(model: CompartmentModel) -> list[str]:
    """Human-readable diagnostics about the model's structure."""
    g = model.graph
    n, m = g.n, len(g.edges)
    diags: list[str] = []
    sc = is_strongly_connected(g)
    diags.append("strongly connected" if sc else "not strongly connected")
    if not model.leaks:
        diags.append("no leaks")
    elif len(model.leaks) == 1:
        diags.append(f"single leak at {next(iter(model.leaks))}")
    else:
        diags.append(f"{len(model.leaks)} leaks")
    if model.leaks == frozenset(g.vertices):
        diags.append("Leak = V")
    if model.inputs and model.inputs == model.outputs:
        diags.append(f"In = Out = {_fmt(model.inputs)}")
    if not model.inputs:
        diags.append("no inputs: analysis unavailable")
    if not model.outputs:
        diags.append("no outputs: analysis unavailable")
    diags.append("1 in In ∩ Out" if 1 in model.inputs & model.outputs else "1 not in In ∩ Out")
    diags.append(
        "Leak ⊆ In ∪ Out" if model.leaks <= model.inputs | model.outputs else "Leak not contained in In ∪ Out"
    )
    if m == 2 * n - 2:
        diags.append(f"|E| = 2|V|-2 = {m}")
    else:
        diags.append(f"|E| = {m} != 2|V|-2 = {2 * n - 2}")
    order = inductively_strongly_connected(g, 1)
    if order is None:
        diags.append("not ISC w.r.t. 1")
    else:
        diags.append(f"ISC w.r.t. 1, ordering {order}")
    return diags


def _fmt(s: Iterable[int]) -> str:
    return "{" + ",".join(map(str, sorted(s))) + "}"
