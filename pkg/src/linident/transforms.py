"""Model surgery that provably preserves or yields identifiability.

Starting from an identifiable cycle model (strongly connected, input and
output in compartment 1, a leak everywhere, coefficient image of dimension
|E|+1) these constructors produce:

* single-leak variants, which are generically locally identifiable;
* variants with 1 in In ∩ Out and every leak on an input or output
  compartment, which are generically locally identifiable;
* tiered unions of two models joined by one-way bridge edges;
* the monomial scaling reparametrization along a BFS tree.
"""

from __future__ import annotations

import itertools
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .engine import ICMResult, IdentReport, Verdict, analyze, check_icm, is_identifiable_function
from .graphs import DirectedGraph, is_strongly_connected
from .model import CompartmentModel, ModelError, ParamId, param_name

Monomial = dict[ParamId, int]


class TransformError(ModelError):
    pass


class UnverifiedAncestorWarning(UserWarning):
    """The starting model was not confirmed to be an identifiable cycle model."""


def _require_icm(icm: CompartmentModel, seed: int, waive: bool) -> ICMResult | None:
    if waive:
        warnings.warn("identifiable-cycle-model check waived by caller", UnverifiedAncestorWarning, stacklevel=3)
        return None
    res = check_icm(icm, seed)
    if not res.is_icm:
        raise TransformError("not an identifiable cycle model: " + "; ".join(res.reasons))
    return res


def single_leak_variant(icm: CompartmentModel, k: int, seed: int = 0, waive_check: bool = False) -> CompartmentModel:
    """(G, {1}, {1}, {k}) from an identifiable cycle model (G, {1}, {1}, V)."""
    if not 1 <= k <= icm.n:
        raise TransformError(f"leak compartment {k} outside 1..{icm.n}")
    _require_icm(icm, seed, waive_check)
    return icm.with_sets(inputs={1}, outputs={1}, leaks={k})


def io_leak_variant(
    icm: CompartmentModel,
    in_set: Iterable[int],
    out_set: Iterable[int],
    leak_set: Iterable[int],
    seed: int = 0,
    waive_check: bool = False,
) -> CompartmentModel:
    """(G, In, Out, Leak) with 1 ∈ In, 1 ∈ Out and Leak ⊆ In ∪ Out."""
    ins, outs, leaks = frozenset(in_set), frozenset(out_set), frozenset(leak_set)
    if 1 not in ins:
        raise TransformError("1 ∈ In violated")
    if 1 not in outs:
        raise TransformError("1 ∈ Out violated")
    if not leaks <= ins | outs:
        raise TransformError("Leak ⊆ In ∪ Out violated")
    bad = [v for v in ins | outs | leaks if not 1 <= v <= icm.n]
    if bad:
        raise TransformError(f"compartments outside 1..{icm.n}: {sorted(bad)}")
    ancestor = icm.with_sets(inputs={1}, outputs={1}, leaks=icm.graph.vertices)
    _require_icm(ancestor, seed, waive_check)
    return icm.with_sets(inputs=ins, outputs=outs, leaks=leaks)


# ----------------------------------------------------------------------------
# Tiered unions
# ----------------------------------------------------------------------------


class TieredUnionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TieredUnionSpec:
    """Two models joined by bridge edges ``w1[l] -> w2[l]``.

    ``m1.leaks`` and ``m2.inputs`` are the genuine leaks and inputs of the
    joined model.  Standalone, the upper tier is judged with the bridge
    sources counted as leaks and the lower tier with the bridge targets
    counted as inputs; see :meth:`standalone`.  ``w2`` uses ``m2``'s own
    numbering; it is shifted by ``m1.n`` in the union.
    """

    m1: CompartmentModel
    m2: CompartmentModel
    w1: tuple[int, ...]
    w2: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "w1", tuple(self.w1))
        object.__setattr__(self, "w2", tuple(self.w2))
        if len(self.w1) != len(self.w2):
            raise TransformError("bridge lists w1 and w2 differ in length")
        if not self.w1:
            raise TransformError("bridge required: w1 and w2 are empty")
        if any(not 1 <= v <= self.m1.n for v in self.w1):
            raise TransformError(f"w1 has vertices outside 1..{self.m1.n}")
        if any(not 1 <= v <= self.m2.n for v in self.w2):
            raise TransformError(f"w2 has vertices outside 1..{self.m2.n}")
        if len(set(zip(self.w1, self.w2))) != len(self.w1):
            raise TransformError("duplicate bridge edge")
        clash = self.m2.inputs & set(self.w2)
        if clash:
            raise TransformError(f"In₂ ∩ W₂ must be empty, found {sorted(clash)}")

    @property
    def leak_bridge_overlap(self) -> frozenset[int]:
        return self.m1.leaks & frozenset(self.w1)

    def standalone(self) -> tuple[CompartmentModel, CompartmentModel]:
        upper = self.m1.with_sets(leaks=self.m1.leaks | set(self.w1))
        lower = self.m2.with_sets(inputs=self.m2.inputs | set(self.w2))
        return upper, lower


def tiered_union(spec: TieredUnionSpec, name: str | None = None) -> CompartmentModel:
    """G₁ ∪ G₂ plus bridge edges, with inputs, outputs and leaks united.

    The bridge rates drain their source compartments through the diagonal
    of A exactly as the standalone leaks did.
    """
    if spec.leak_bridge_overlap:
        warnings.warn(
            f"compartments {sorted(spec.leak_bridge_overlap)} carry both a leak and a bridge; "
            "the union has one more parameter than the upper tier resolves on its own",
            TieredUnionWarning,
            stacklevel=2,
        )
    off = spec.m1.n
    edges = list(spec.m1.graph.edges)
    edges += [(a + off, b + off) for a, b in spec.m2.graph.edges]
    edges += [(i, j + off) for i, j in zip(spec.w1, spec.w2)]
    shift = lambda s: {v + off for v in s}  # noqa: E731
    return CompartmentModel(
        DirectedGraph(off + spec.m2.n, tuple(edges)),
        frozenset(spec.m1.inputs | shift(spec.m2.inputs)),
        frozenset(spec.m1.outputs | shift(spec.m2.outputs)),
        frozenset(spec.m1.leaks | shift(spec.m2.leaks)),
        name,
    )


@dataclass
class TieredCheck:
    upper: IdentReport
    lower: IdentReport
    union: IdentReport
    strongly_connected_tiers: bool
    guarantee_applies: bool
    notes: list[str] = field(default_factory=list)


def verify_tiered(spec: TieredUnionSpec, seed: int = 0, trials: int = 3) -> TieredCheck:
    """Analyze both standalone tiers and the union.

    The union is guaranteed identifiable when both tiers are strongly
    connected, both standalone tiers are identifiable and no bridge source
    also leaks.  The union is analyzed regardless.
    """
    upper, lower = spec.standalone()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TieredUnionWarning)
        union = tiered_union(spec)
    notes = []
    sc = is_strongly_connected(spec.m1.graph) and is_strongly_connected(spec.m2.graph)
    if not sc:
        notes.append("a tier is not strongly connected")
    if spec.leak_bridge_overlap:
        notes.append(f"leak and bridge share compartments {sorted(spec.leak_bridge_overlap)}")
    r1 = analyze(upper, seed, trials)
    r2 = analyze(lower, seed, trials)
    ru = analyze(union, seed, trials)
    applies = sc and not spec.leak_bridge_overlap and r1.identifiable and r2.identifiable
    return TieredCheck(r1, r2, ru, sc, applies, notes)


# ----------------------------------------------------------------------------
# Suggestions
# ----------------------------------------------------------------------------


@dataclass
class Suggestion:
    description: str
    model: CompartmentModel
    report: IdentReport


def suggest_variants(icm: CompartmentModel, seed: int = 0, max_extra: int = 1, trials: int = 3) -> list[Suggestion]:
    """Identifiable variants of an identifiable cycle model.

    Emits every single-leak variant, then for each set S of up to
    ``max_extra`` compartments other than 1 the variants with leaks
    {1} ∪ S where S is covered entirely by new outputs or entirely by new
    inputs.  Each candidate is re-analyzed and dropped unless identifiable.
    """
    _require_icm(icm, seed, False)
    candidates: list[tuple[str, CompartmentModel]] = []
    for k in icm.graph.vertices:
        candidates.append((f"single leak at {k}", icm.with_sets(inputs={1}, outputs={1}, leaks={k})))
    others = [v for v in icm.graph.vertices if v != 1]
    for size in range(1, max_extra + 1):
        for extra in itertools.combinations(others, size):
            leaks = {1, *extra}
            tag = ",".join(map(str, extra))
            candidates.append(
                (f"leaks {_fmt(leaks)}, outputs added at {{{tag}}}", icm.with_sets(inputs={1}, outputs=leaks, leaks=leaks))
            )
            candidates.append(
                (f"leaks {_fmt(leaks)}, inputs added at {{{tag}}}", icm.with_sets(inputs=leaks, outputs={1}, leaks=leaks))
            )
    out = []
    for desc, model in candidates:
        rep = analyze(model, seed, trials)
        if rep.verdict is Verdict.IDENTIFIABLE:
            out.append(Suggestion(desc, model, rep))
    return out


def _fmt(s) -> str:
    return "{" + ",".join(map(str, sorted(s))) + "}"


# ----------------------------------------------------------------------------
# Scaling reparametrization
# ----------------------------------------------------------------------------


def mono_mul(*monos: Monomial) -> Monomial:
    out: Monomial = {}
    for m in monos:
        for p, e in m.items():
            out[p] = out.get(p, 0) + e
    return {p: e for p, e in out.items() if e}


def mono_inv(m: Monomial) -> Monomial:
    return {p: -e for p, e in m.items()}


def canonical(m: Monomial) -> tuple[tuple[ParamId, int], ...]:
    return tuple(sorted((p, e) for p, e in m.items() if e))


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    parts = []
    for p, e in canonical(m):
        name = param_name(p)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


@dataclass
class ScalingReparam:
    """X_i = x_i / s_i with s_i the product of rates on the tree path 1 -> i."""

    model: CompartmentModel
    tree: dict[int, int]
    scales: dict[int, Monomial]
    entries: dict[tuple[int, int], Monomial]
    negative_entries: list[tuple[int, int]]
    verified: dict[tuple[int, int], bool] = field(default_factory=dict)

    def matrix(self) -> list[list[Monomial | None]]:
        n = self.model.n
        return [[self.entries.get((i, k)) for k in range(1, n + 1)] for i in range(1, n + 1)]

    def matrix_strings(self) -> list[list[str]]:
        return [["0" if m is None else mono_str(m) for m in row] for row in self.matrix()]


def bfs_tree(g: DirectedGraph, root: int = 1) -> dict[int, int]:
    """Parent map of the shortest-path tree from ``root``; ties go to the
    smallest parent index."""
    parent: dict[int, int] = {}
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in g.successors[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                queue.append(w)
    return parent


def scaling_reparam(icm: CompartmentModel, seed: int = 0, verify: bool = True) -> ScalingReparam:
    """Monomial scaling that turns every tree edge into the constant 1.

    Diagonal entries keep their self-cycle symbol a_ii.  The entry for edge
    k -> i becomes a_ik * s_k / s_i, which telescopes around every cycle.
    With ``verify`` each off-diagonal entry is checked to be an identifiable
    function of the original model.
    """
    _require_icm(icm, seed, False)
    g = icm.graph
    if not is_strongly_connected(g):
        raise TransformError("scaling reparametrization needs a strongly connected graph")
    tree = bfs_tree(g, 1)
    order = [1] + sorted(tree, key=lambda v: _depth(tree, v))
    scales: dict[int, Monomial] = {1: {}}
    for v in order[1:]:
        p = tree[v]
        scales[v] = mono_mul(scales[p], {(v, p): 1})
    entries: dict[tuple[int, int], Monomial] = {(i, i): {(i, i): 1} for i in g.vertices}
    negative = []
    for k, i in g.edges:
        m = mono_mul({(i, k): 1}, scales[k], mono_inv(scales[i]))
        entries[(i, k)] = m
        if any(e < 0 for e in m.values()):
            negative.append((i, k))
    rep = ScalingReparam(icm, tree, scales, entries, sorted(negative))
    if verify:
        for (i, k), m in sorted(entries.items()):
            if i != k:
                rep.verified[(i, k)] = is_identifiable_function(icm, m, seed)
    return rep


def _depth(tree: dict[int, int], v: int) -> int:
    d = 0
    while v in tree:
        v = tree[v]
        d += 1
    return d
