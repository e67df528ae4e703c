from __future__ import annotations

import random

import pytest

from fleet import random_isc_graph
from linident.documents import load_fixture, serialize_model
from linident.engine import Verdict, analyze
from linident.model import CompartmentModel
from linident.transforms import (
    TieredUnionSpec,
    TieredUnionWarning,
    TransformError,
    UnverifiedAncestorWarning,
    bfs_tree,
    canonical,
    io_leak_variant,
    mono_mul,
    mono_str,
    scaling_reparam,
    single_leak_variant,
    suggest_variants,
    tiered_union,
    verify_tiered,
)


def fig4_spec() -> TieredUnionSpec:
    m1 = CompartmentModel.build(3, [(1, 2), (2, 1), (2, 3), (3, 2)], {2}, {2}, {1})
    m2 = CompartmentModel.build(2, [(1, 2), (2, 1)], (), {1}, {2})
    return TieredUnionSpec(m1, m2, (1,), (1,))


def test_single_leak_variants_fig1(fig1):
    for k in (1, 2, 3):
        v = single_leak_variant(fig1, k)
        assert v.leaks == {k} and v.inputs == {1} and v.outputs == {1}
        assert analyze(v).verdict is Verdict.IDENTIFIABLE
    with pytest.raises(TransformError):
        single_leak_variant(fig1, 4)


def test_single_leak_requires_icm_unless_waived():
    fig2 = load_fixture("fig2.model")
    with pytest.raises(TransformError, match="not an identifiable cycle model"):
        single_leak_variant(fig2, 1)
    with pytest.warns(UnverifiedAncestorWarning):
        single_leak_variant(fig2, 1, waive_check=True)


def test_io_leak_variant(fig1):
    v = io_leak_variant(fig1, {1}, {1, 2}, {1, 2})
    assert analyze(v).rank == 6
    with pytest.raises(TransformError, match="Leak ⊆ In ∪ Out violated"):
        io_leak_variant(fig1, {1}, {1}, {1, 2})
    with pytest.raises(TransformError, match="1 ∈ In violated"):
        io_leak_variant(fig1, {2}, {1}, {1})
    with pytest.raises(TransformError, match="1 ∈ Out violated"):
        io_leak_variant(fig1, {1}, {2}, {1})


def test_single_leak_sweep_on_isc_graphs():
    rng = random.Random(5)
    for _ in range(5):
        g = random_isc_graph(rng, rng.randint(2, 5))
        icm = CompartmentModel(g, frozenset({1}), frozenset({1}), frozenset(g.vertices))
        for k in g.vertices:
            assert analyze(single_leak_variant(icm, k)).verdict is Verdict.IDENTIFIABLE


def test_tiered_union_reconstructs_fig4():
    with pytest.warns(TieredUnionWarning):
        u = tiered_union(fig4_spec(), name="fig4")
    assert serialize_model(u) == serialize_model(load_fixture("fig4.model"))
    assert u.n_params == 9


def test_tiered_union_checks():
    spec = fig4_spec()
    check = verify_tiered(spec)
    assert check.upper.verdict is Verdict.IDENTIFIABLE
    assert check.lower.verdict is Verdict.IDENTIFIABLE
    assert check.union.verdict is Verdict.IDENTIFIABLE
    assert not check.guarantee_applies
    upper, lower = spec.standalone()
    assert upper.leaks == {1} and lower.inputs == {1}


def test_tiered_union_guarantee_without_overlap():
    m1 = CompartmentModel.build(3, [(1, 2), (2, 1), (2, 3), (3, 2)], {2}, {2, 3}, {3})
    m2 = CompartmentModel.build(2, [(1, 2), (2, 1)], (), {1}, {2})
    check = verify_tiered(TieredUnionSpec(m1, m2, (1,), (1,)))
    assert check.guarantee_applies
    assert check.union.verdict is Verdict.IDENTIFIABLE


def test_tiered_union_spec_errors():
    s = fig4_spec()
    with pytest.raises(TransformError, match="bridge required"):
        TieredUnionSpec(s.m1, s.m2, (), ())
    with pytest.raises(TransformError, match="differ in length"):
        TieredUnionSpec(s.m1, s.m2, (1, 2), (1,))
    with pytest.raises(TransformError, match="In₂ ∩ W₂"):
        TieredUnionSpec(s.m1, s.m2.with_sets(inputs={1}), (1,), (1,))
    with pytest.raises(TransformError, match="outside"):
        TieredUnionSpec(s.m1, s.m2, (4,), (1,))


def test_suggestions_fig1(fig1):
    sugg = suggest_variants(fig1)
    descs = [s.description for s in sugg]
    assert descs[:3] == ["single leak at 1", "single leak at 2", "single leak at 3"]
    assert len(sugg) == 7
    assert all(s.report.verdict is Verdict.IDENTIFIABLE for s in sugg)


def test_suggestions_single_compartment():
    one = CompartmentModel.build(1, [], {1}, {1}, {1})
    sugg = suggest_variants(one)
    assert [s.model for s in sugg] == [one]


def test_reparam_fig1(fig1):
    rep = scaling_reparam(fig1)
    assert rep.matrix_strings() == [
        ["a11", "a12*a21", "a13*a21*a32"],
        ["1", "a22", "0"],
        ["0", "1", "a33"],
    ]
    assert rep.negative_entries == []
    assert all(rep.verified.values())
    assert bfs_tree(fig1.graph) == {2: 1, 3: 2}


def test_reparam_telescopes_around_cycles():
    from linident.graphs import simple_cycles

    rng = random.Random(8)
    for _ in range(5):
        g = random_isc_graph(rng, rng.randint(2, 5))
        icm = CompartmentModel(g, frozenset({1}), frozenset({1}), frozenset(g.vertices))
        rep = scaling_reparam(icm, verify=False)
        for c in simple_cycles(g):
            prod = mono_mul(*(rep.entries[(i, j)] for j, i in c.edges))
            assert canonical(prod) == canonical(c.monomial())


def test_reparam_flags_negative_exponents():
    g_edges = [(1, 2), (2, 3), (3, 1), (1, 3)]
    icm = CompartmentModel.build(3, g_edges, {1}, {1}, {1, 2, 3})
    rep = scaling_reparam(icm)
    # Edge 2->3 is off the BFS tree and lands on a vertex already reached from 1.
    assert (3, 2) in rep.negative_entries
    assert all(rep.verified.values())


def test_monomial_helpers():
    assert mono_str({}) == "1"
    assert mono_str({(1, 2): 1, (0, 1): -1}) == "a01^-1*a12"
    assert mono_mul({(1, 2): 1}, {(1, 2): -1}) == {}


def test_variants_reproduce_paper_models(fig1):
    assert single_leak_variant(fig1, 1) == load_fixture("fig2.model")
    assert io_leak_variant(fig1, {1}, {1, 2}, {1, 2}) == load_fixture("fig3.model")
    assert io_leak_variant(fig1, {1}, {1}, {1}) == single_leak_variant(fig1, 1)
    v3 = single_leak_variant(fig1, 3)
    assert v3.leaks == {3} and v3.n_params == len(fig1.graph.edges) + 1


def test_hori_single_leak_at_5():
    v = single_leak_variant(load_fixture("fig6_hori.model"), 5)
    rep = analyze(v)
    assert rep.n_params == 7 and rep.verdict is Verdict.IDENTIFIABLE


def test_three_tier_chain_from_fig2_graph():
    edges = [(1, 2), (2, 1), (2, 3), (3, 1)]
    top = CompartmentModel.build(3, edges, {1}, {1}, ())
    mid = CompartmentModel.build(3, edges, (), {1}, ())
    bottom = CompartmentModel.build(3, edges, (), {1}, {1})
    # Each tier standalone, with bridges counted as leaks or inputs, is the Fig 2 model.
    assert analyze(top.with_sets(leaks={1})).verdict is Verdict.IDENTIFIABLE
    upper = tiered_union(TieredUnionSpec(top, mid, (1,), (1,)))
    chain = tiered_union(TieredUnionSpec(upper, bottom, (4,), (1,)))
    assert chain.n == 9 and chain.outputs == {1, 4, 7} and chain.leaks == {7}
    rep = analyze(chain)
    assert rep.n_params == 15 and rep.verdict is Verdict.IDENTIFIABLE


def test_suggestions_for_manganese_include_leak_at_5():
    sugg = suggest_variants(load_fixture("fig5_mn_icm.model"), max_extra=0, trials=1)
    assert len(sugg) == 11
    leak5 = [s for s in sugg if s.model.leaks == {5}]
    assert leak5 and leak5[0].report.rank == 21


def test_reparam_two_cycle():
    icm = CompartmentModel.build(2, [(1, 2), (2, 1)], {1}, {1}, {1, 2})
    rep = scaling_reparam(icm)
    assert rep.matrix_strings() == [["a11", "a12*a21"], ["1", "a22"]]
    assert rep.scales[1] == {}
