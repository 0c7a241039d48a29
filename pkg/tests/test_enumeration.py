from __future__ import annotations

import numpy as np
import pytest

import reference as ref
from conftest import matrix_algebra, ring
from dfderiv.checks import check_df_derivation, check_jordan_df_derivation
from dfderiv.enumeration import (
    Constraint,
    EnumerationSpec,
    enumerate_additive_maps,
    enumerate_df_derivations,
    enumerate_jordan_df_derivations,
    random_additive_table,
)
from dfderiv.errors import BudgetExceeded, CarrierMismatch, MalformedDescriptor
from dfderiv.maps import inner_derivation, named_hom, table_map

S = matrix_algebra(3)
P = 3


def flat(payload):
    return tuple(v for row in payload for v in row)


def el(t):
    return S.element([[t[0], t[1]], [t[2], t[3]]])


def test_derivations_of_small_rings():
    Z3 = ring(3)
    assert enumerate_additive_maps(EnumerationSpec(Z3, Z3, [Constraint("derivation")])).count == 1
    res = enumerate_additive_maps(EnumerationSpec(S, S, [Constraint("derivation")]))
    assert res.count == ref.count_derivations(P) == 27
    # every derivation of M2(Z3) is inner
    inner = {tuple(inner_derivation(S.elem(p)).table()) for p in S.payloads}
    assert {tuple(t) for t in res.tables} == inner


def test_module_and_bimodule_homs():
    mod = enumerate_additive_maps(EnumerationSpec(S, S, [Constraint("module_hom")]))
    bi = enumerate_additive_maps(EnumerationSpec(S, S, [Constraint("bimodule_hom")]))
    assert mod.count == ref.count_module_homs(P) == 81
    assert bi.count == ref.count_module_homs(P, bimodule=True) == 3


@pytest.mark.parametrize("B,c", [((0, 1, 0, 0), 1), ((1, 2, 0, 1), 2), ((0, 0, 0, 0), 0), ((2, 0, 1, 1), 1)])
def test_df_counts_agree_with_linear_algebra(B, c):
    delta = inner_derivation(el(B))
    f = named_hom("central_scale", S, c=c)
    expected = ref.count_df(ref.inner(B, P), c, P)
    closed = enumerate_df_derivations(delta, f, S)
    pruned = enumerate_df_derivations(delta, f, S, closed_form=False)
    assert closed.strategy == "closed_form" and pruned.strategy == "pruned"
    assert closed.count == pruned.count == expected == 81
    assert sorted(map(tuple, closed.tables)) == sorted(map(tuple, pruned.tables))
    jordan = enumerate_jordan_df_derivations(delta, f, S, S)
    assert jordan.count == ref.count_jordan(ref.inner(B, P), c, P) == 81
    assert sorted(map(tuple, jordan.tables)) == sorted(map(tuple, closed.tables))


def test_jordan_contains_df_for_trivial_pair():
    zero_d, zero_f = inner_derivation(S.elem(S.payloads[0])), named_hom("central_scale", S, c=0)
    jordan = enumerate_jordan_df_derivations(zero_d, zero_f, S, S)
    df = enumerate_df_derivations(zero_d, zero_f, S)
    assert jordan.count == ref.count_jordan(lambda x: (0, 0, 0, 0), 0, P) == 81
    assert all(jordan.contains(t) for t in df.tables)


def test_action_law_count():
    B = (0, 1, 0, 0)
    spec = EnumerationSpec(S, S, [Constraint("jordan_action_law", inner_derivation(el(B)),
                                             named_hom("central_scale", S, c=1))])
    assert enumerate_additive_maps(spec).count == ref.count_action_law(ref.inner(B, P), 1, P) == 3


def test_right_mult_example_in_both_streams():
    B0 = el((0, 1, 0, 0))
    delta, f = inner_derivation(B0), named_hom("negation", S)
    D = named_hom("right_mult", S, B0=B0)
    assert enumerate_jordan_df_derivations(delta, f, S, S).contains(D.table())
    assert enumerate_df_derivations(delta, f, S).contains(D.table())


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        enumerate_additive_maps(EnumerationSpec(S, S, [Constraint("module_hom")], budget=50))


def test_malformed_and_mismatched_inputs():
    with pytest.raises(MalformedDescriptor):
        Constraint("df_derivation")
    with pytest.raises(MalformedDescriptor):
        Constraint("bogus")
    Z3 = ring(3)
    with pytest.raises(CarrierMismatch):
        enumerate_df_derivations(inner_derivation(S.elem(S.payloads[1])), named_hom("identity", Z3), S)


def test_partitioned_search_is_deterministic():
    spec = lambda k: EnumerationSpec(S, S, [Constraint("derivation")], parallel_partitions=k)  # noqa: E731
    a, b = enumerate_additive_maps(spec(1)), enumerate_additive_maps(spec(3))
    assert np.array_equal(a.tables, b.tables)
    assert a.examined == b.examined and a.survivors == b.survivors


def test_completeness_against_random_additive_maps():
    """A random additive map is enumerated iff it passes the law check."""
    B0 = el((0, 1, 0, 0))
    delta, f = inner_derivation(B0), named_hom("negation", S)
    df = enumerate_df_derivations(delta, f, S)
    jordan = enumerate_jordan_df_derivations(delta, f, S, S)
    rng = np.random.default_rng(7)
    tables = [random_additive_table(S, S, rng) for _ in range(100)]
    # seed the sample with members so both branches are exercised
    tables += [df.tables[k] for k in rng.choice(df.count, 5, replace=False)]
    for t in tables:
        d = table_map(S, S, t)
        assert df.contains(t) == check_df_derivation(d, delta, f).passed
        assert jordan.contains(t) == check_jordan_df_derivation(d, delta, f).passed
