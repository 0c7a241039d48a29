from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from conftest import poly_pair, ring
from dfderiv.checks import (
    check_additive,
    check_bimodule_hom,
    check_derivation,
    check_df_derivation,
    check_endomorphism,
    check_jordan_df_derivation,
    check_module_hom,
)
from dfderiv.maps import (
    AdditiveMap,
    d_example,
    formal_derivative,
    inner_derivation,
    map_compose,
    named_hom,
    scaled_derivative,
    table_map,
)

X = [[0, 1], [1, 1]]  # x in Q[x]
XX = [X, X]


def poly_triples(polys, p=1, q=1):
    R, M = polys
    return (d_example("d1_ex21", M), formal_derivative(R), named_hom("pair_identity", M),
            d_example("d2_ex21", M, p), scaled_derivative(R, q), named_hom("pair_scaling", M, p=p, q=q))


def test_additive(polys):
    R, M = polys
    assert check_additive(formal_derivative(R)).passed
    assert check_additive(named_hom("gamma_mix", M)).verdict == "pass"
    Z3 = ring(3)
    sq = AdditiveMap(Z3, Z3, lambda a: (a * a) % 3, name="square")
    rep = check_additive(sq)
    assert rep.verdict == "fail" and rep.strategy == "exhaustive"
    w = rep.witnesses[0]
    assert [x.payload for x in w.inputs] == [0, 1] or w.residual != Z3.elem(0)
    assert sq(Z3.elem(1) + Z3.elem(1)) != sq(Z3.elem(1)) + sq(Z3.elem(1))


def test_corrupted_table_fails_additivity(m2z3):
    d = inner_derivation(m2z3.element([[0, 1], [0, 0]]))
    t = d.table().copy()
    t[5] = (t[5] + 1) % 81
    rep = check_additive(table_map(m2z3, m2z3, t))
    assert rep.verdict == "fail" and rep.witnesses


def test_inner_derivation_exhaustive(m2z3):
    rep = check_derivation(inner_derivation(m2z3.element([[1, 2], [0, 1]])))
    assert rep.passed and rep.count == 81 * 81 and rep.strategy == "exhaustive"


def test_homs(m2z3, polys):
    assert check_bimodule_hom(named_hom("central_scale", m2z3, c=2)).passed
    assert check_module_hom(named_hom("left_mult", m2z3, c=m2z3.element([[0, 1], [1, 0]]))).passed
    assert not check_bimodule_hom(named_hom("left_mult", m2z3, c=m2z3.element([[0, 1], [1, 0]]))).passed
    _, M = polys
    assert check_module_hom(named_hom("gamma_mix", M)).passed


def test_composite_parts_individually(polys):
    d1, dl1, f1, d2, dl2, f2 = poly_triples(polys)
    assert check_df_derivation(d1, dl1, f1).passed
    rep = check_df_derivation(d2, dl2, f2)
    # d2 fails its own law: [0; 1]·x gives residual [0; -1]
    assert rep.verdict == "fail"
    R, M = polys
    m, a = M.element([[], [[1, 1]]]), R.element([0, 1])
    assert d2(m * a) - (d2(m) * a + f2(m) * dl2(a)) == M.element([[], [[-1, 1]]])


def test_componentwise_derivative_sample(polys):
    d1, dl1, f1, *_ = poly_triples(polys)
    R, M = polys
    m = M.element([[[0, 1], [0, 1], [1, 1]], [[0, 1], [0, 1], [0, 1], [1, 1]]])
    a = R.element([0, 1])
    lhs = d1(m * a)
    assert lhs == d1(m) * a + f1(m) * dl1(a)
    assert lhs.encode() == [[[0, 1], [0, 1], [3, 1]], [[0, 1], [0, 1], [0, 1], [4, 1]]]


def test_composite_law_witness(polys):
    d1, dl1, f1, d2, dl2, f2 = poly_triples(polys)
    R, M = polys
    focus = [(M.element(XX), R.element([0, 1]))]
    rep = check_df_derivation(map_compose(d1, d2), map_compose(dl1, dl2), map_compose(f1, f2), focus=focus,
                              require_leibniz=False)
    assert rep.verdict == "fail" and rep.strategy == "probe-complete"
    w = rep.witnesses[0].to_dict()
    lhs, rhs = ref.composite_witness([ref.X, ref.X], ref.X)
    assert w["lhs"] == [ref.encode_q_poly(c) for c in lhs] == [[[2, 1], [2, 1]], [[0, 1], [2, 1]]]
    assert w["rhs"] == [ref.encode_q_poly(c) for c in rhs] == [[[0, 1], [1, 1]], [[0, 1], [1, 1]]]
    assert w["residual"] == [[[2, 1], [1, 1]], [[0, 1], [1, 1]]]


def test_mixed_hom_composite_not_endomorphism(polys):
    R, M = polys
    d1 = d_example("d1_ex21", M)
    g = named_hom("gamma_mix", M)
    assert check_endomorphism(g).passed
    rep = check_endomorphism(map_compose(d1, g), focus=[(M.element(XX), R.element([0, 1]))])
    assert rep.verdict == "fail"
    w = rep.witnesses[0]
    assert w.residual == M.element([[[0, 1], [5, 1]], [[0, 1], [1, 1]]])


def test_right_mult_jordan_concrete(m2q):
    B0 = m2q.element([[[0, 1], [1, 1]], [[0, 1], [0, 1]]])
    A = m2q.element([[[1, 1], [0, 1]], [[0, 1], [0, 1]]])
    D, delta, f = named_hom("right_mult", m2q, B0=B0), inner_derivation(B0), named_hom("negation", m2q)
    assert D(A * A) == B0
    assert D(A) * A + f(A) * delta(A) == B0
    rep = check_jordan_df_derivation(D, delta, f)
    assert rep.passed and rep.strategy == "probe-complete"


def test_probe_determinism(polys):
    d1, dl1, f1, *_ = poly_triples(polys)
    a = check_df_derivation(d1, dl1, f1).to_dict()
    R2, M2 = poly_pair()
    b = check_df_derivation(d_example("d1_ex21", M2), formal_derivative(R2), named_hom("pair_identity", M2)).to_dict()
    a.pop("elapsed_s"), b.pop("elapsed_s")
    assert a == b


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 80), st.integers(0, 80))
def test_witnesses_re_evaluate(i, j):
    """Every failure witness re-evaluates through the library to its residual."""
    S = __import__("conftest").matrix_algebra(3)
    B = S.elem(S.payloads[i])
    c = S.elem(S.payloads[j])
    D = named_hom("right_mult", S, B0=c)
    delta, f = inner_derivation(B), named_hom("identity", S)
    rep = check_df_derivation(D, delta, f)
    for w in rep.witnesses:
        x, a = w.inputs
        assert D(x * a) == w.lhs
        assert D(x) * a + f(x) * delta(a) == w.rhs
        assert not w.residual.is_zero()
