from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import matrix_algebra, poly_pair, ring
from dfderiv.carriers import (
    CarrierDescriptor,
    Matrix,
    Modular,
    Polynomial,
    from_members,
    generated,
    make_carrier,
    quotient_module,
    quotient_ring,
)
from dfderiv.errors import DeclaredFactRefuted, MalformedDescriptor, NotTwoSided
from dfderiv.scalars import INTEGERS, RATIONALS, ScalarDomain, modular

ints = st.integers(-5, 5)
polys = st.lists(ints, max_size=5)


def test_polynomial_product():
    R, _ = poly_pair()
    a, b = R.element([1, 0, 1]), R.element([-1, 1])
    assert (a * b).encode() == [-1, 1, -1, 1]


def test_matrix_algebra_size_and_first_element(m2z3):
    assert m2z3.tables.size == 81
    assert m2z3.payloads[0] == m2z3.zero


def test_quotient_sizes():
    Z6 = ring(6)
    I = generated(Z6, [2], "ideal")
    assert sorted(I.payloads()) == [0, 2, 4]
    assert quotient_ring(Z6, I).tables.size == 2
    K = from_members(Z6, [0, 3])
    assert quotient_module(Z6, K).tables.size == 3


def test_one_sided_ideal_rejected_for_quotient(m2z3):
    row = generated(m2z3, [m2z3.element([[1, 0], [0, 0]])], "ideal", "right")
    with pytest.raises(NotTwoSided):
        quotient_ring(m2z3, row)


def test_declared_fact_refuted():
    with pytest.raises(DeclaredFactRefuted):
        make_carrier(CarrierDescriptor("Z4", "Ring", Modular(4), declared_facts={"two_torsion_free": "claimed"}))


def test_declared_fact_confirmed():
    c = make_carrier(CarrierDescriptor("Z3", "Ring", Modular(3), declared_facts={"two_torsion_free": "ok"}))
    assert c.tables.size == 3


def test_unknown_kind_rejected():
    with pytest.raises(MalformedDescriptor):
        make_carrier(CarrierDescriptor("X", "Field", Modular(3)))


def test_scalar_domain_json_round_trip():
    for d in (INTEGERS, RATIONALS, modular(5)):
        assert ScalarDomain.from_json(d.to_json()) == d


def test_rational_encoding():
    _, M = poly_pair()
    m = M.elem(((Fraction(1, 2), 1), (0, 0, 1)))
    assert m.encode() == [[[1, 2], [1, 1]], [[0, 1], [0, 1], [1, 1]]]
    assert M.element(m.encode()) == m


@given(polys, polys, polys)
def test_polynomial_ring_axioms(a, b, c):
    R = make_carrier(CarrierDescriptor("R", "Ring", Polynomial(INTEGERS)))
    x, y, z = R.element(a), R.element(b), R.element(c)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == R.element([])


@settings(max_examples=50)
@given(st.integers(0, 80), st.integers(0, 80), st.integers(0, 80))
def test_matrix_ring_axioms(i, j, k):
    S = matrix_algebra(3)
    x, y, z = (S.elem(S.payloads[t]) for t in (i, j, k))
    assert (x * y) * z == x * (y * z)
    assert (x + y) * z == x * z + y * z
    assert S.tables.mul[S.tables.index[x.payload], S.tables.index[y.payload]] == S.tables.index[(x * y).payload]


@given(polys, polys)
def test_module_action_componentwise(a, b):
    R, M = poly_pair()
    m = M.element([[[v, 1] for v in a], [[v, 1] for v in a]])
    r = R.element(b)
    top = (m * r).encode()[0]
    assert top == M.element([[[v, 1] for v in a], []]).__mul__(r).encode()[0]


def test_matrix_rational_encoding(m2q):
    A = m2q.element([[[1, 1], [0, 1]], [[0, 1], [0, 1]]])
    assert A.encode() == [[[1, 1], [0, 1]], [[0, 1], [0, 1]]]


def test_matrix_carrier_over_integers_is_symbolic():
    S = make_carrier(CarrierDescriptor("M2(Z)", "Ring", Matrix(2, INTEGERS)))
    assert not S.finite
