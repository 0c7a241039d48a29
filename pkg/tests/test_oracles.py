from __future__ import annotations

import pytest

from conftest import ring
from dfderiv.errors import HypothesisFailed
from dfderiv.oracles import (
    OracleInstance,
    all_derivations,
    creedon_instance,
    creedon_oracle,
    inner_derivations,
    invertible_left_mults,
    jordan_implies_derivation_oracle,
    jordan_instance,
    m2q_lemma_instance,
    m2z3,
    posner_composition_oracle,
    posner_instance,
    posner_ring_oracle,
    recheck_composition,
    units,
    verify_hypotheses,
)

import reference as ref


def test_family_sizes():
    S = m2z3()
    assert len(inner_derivations(S)) == ref.count_derivations(3) == 27
    assert len(all_derivations(S)) == 27
    # GL2(Z3) has 48 elements
    assert len(units(S)) == len(invertible_left_mults(S)) == 48


def test_hypotheses_refuted_on_z6():
    Z6 = ring(6)
    inst = OracleInstance("z6", Z6, Z6, None, inner_derivations(Z6), [], ("prime_ring",))
    with pytest.raises(HypothesisFailed) as e:
        verify_hypotheses(inst)
    [fact] = e.value.facts
    assert not fact.holds
    assert ref.is_prime_ring_zn(6) == (2, 3)


def test_hypotheses_refuted_on_m2z2():
    inst = posner_instance(m2z3(2))
    with pytest.raises(HypothesisFailed, match="two_torsion_free"):
        posner_composition_oracle(inst)


def test_posner_sampled_small():
    inst = posner_instance(mode="sampled", samples=4000, seed=1)
    comp, ring_rep = posner_composition_oracle(inst), posner_ring_oracle(inst)
    assert comp.verdict == "pass" and comp.counterexample_count == 0
    assert comp.quantifier_sizes["pairs_evaluated"] == 4000
    assert ring_rep.tallies["antecedent_true"] + ring_rep.tallies["antecedent_false_skipped"] == 4000
    # a second call reuses the shared evaluation
    assert posner_ring_oracle(inst) is ring_rep


@pytest.mark.slow
def test_posner_exhaustive():
    inst = posner_instance()
    comp, ring_rep = posner_composition_oracle(inst), posner_ring_oracle(inst)
    assert comp.verdict == "pass"
    assert ring_rep.verdict == "fail" and ring_rep.counterexample_count == 6400
    assert ring_rep.tallies["antecedent_true"] == 10773
    fam = inst.family()
    ce = ring_rep.counterexamples[0]
    i1 = next(i for i in range(fam.size) if fam.describe(i) == ce["first"])
    i2 = next(i for i in range(fam.size) if fam.describe(i) == ce["second"])
    r = recheck_composition(fam, i1, i2)
    assert r["P"] and not r["d1_zero"] and not r["d2_zero"]


def test_creedon_on_triangular():
    rep = creedon_oracle(creedon_instance())
    assert rep.verdict == "pass" and rep.counterexample_count == 0
    assert rep.tallies["antecedent_true"] == 4723920
    assert rep.tallies["branch_none"] == 0


def test_creedon_refuses_non_prime_submodule():
    inst = creedon_instance(L_spec={"entries_zero": [[0, 0], [1, 1]]})
    with pytest.raises(HypothesisFailed, match="prime_submodule"):
        creedon_oracle(inst)


def test_jordan_oracle():
    rep = jordan_implies_derivation_oracle(jordan_instance())
    assert rep.verdict == "pass"
    assert rep.tallies["pairs"] == 27 * 3
    assert rep.tallies["pairs_with_equal_classes"] == 81
    assert rep.tallies["jordan_maps"] == 81 * 81
    assert all(r["jordan_count"] == r["df_count"] == 81 for r in rep.details["per_pair"])


def test_partitions_do_not_change_reports():
    a = jordan_implies_derivation_oracle(jordan_instance(partitions=1)).to_dict()
    b = jordan_implies_derivation_oracle(jordan_instance(partitions=3)).to_dict()
    for d in (a, b):
        d.pop("elapsed_s")
    assert a == b


def test_m2q_lemma_suite_single_context():
    from dfderiv.oracles import lemma_suite

    rep = lemma_suite(m2q_lemma_instance(1))
    assert rep.verdict == "pass"
    assert rep.tallies["L33"]["fail"] == 0 and rep.tallies["L33"]["pass"] >= 1
    assert rep.tallies["L31"]["skipped"] == 1
