"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Frozen values come from the independent computations in ``reference.py`` or
from direct hand evaluation; expensive scenario runs are shared through a
module-level cache (partition count 1 and 3).
"""
from __future__ import annotations

import time

import numpy as np
import pytest

import reference as ref
from conftest import matrix_algebra, poly_pair
from dfderiv.carriers import CarrierDescriptor, Matrix, Modular, make_carrier
from dfderiv.checks import check_df_derivation, check_endomorphism, check_jordan_df_derivation
from dfderiv.enumeration import (
    Constraint,
    EnumerationSpec,
    enumerate_additive_maps,
    enumerate_df_derivations,
    enumerate_jordan_df_derivations,
)
from dfderiv.errors import DeclaredFactRefuted, HypothesisFailed
from dfderiv.maps import d_example, formal_derivative, inner_derivation, map_compose, named_hom, scaled_derivative
from dfderiv.oracles import (
    inner_derivations,
    jordan_instance,
    jordan_implies_derivation_oracle,
    posner_instance,
    posner_composition_oracle,
    posner_ring_oracle,
    m2z3,
)
from dfderiv.probe import ProbeSpec
from dfderiv.scalars import RATIONALS
from dfderiv.scenario import Options, dumps, parse_scenario, run_scenario, shipped_path, strip_timing
from dfderiv.structure import is_two_torsion_free

DETERMINISM_SCENARIOS = ["m2z3_enumeration", "posner_m2z3", "creedon_t2z3", "jordan_m2z3",
                         "lemma_suite_m2z3", "lemma_suite_m2q"]
_RUNS: dict = {}


def scenario_report(name: str, partitions: int = 1) -> dict:
    key = (name, partitions)
    if key not in _RUNS:
        opts = Options(partitions=partitions)
        t0 = time.perf_counter()
        rep = run_scenario(parse_scenario(shipped_path(name), opts), opts)
        _RUNS[key] = (rep, time.perf_counter() - t0)
    return _RUNS[key][0]



def task(rep: dict, task_id: str) -> dict:
    return next(t for t in rep["tasks"] if t["id"] == task_id)["result"]


def verdict_line(n: int, failures: list, elapsed: float):
    print(f"criterion {n}: {'PASS' if not failures else 'FAIL'} ({elapsed:.2f}s)")
    for f in failures:
        print(f"  - {f}")


def settle(n: int, failures: list, t0: float, limit: float):
    elapsed = time.perf_counter() - t0
    if elapsed >= limit:
        failures.append(f"runtime {elapsed:.1f}s exceeds {limit}s")
    verdict_line(n, failures, elapsed)
    assert not failures, "; ".join(failures)


X = [[0, 1], [1, 1]]


@pytest.mark.criterion(1, "composite of two (delta,f)-derivations on Q[x]^2 fails at m=[x;x], a=x")
def test_criterion_1_composite_witness():
    t0 = time.perf_counter()
    R, M = poly_pair()
    probe = ProbeSpec(max_degree=8)
    d1, dl1, f1 = d_example("d1_ex21", M), formal_derivative(R), named_hom("pair_identity", M)
    d2, dl2, f2 = d_example("d2_ex21", M, 1), scaled_derivative(R, 1), named_hom("pair_scaling", M, p=1, q=1)
    failures = []
    m, a = M.element([X, X]), R.element([0, 1])
    rep = check_df_derivation(map_compose(d1, d2), map_compose(dl1, dl2), map_compose(f1, f2), probe,
                              focus=[(m, a)], require_leibniz=False)
    w = rep.witnesses[0].to_dict() if rep.witnesses else {}
    lhs, rhs = ref.composite_witness([ref.X, ref.X], ref.X)
    if rep.verdict != "fail":
        failures.append(f"composite verdict {rep.verdict}")
    if w.get("inputs") != [[X, X], [0, 1]]:
        failures.append(f"composite witness inputs {w.get('inputs')}")
    if w.get("lhs") != [ref.encode_q_poly(c) for c in lhs] or w.get("lhs") != [[[2, 1], [2, 1]], [[0, 1], [2, 1]]]:
        failures.append(f"composite lhs {w.get('lhs')}")
    if w.get("rhs") != [ref.encode_q_poly(c) for c in rhs] or w.get("rhs") != [X, X]:
        failures.append(f"composite rhs {w.get('rhs')}")
    r1 = check_df_derivation(d1, dl1, f1, probe)
    if not (r1.passed and r1.strategy == "probe-complete"):
        failures.append(f"(d1, delta1, f1) verdict {r1.verdict}")
    r2 = check_df_derivation(d2, dl2, f2, probe)
    if not r2.passed:
        w2 = r2.witnesses[0].to_dict()
        failures.append(f"(d2, delta2, f2) verdict {r2.verdict}: witness {w2['inputs']} residual {w2['residual']}")
    settle(1, failures, t0, 1.0)


@pytest.mark.criterion(2, "d1 composed with gamma is not an endomorphism")
def test_criterion_2_d1_gamma_not_endomorphism():
    t0 = time.perf_counter()
    R, M = poly_pair()
    d1, g = d_example("d1_ex21", M), named_hom("gamma_mix", M)
    m, a = M.element([X, X]), R.element([0, 1])
    rep = check_endomorphism(map_compose(d1, g), focus=[(m, a)])
    failures = []
    if rep.verdict != "fail":
        failures.append(f"verdict {rep.verdict}")
    else:
        w = rep.witnesses[0].to_dict()
        if w["inputs"] != [[X, X], [0, 1]]:
            failures.append(f"witness inputs {w['inputs']}")
        # d1(gamma([x;x]·x)) = [10x; 2x], d1(gamma([x;x]))·x = [5x; x]
        if w["lhs"] != [[[0, 1], [10, 1]], [[0, 1], [2, 1]]] or w["rhs"] != [[[0, 1], [5, 1]], [[0, 1], [1, 1]]]:
            failures.append(f"witness sides {w['lhs']} / {w['rhs']}")
    settle(2, failures, t0, 1.0)


@pytest.mark.criterion(3, "images inside the component submodule; composed derivation escapes the colon ideal")
def test_criterion_3_colon_ideal_witness():
    t0 = time.perf_counter()
    rep = scenario_report("example_2_3")
    failures = []
    for tid in ("d1_into_L", "d2_into_L"):
        r = task(rep, tid)
        if not (r["verdict"] == "pass" and r["strategy"] == "probe-complete" and r["count"] > 0):
            failures.append(f"{tid}: {r['verdict']} ({r['strategy']})")
    col = task(rep, "colon_is_zero")
    if col["description"]["predicate"] != {"zero": True}:
        failures.append(f"colon ideal {col['description']}")
    r = task(rep, "delta1_delta2_into_colon")
    w = r["witnesses"][0] if r["witnesses"] else {}
    # x^2 -> 2, and (L:M) = {0}
    if r["verdict"] != "fail" or w.get("input") != [0, 0, 1] or w.get("image") != [2]:
        failures.append(f"delta1 delta2 witness {w}")
    r = task(rep, "d1_gamma_on_x0")
    if r["value"] != [[[2, 1]], []] or r["is_zero"]:
        failures.append(f"d1 gamma([x;0]) = {r['value']}")
    settle(3, failures, t0, 2.0)


@pytest.mark.criterion(4, "right multiplication is a Jordan (ad B0, -id)-derivation on M2(Q)")
def test_criterion_4_right_mult_jordan():
    t0 = time.perf_counter()
    S = make_carrier(CarrierDescriptor("M2(Q)", "Algebra", Matrix(2, RATIONALS), scalar_action=RATIONALS))
    rng = np.random.default_rng(0)
    failures = []
    for _ in range(20):
        B0 = S.element(rng.integers(-2, 3, size=(2, 2)).tolist())
        rep = check_jordan_df_derivation(named_hom("right_mult", S, B0=B0), inner_derivation(B0),
                                         named_hom("negation", S))
        if not (rep.passed and rep.strategy == "probe-complete"):
            failures.append(f"B0={B0.encode()}: {rep.verdict}")
    B0 = S.element([[0, 1], [0, 0]])
    A = S.element([[1, 0], [0, 0]])
    D, delta, f = named_hom("right_mult", S, B0=B0), inner_derivation(B0), named_hom("negation", S)
    lhs, rhs = D(A * A), D(A) * A + f(A) * delta(A)
    if not (lhs == rhs == B0):
        failures.append(f"concrete instance: {lhs.encode()} vs {rhs.encode()}")
    settle(4, failures, t0, 5.0)


@pytest.mark.criterion(5, "enumeration counts on M2(Z3): 27 derivations, 81 df and 81 Jordan maps per inner delta")
def test_criterion_5_enumeration_counts():
    t0 = time.perf_counter()
    S = m2z3()
    failures = []
    der = enumerate_additive_maps(EnumerationSpec(S, S, [Constraint("derivation")]))
    if der.count != ref.count_derivations(3) or der.count != 27:
        failures.append(f"derivations {der.count}")
    ident = named_hom("identity", S)
    for delta in inner_derivations(S):
        closed = enumerate_df_derivations(delta, ident, S)
        raw = enumerate_df_derivations(delta, ident, S, closed_form=False)
        jor = enumerate_jordan_df_derivations(delta, ident, S, S)
        if not (closed.count == raw.count == jor.count == 81):
            failures.append(f"{delta.name}: closed {closed.count} raw {raw.count} jordan {jor.count}")
        elif sorted(map(tuple, closed.tables)) != sorted(map(tuple, raw.tables)):
            failures.append(f"{delta.name}: closed-form and raw enumerations differ")
    for B in [(0, 1, 0, 0), (1, 2, 0, 1)]:
        if ref.count_df(ref.inner(B, 3), 1, 3) != 81 or ref.count_jordan(ref.inner(B, 3), 1, 3) != 81:
            failures.append(f"reference disagrees at B={B}")
    settle(5, failures, t0, 300.0)


@pytest.mark.criterion(6, "composition oracle and ring oracle on M2(Z3), exhaustive and sampled")
def test_criterion_6_posner_oracles():
    t0 = time.perf_counter()
    rep = scenario_report("posner_m2z3")
    failures = []
    for tid in ("composition_exhaustive", "ring_exhaustive", "composition_sampled", "ring_sampled"):
        r = task(rep, tid)
        if r["verdict"] != "pass" or r["counterexample_count"]:
            ce = r["counterexamples"][0] if r["counterexamples"] else None
            failures.append(f"{tid}: {r['counterexample_count']} counterexamples of "
                            f"{r['tallies'].get('antecedent_true', r['tallies'].get('P_true'))} antecedent-true pairs;"
                            f" first {ce}")
    if task(rep, "composition_sampled")["quantifier_sizes"]["pairs_evaluated"] != 100_000:
        failures.append("sampled run did not evaluate 10^5 pairs")
    settle(6, failures, t0, 600.0)


@pytest.mark.criterion(7, "submodule-composition oracle on upper-triangular 2x2 over Z3")
def test_criterion_7_creedon():
    t0 = time.perf_counter()
    rep = scenario_report("creedon_t2z3")
    r = task(rep, "creedon")
    failures = []
    bad_h = [h for h in r["hypotheses"] if h["verdict"] != "holds"]
    if bad_h:
        failures.append(f"hypotheses not validated: {bad_h}")
    if r["verdict"] != "pass" or r["counterexample_count"]:
        failures.append(f"{r['counterexample_count']} counterexamples")
    if r["tallies"]["antecedent_true"] == 0:
        failures.append("vacuous: no pair satisfies the antecedent")
    settle(7, failures, t0, 300.0)


@pytest.mark.criterion(8, "every Jordan (delta,f)-derivation of M2(Z3) is a (delta,f)-derivation")
def test_criterion_8_jordan_oracle():
    t0 = time.perf_counter()
    r = task(scenario_report("jordan_m2z3"), "jordan_implies_derivation")
    failures = []
    if r["verdict"] != "pass" or r["counterexample_count"]:
        failures.append(f"{r['counterexample_count']} violations")
    if r["tallies"]["pairs"] != 81 or r["tallies"]["pairs_with_equal_classes"] != 81:
        failures.append(f"tallies {r['tallies']}")
    uneq = [p for p in r["details"]["per_pair"] if p["jordan_count"] != p["df_count"]]
    if uneq:
        failures.append(f"unequal class counts: {uneq[:3]}")
    settle(8, failures, t0, 900.0)


LEMMA_IDS = ["L31", "L32", "L33", "L34", "L35", "L36a", "L36b", "L37", "L38", "L39", "L3310", "L3311", "L3312",
             "L3313", "L314"]


@pytest.mark.criterion(9, "lemma residuals vanish on M2(Z3) (exhaustive) and M2(Q) (probe); colon ideals prime")
def test_criterion_9_lemma_suite():
    t0 = time.perf_counter()
    failures = []
    for name in ("lemma_suite_m2z3", "lemma_suite_m2q"):
        r = task(scenario_report(name), "lemmas")
        tallies = r["tallies"]
        finite = name.endswith("m2z3")
        ids = [i for i in LEMMA_IDS if i in tallies] + ["T331_additivity", "T331_antisymmetry"]
        missing = [i for i in LEMMA_IDS[:10] + ["L314"] if i not in tallies]
        if missing:
            failures.append(f"{name}: lemmas not evaluated {missing}")
        for lid in ids:
            t = tallies.get(lid, {"pass": 0, "fail": 0})
            if t["fail"] or not t["pass"]:
                failures.append(f"{name}: {lid} {t}")
        if finite:
            ip = tallies.get("colon_ideal_prime", {"pass": 0, "fail": 0})
            if ip["fail"] or not ip["pass"]:
                failures.append(f"{name}: colon_ideal_prime {ip}")
    settle(9, failures, t0, 600.0)


@pytest.mark.criterion(10, "negative controls: 2-torsion in M2(Z2) refuses every oracle; refuted declaration")
def test_criterion_10_negative_controls():
    t0 = time.perf_counter()
    failures = []
    S2 = matrix_algebra(2)
    fact = is_two_torsion_free(S2)
    if fact.holds or not fact.witness:
        failures.append(f"two_torsion_free(M2(Z2)) = {fact.verdict}")
    runs = {
        "posner_composition": lambda: posner_composition_oracle(posner_instance(S2)),
        "posner_ring": lambda: posner_ring_oracle(posner_instance(S2)),
        "jordan": lambda: jordan_implies_derivation_oracle(jordan_instance(S2)),
    }
    for name, fn in runs.items():
        try:
            fn()
            failures.append(f"{name} ran on M2(Z2)")
        except HypothesisFailed:
            pass
    try:
        make_carrier(CarrierDescriptor("Z4", "Ring", Modular(4), declared_facts={"two_torsion_free": "declared"}))
        failures.append("Modular(4) declared two_torsion_free was accepted")
    except DeclaredFactRefuted:
        pass
    elapsed = time.perf_counter() - t0
    rep = scenario_report("m2z2_negative")
    statuses = {t["id"]: t["status"] for t in rep["tasks"]}
    oracle_ids = [k for k in statuses if k != "two_torsion"]
    if any(statuses[k] != "hypothesis_failed" for k in oracle_ids) or rep["summary"]["exit_code"] != 3:
        failures.append(f"scenario statuses {statuses}, exit {rep['summary']['exit_code']}")
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s exceeds 1s")
    verdict_line(10, failures, elapsed)
    assert not failures, "; ".join(failures)


@pytest.mark.criterion(11, "reports identical across worker-partition counts (timing excluded)")
def test_criterion_11_determinism():
    t0 = time.perf_counter()
    failures = []
    for name in DETERMINISM_SCENARIOS:
        a = dumps(strip_timing(scenario_report(name, 1)))
        b = dumps(strip_timing(scenario_report(name, 3)))
        if a != b:
            failures.append(f"{name}: reports differ")
    elapsed = time.perf_counter() - t0
    verdict_line(11, failures, elapsed)
    assert not failures, "; ".join(failures)
