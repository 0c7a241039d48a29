"""Theorem-level verifiers: exhaustive (or seeded-sampled) counterexample
searches over finite families of (δ, f, d) triples, and the lemma-suite
runner.

All quantifier spaces are evaluated with numpy index tables. Laws whose
residual is biadditive in their two inputs (every law here, given additive
maps) are screened on pairs of additive generators, which decides them
exactly; surviving pairs are then re-verified on the full input grid.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .carriers import Carrier, Element, Substructure, quotient_module, zero_substructure
from .checks import check_df_derivation, check_jordan_df_derivation
from .enumeration import (
    Constraint,
    EnumerationSpec,
    enumerate_additive_maps,
    enumerate_df_derivations,
    enumerate_jordan_df_derivations,
)
from .errors import ClosureFailure, HypothesisFailed
from .jordan import BracketContext, LEMMAS, check_jordan_action_law, lemma_reports
from .maps import AdditiveMap, inner_derivation, map_compose, named_hom, table_map
from .probe import DEFAULT_PROBE, ProbeSpec
from .structure import (
    P_set,
    StructuralFact,
    T_set,
    center,
    colon_ideal,
    is_jointly_prime,
    is_prime_algebra,
    is_prime_ideal,
    is_prime_module,
    is_prime_ring,
    is_prime_submodule,
    is_two_torsion_free,
    substructure_lattice,
)

MAX_COUNTEREXAMPLES = 20


# ---------------------------------------------------------------------------
# families


def _dedupe(maps: list[AdditiveMap]) -> list[AdditiveMap]:
    seen: dict[bytes, AdditiveMap] = {}
    for m in maps:
        seen.setdefault(m.table().tobytes(), m)
    return list(seen.values())


def inner_derivations(R: Carrier) -> list[AdditiveMap]:
    """ad(B) for every B, deduplicated (first B in element order kept)."""
    return _dedupe([inner_derivation(B) for B in R.elements()])


def all_derivations(R: Carrier, partitions: int = 1) -> list[AdditiveMap]:
    res = enumerate_additive_maps(EnumerationSpec(R, R, [Constraint("derivation")], name="δ",
                                                  parallel_partitions=partitions))
    return list(res.maps())


def central_scalings(S: Carrier, M: Carrier | None = None) -> list[AdditiveMap]:
    return [named_hom("central_scale", S, M or S, c=c) for c in center(S)]


def units(R: Carrier) -> list[Element]:
    T = R.tables
    inv = ((T.mul == T.one).any(axis=1)) & ((T.mul == T.one).any(axis=0))
    return [Element(R, T.payloads[i]) for i in np.flatnonzero(inv)]


def invertible_left_mults(R: Carrier) -> list[AdditiveMap]:
    """Left multiplications by units: the epimorphisms of R as a right module over itself."""
    return [named_hom("left_mult", R, c=u) for u in units(R)]


def is_epimorphism(f: AdditiveMap) -> bool:
    return np.unique(f.table()).size == f.target.tables.size


@dataclass
class DfFamily:
    """All (δ, f, d) with δ from ``deltas``, f from ``fs`` and d ranging over
    every (δ,f)-derivation of M; d's are stored as index tables."""

    M: Carrier
    deltas: list
    fs: list
    tables: np.ndarray  # (T, |M|)
    delta_of: np.ndarray
    f_of: np.ndarray
    block_pos: np.ndarray  # position of d within its (δ, f) block

    @property
    def R(self) -> Carrier:
        return self.M.ring

    @property
    def size(self) -> int:
        return int(self.tables.shape[0])

    @property
    def delta_tables(self) -> np.ndarray:
        return np.stack([d.table() for d in self.deltas])

    @property
    def f_tables(self) -> np.ndarray:
        return np.stack([f.table() for f in self.fs])

    def triple(self, i: int) -> tuple[AdditiveMap, AdditiveMap, AdditiveMap]:
        delta, f = self.deltas[self.delta_of[i]], self.fs[self.f_of[i]]
        d = table_map(self.M, self.M, self.tables[i], name=f"d[{delta.name},{f.name},{self.block_pos[i]}]")
        return delta, f, d

    def describe(self, i: int) -> dict:
        M = self.M
        d = self.tables[i]
        g = M.tables.index[_generator_payload(M)]
        return {"index": int(i), "delta": self.deltas[self.delta_of[i]].name, "f": self.fs[self.f_of[i]].name,
                "d_block_position": int(self.block_pos[i]), "d_at_generator": M.encode(M.tables.payloads[d[g]])}

    def zero_mask(self) -> np.ndarray:
        return (self.tables == self.M.tables.zero).all(axis=1)

    def endomorphism_mask(self) -> np.ndarray:
        """d(xa) = d(x)a for all x, a (screened on generators, then confirmed)."""
        T = self.M.tables
        gx, ga = _gen_pairs(self.M, self.R)
        ok = (self.tables[:, T.act[gx, ga]] == T.act[self.tables[:, gx], ga[None, :]]).all(axis=1)
        xs, as_ = _all_pairs(self.M, self.R)
        for k in np.flatnonzero(ok):
            d = self.tables[k]
            ok[k] = bool((d[T.act[xs, as_]] == T.act[d[xs], as_]).all())
        return ok


def _generator_payload(M: Carrier):
    if M.is_ring:
        return M.one
    from .enumeration import cyclic_generator

    g = cyclic_generator(M)
    return M.tables.payloads[g if g is not None else M.tables.zero]


def build_df_family(M: Carrier, deltas: list, fs: list, partitions: int = 1) -> DfFamily:
    tabs, dof, fof, pos = [], [], [], []
    for i, delta in enumerate(deltas):
        for j, f in enumerate(fs):
            res = enumerate_df_derivations(delta, f, M, partitions=partitions)
            tabs.append(res.tables)
            dof.append(np.full(res.count, i))
            fof.append(np.full(res.count, j))
            pos.append(np.arange(res.count))
    cat = lambda xs: np.concatenate(xs).astype(np.intp) if xs else np.empty(0, dtype=np.intp)  # noqa: E731
    tables = np.concatenate(tabs) if tabs else np.empty((0, M.tables.size), dtype=np.intp)
    return DfFamily(M, deltas, fs, tables, cat(dof), cat(fof), cat(pos))


def _gen_pairs(M: Carrier, R: Carrier):
    TM, TR = M.tables, R.tables
    gm = np.array([TM.index[p] for p, _ in M.generators()], dtype=np.intp)
    gr = np.array([TR.index[p] for p, _ in R.generators()], dtype=np.intp)
    x, a = np.meshgrid(gm, gr, indexing="ij")
    return x.ravel(), a.ravel()


def _all_pairs(M: Carrier, R: Carrier):
    x, a = np.meshgrid(np.arange(M.tables.size), np.arange(R.tables.size), indexing="ij")
    return x.ravel(), a.ravel()


# ---------------------------------------------------------------------------
# instances and reports


HYPOTHESES = {
    "prime_ring": lambda inst: is_prime_ring(inst.R),
    "prime_module": lambda inst: is_prime_module(inst.M),
    "two_torsion_free": lambda inst: is_two_torsion_free(inst.M),
    "jointly_prime": lambda inst: is_jointly_prime(inst.M),
    "prime_algebra": lambda inst: is_prime_algebra(inst.R),
    "prime_submodule": lambda inst: is_prime_submodule(inst.L, inst.M),
    "quotient_two_torsion_free": lambda inst: _quotient_torsion(inst),
}


def _quotient_torsion(inst) -> StructuralFact:
    Q = quotient_module(inst.M, inst.L, id=f"{inst.M.label}/{inst.L.name or 'L'}")
    f = is_two_torsion_free(Q)
    return StructuralFact(Q.label, "two_torsion_free", f.verdict, f.witness, f.note)


@dataclass
class OracleInstance:
    name: str
    R: Carrier
    M: Carrier
    L: Substructure | None = None
    deltas: list = field(default_factory=list)
    fs: list = field(default_factory=list)
    hypothesis_checks: tuple = ()
    mode: str = "exhaustive"  # exhaustive | sampled
    samples: int = 100_000
    seed: int = 0
    partitions: int = 1
    _family: DfFamily | None = field(default=None, repr=False)

    def family(self) -> DfFamily:
        if self._family is None:
            self._family = build_df_family(self.M, self.deltas, self.fs, self.partitions)
        return self._family


def verify_hypotheses(inst, names=None) -> list[StructuralFact]:
    """Evaluate the instance's structural hypotheses; raise HypothesisFailed
    (with the witnessing facts) if any does not hold."""
    facts = [HYPOTHESES[n](inst) for n in (inst.hypothesis_checks if names is None else names)]
    bad = [f for f in facts if not f.holds]
    if bad:
        msg = "; ".join(f"{f.predicate}({f.subject}) {f.verdict}" + (f" witness {f.witness_str()}" if f.witness else "")
                        for f in bad)
        raise HypothesisFailed(f"instance {inst.name}: {msg}", facts=facts)
    return facts


def _require_epimorphisms(inst):
    for f in inst.fs:
        if not is_epimorphism(f):
            raise HypothesisFailed(f"instance {inst.name}: {f.name} is not surjective",
                                   facts=[StructuralFact(f.name, "epimorphism", "fails")])


@dataclass
class OracleReport:
    oracle: str
    instance: str
    verdict: str
    quantifier_sizes: dict
    counterexamples: list
    counterexample_count: int
    tallies: dict
    hypotheses: list = field(default_factory=list)
    elapsed_s: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "oracle": self.oracle,
            "instance": self.instance,
            "verdict": self.verdict,
            "quantifier_sizes": self.quantifier_sizes,
            "counterexample_count": self.counterexample_count,
            "counterexamples": self.counterexamples,
            "tallies": self.tallies,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "details": self.details,
            "elapsed_s": self.elapsed_s,
        }


def _partitioned(fn, chunks: list, partitions: int) -> list:
    """Run ``fn`` over ``chunks`` (in order), optionally on worker threads."""
    if partitions <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=partitions) as ex:
        return list(ex.map(fn, chunks))


def _merge_tallies(parts: list[dict]) -> dict:
    out: dict = {}
    for p in parts:
        for k, v in p.items():
            out[k] = out.get(k, 0) + v
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# composition of (δ,f)-derivations


class _PairEvaluator:
    """Vectorized evaluation of composites d1 d2 over batches of family pairs."""

    def __init__(self, fam: DfFamily):
        self.fam = fam
        self.TM, self.TR = fam.M.tables, fam.R.tables
        self.dt, self.ft = fam.delta_tables, fam.f_tables
        self.gx, self.ga = _gen_pairs(fam.M, fam.R)
        self.ax, self.aa = _all_pairs(fam.M, fam.R)
        self.zero = fam.zero_mask()
        self.endo = fam.endomorphism_mask()

    def composites(self, i1, i2):
        f = self.fam
        D12 = np.take_along_axis(f.tables[i1], f.tables[i2], axis=1)
        F12 = np.take_along_axis(self.ft[f.f_of[i1]], self.ft[f.f_of[i2]], axis=1)
        E12 = np.take_along_axis(self.dt[f.delta_of[i1]], self.dt[f.delta_of[i2]], axis=1)
        return D12, F12, E12

    def law_ok(self, D12, F12, E12, xs, as_):
        T = self.TM
        rows = np.arange(D12.shape[0])[:, None]
        lhs = D12[:, T.act[xs, as_]]
        rhs = T.add[T.act[D12[:, xs], as_[None, :]], T.act[F12[:, xs], E12[rows, as_[None, :]]]]
        return lhs == rhs

    def P(self, i1, i2):
        """d1 d2 is a (δ1δ2, f1f2)-derivation, and a generator-pair witness when not."""
        D12, F12, E12 = self.composites(i1, i2)
        good = self.law_ok(D12, F12, E12, self.gx, self.ga)
        P = good.all(axis=1)
        for s in range(0, int(P.sum()), 256):  # confirm survivors on the full grid
            idx = np.flatnonzero(P)[s:s + 256]
            full = self.law_ok(D12[idx], F12[idx], E12[idx], self.ax, self.aa).all(axis=1)
            P[idx] = full
        return P, good, (D12, F12, E12)

    def witness(self, i1, i2) -> dict:
        D12, F12, E12 = self.composites(np.array([i1]), np.array([i2]))
        ok = self.law_ok(D12, F12, E12, self.ax, self.aa)[0]
        k = int(np.flatnonzero(~ok)[0])
        x, a = int(self.ax[k]), int(self.aa[k])
        T, M, R = self.TM, self.fam.M, self.fam.R
        lhs = D12[0, T.act[x, a]]
        rhs = T.add[T.act[D12[0, x], a], T.act[F12[0, x], E12[0, a]]]
        show = lambda C, i: C.show(C.tables.payloads[int(i)])  # noqa: E731
        return {"x": show(M, x), "a": show(R, a), "lhs": show(M, lhs), "rhs": show(M, rhs)}


def _pair_desc(fam: DfFamily, i1: int, i2: int) -> dict:
    return {"first": fam.describe(i1), "second": fam.describe(i2)}


def _posner_chunk(ev: _PairEvaluator, i1: np.ndarray, i2: np.ndarray) -> dict:
    P, _, _ = ev.P(i1, i2)
    z1, z2 = ev.zero[i1], ev.zero[i2]
    both = ev.endo[i1] & ev.endo[i2] & ~z1 & ~z2
    Q = z1 | z2 | both
    branch = np.where(z1, "d1_zero", np.where(z2, "d2_zero", np.where(both, "both_endomorphisms", "none")))
    tallies = {"P_true": int(P.sum()), "P_false": int((~P).sum())}
    for b in ("d1_zero", "d2_zero", "both_endomorphisms", "none"):
        tallies[f"branch_{b}"] = int((branch == b).sum())
    tallies["P_true_branch_none"] = int((P & (branch == "none")).sum())
    bic = np.flatnonzero(P != Q)
    ring_bad = np.flatnonzero(P & ~z1 & ~z2)
    return {"tallies": tallies, "bicond": [(int(i1[k]), int(i2[k]), bool(P[k])) for k in bic],
            "ring": [(int(i1[k]), int(i2[k])) for k in ring_bad]}


def _run_posner(inst: OracleInstance):
    t0 = time.perf_counter()
    facts = verify_hypotheses(inst)
    _require_epimorphisms(inst)
    fam = inst.family()
    ev = _PairEvaluator(fam)
    n = fam.size
    if inst.mode == "exhaustive":
        def work(t2s):
            return [_posner_chunk(ev, np.arange(n), np.full(n, t2)) for t2 in t2s]

        groups = [list(g) for g in np.array_split(np.arange(n), max(1, inst.partitions)) if len(g)]
        res = [r for grp in _partitioned(work, groups, inst.partitions) for r in grp]
        pairs = n * n
    else:
        rng = np.random.default_rng(inst.seed)
        draws = rng.integers(0, n, size=(inst.samples, 2))
        batches = [draws[s:s + 5000] for s in range(0, inst.samples, 5000)]
        res = _partitioned(lambda b: _posner_chunk(ev, b[:, 0], b[:, 1]), batches, inst.partitions)
        pairs = inst.samples
    tallies = _merge_tallies([r["tallies"] for r in res])
    bicond = sorted(c for r in res for c in r["bicond"])
    ring = sorted(c for r in res for c in r["ring"])
    sizes = {"triples": n, "deltas": len(fam.deltas), "fs": len(fam.fs), "pairs_evaluated": pairs,
             "mode": inst.mode}
    if inst.mode != "exhaustive":
        sizes["seed"] = inst.seed
    elapsed = time.perf_counter() - t0
    return fam, ev, facts, tallies, bicond, ring, sizes, elapsed


def _posner_reports(inst: OracleInstance) -> tuple[OracleReport, OracleReport]:
    cache = inst.__dict__.setdefault("_posner_cache", {})
    if "reports" in cache:
        return cache["reports"]
    fam, ev, facts, tallies, bicond, ring, sizes, elapsed = _run_posner(inst)

    def ce_bicond(c):
        i1, i2, P = c
        d = _pair_desc(fam, i1, i2)
        d.update({"P": P, "Q": not P})
        if not P:
            d["witness"] = ev.witness(i1, i2)
        return d

    comp = OracleReport("posner_composition", inst.name, "fail" if bicond else "pass", sizes,
                        [ce_bicond(c) for c in bicond[:MAX_COUNTEREXAMPLES]], len(bicond),
                        {k: v for k, v in tallies.items()}, facts, elapsed)
    ant = tallies["P_true"]
    rt = {"antecedent_true": ant, "antecedent_false_skipped": tallies["P_false"],
          "consequent_true": ant - len(ring), "counterexamples": len(ring)}
    ring_rep = OracleReport("posner_ring", inst.name, "fail" if ring else "pass", sizes,
                            [_pair_desc(fam, *c) for c in ring[:MAX_COUNTEREXAMPLES]], len(ring), rt, facts,
                            elapsed)
    cache["reports"] = (comp, ring_rep)
    return comp, ring_rep


def posner_composition_oracle(inst: OracleInstance) -> OracleReport:
    """For every ordered pair of triples: P (d1d2 is a (δ1δ2, f1f2)-derivation)
    against Q (d1 = 0, d2 = 0, or both nonzero endomorphisms)."""
    return _posner_reports(inst)[0]


def posner_ring_oracle(inst: OracleInstance) -> OracleReport:
    """For every pair with d1d2 a (δ1δ2, f1f2)-derivation: d1 = 0 or d2 = 0."""
    return _posner_reports(inst)[1]


def recheck_composition(fam: DfFamily, i1: int, i2: int, probe: ProbeSpec = DEFAULT_PROBE) -> dict:
    """Re-evaluate one pair through the generic map-level checks."""
    dl1, f1, d1 = fam.triple(i1)
    dl2, f2, d2 = fam.triple(i2)
    rep = check_df_derivation(map_compose(d1, d2), map_compose(dl1, dl2), map_compose(f1, f2), probe,
                              require_leibniz=False)
    return {"P": rep.passed, "d1_zero": bool((d1.table() == fam.M.tables.zero).all()),
            "d2_zero": bool((d2.table() == fam.M.tables.zero).all()), "report": rep}


# ---------------------------------------------------------------------------
# composition into a prime submodule


def creedon_oracle(inst: OracleInstance) -> OracleReport:
    """For pairs with d1d2(M) ⊆ L and δ1δ2(R) ⊆ (L:M): d1(M) ⊆ L, d2(M) ⊆ L, or
    both escape L while δ1(R), δ2(R) ⊆ (L:M)."""
    t0 = time.perf_counter()
    if inst.L is None:
        raise HypothesisFailed(f"instance {inst.name} has no submodule L")
    facts = verify_hypotheses(inst)
    _require_epimorphisms(inst)
    fam = inst.family()
    L = inst.L
    col = colon_ideal(L, inst.M)
    Lm, Cm = L.mask, col.mask
    d_in = Lm[fam.tables].all(axis=1)
    dt = fam.delta_tables
    delta_in = Cm[dt].all(axis=1)[fam.delta_of]
    n = fam.size

    def work(t2s):
        out = []
        for t2 in t2s:
            D12 = fam.tables[:, fam.tables[t2]]
            E12 = dt[fam.delta_of][:, dt[fam.delta_of[t2]]]
            ant = Lm[D12].all(axis=1) & Cm[E12].all(axis=1)
            b1 = d_in
            b2 = np.full(n, bool(d_in[t2]))
            b3 = ~d_in & ~d_in[t2] & delta_in & bool(delta_in[t2])
            first = np.where(b1, "d1_in_L", np.where(b2, "d2_in_L", np.where(b3, "both_out_deltas_in_colon", "none")))
            t = {"antecedent_true": int(ant.sum()), "antecedent_false_skipped": int((~ant).sum())}
            for b in ("d1_in_L", "d2_in_L", "both_out_deltas_in_colon", "none"):
                t[f"branch_{b}"] = int((ant & (first == b)).sum())
            bad = np.flatnonzero(ant & (first == "none"))
            out.append((t, [(int(k), int(t2)) for k in bad]))
        return out

    groups = [list(g) for g in np.array_split(np.arange(n), max(1, inst.partitions)) if len(g)]
    res = [r for grp in _partitioned(work, groups, inst.partitions) for r in grp]
    tallies = _merge_tallies([r[0] for r in res])
    bad = sorted(c for r in res for c in r[1])
    sizes = {"triples": n, "deltas": len(fam.deltas), "fs": len(fam.fs), "pairs_evaluated": n * n,
             "mode": "exhaustive"}
    details = {"L": L.describe(), "colon_ideal_size": col.size}
    return OracleReport("creedon", inst.name, "fail" if bad else "pass", sizes,
                        [_pair_desc(fam, *c) for c in bad[:MAX_COUNTEREXAMPLES]], len(bad), tallies, facts,
                        time.perf_counter() - t0, details)


# ---------------------------------------------------------------------------
# Jordan (δ,f)-derivations are (δ,f)-derivations


def jordan_implies_derivation_oracle(inst: OracleInstance, probe: ProbeSpec = DEFAULT_PROBE) -> OracleReport:
    """For every (δ, f): enumerate Jordan (δ,f)-derivations by pruned search
    and (δ,f)-derivations independently; every Jordan map must satisfy the
    (δ,f)-law on all pairs and the two classes must coincide."""
    t0 = time.perf_counter()
    facts = verify_hypotheses(inst)
    S, M = inst.R, inst.M
    TS, TM = S.tables, M.tables
    xs, as_ = _all_pairs(S, S)
    rows, bad, total_j = [], [], 0

    def work(pairs):
        out = []
        for i, j in pairs:
            delta, f = inst.deltas[i], inst.fs[j]
            jr = enumerate_jordan_df_derivations(delta, f, S, M)
            dr = enumerate_df_derivations(delta, f, M) if M is S else None
            const = TM.act[f.table()[xs], delta.table()[as_]]
            J = jr.tables
            law = (J[:, TS.mul[xs, as_]] == TM.add[TM.act[J[:, xs], as_[None, :]], const[None, :]]).all(axis=1)
            same = dr is not None and jr.count == dr.count and all(dr.contains(t) for t in J)
            out.append(({"delta": delta.name, "f": f.name, "jordan_count": jr.count,
                         "df_count": dr.count if dr is not None else None, "classes_equal": bool(same),
                         "jordan_examined": jr.examined},
                        [int(k) for k in np.flatnonzero(~law)], J))
        return out

    pairs = [(i, j) for i in range(len(inst.deltas)) for j in range(len(inst.fs))]
    groups = [[tuple(int(v) for v in p) for p in g]
              for g in np.array_split(np.array(pairs), max(1, inst.partitions)) if len(g)]
    res = [r for grp in _partitioned(work, groups, inst.partitions) for r in grp]
    tables = {}
    for (i, j), (row, viol, J) in zip(pairs, res):
        rows.append(row)
        total_j += row["jordan_count"]
        tables[(i, j)] = J
        for k in viol:
            bad.append({"delta": row["delta"], "f": row["f"], "jordan_index": k})
        if not row["classes_equal"]:
            bad.append({"delta": row["delta"], "f": row["f"], "class_mismatch": [row["jordan_count"], row["df_count"]]})
    tallies = {"pairs": len(pairs), "jordan_maps": total_j,
               "pairs_with_equal_classes": sum(r["classes_equal"] for r in rows)}
    sizes = {"deltas": len(inst.deltas), "fs": len(inst.fs), "jordan_maps_checked": total_j,
             "inputs_per_map": int(xs.size)}
    rep = OracleReport("jordan_implies_derivation", inst.name, "fail" if bad else "pass", sizes,
                       bad[:MAX_COUNTEREXAMPLES], len(bad), tallies, facts, time.perf_counter() - t0,
                       {"per_pair": rows})
    rep.jordan_tables = tables
    return rep


# ---------------------------------------------------------------------------
# lemma suite


@dataclass
class LemmaSuiteInstance:
    name: str
    S: Carrier
    M: Carrier
    contexts: list  # BracketContext
    probe: ProbeSpec = DEFAULT_PROBE
    hypothesis_checks: tuple = ("two_torsion_free", "jointly_prime", "prime_algebra")
    colon_prime_carriers: list = field(default_factory=list)
    corollary_family: OracleInstance | None = None  # (δ, f, d) triples on a prime module
    ideal_composition_cases: list = field(default_factory=list)  # (name, OracleInstance with L as ideal P)
    unconditional_probe: list = field(default_factory=list)  # contexts for hypothesis-free L32 probes

    @property
    def R(self):
        return self.S

    @property
    def L(self):
        return None


def _entry(id_, subject, kind, verdict, *, count=0, failures=0, witness=None, strategy="", reason="",
           asserted=True) -> dict:
    e = {"id": id_, "subject": subject, "kind": kind, "verdict": verdict, "asserted": asserted, "count": count,
         "failures": failures, "strategy": strategy}
    if witness is not None:
        e["witness"] = witness
    if reason:
        e["reason"] = reason
    return e


def _report_entry(rep, id_, subject, asserted=True) -> dict:
    w = rep.witnesses[0].to_dict() if rep.witnesses else None
    return _entry(id_, subject, "residual", rep.verdict, count=rep.count, failures=rep.failures, witness=w,
                  strategy=rep.strategy, asserted=asserted)


def _ctx_entries(ctx: BracketContext, probe: ProbeSpec) -> list[dict]:
    out = []
    ctx.validate(probe)
    jordan = check_jordan_df_derivation(ctx.D, ctx.delta, ctx.f, probe).passed
    action = check_jordan_action_law(ctx, probe).passed
    for lem in LEMMAS.values():
        if lem.context_hypothesis == "jordan_action_law":
            need, have = "Jordan-action law", action
        elif lem.id == "T331_additivity":
            need, have = "", True
        else:
            need, have = "Jordan (δ,f)-law", jordan
        if not have:
            out.append(_entry(lem.id, ctx.name, "residual", "skipped", reason=f"context lacks the {need}"))
            continue
        reps = lemma_reports(ctx, lem.id, probe)
        for part, rep in zip(lem.parts, reps):
            if len(lem.parts) == 1:
                out.append(_report_entry(rep, lem.id, ctx.name))
            else:
                # statement and proof forms differ; the proof form is asserted
                out.append(_report_entry(rep, f"{lem.id}:{part}", ctx.name, asserted=part == "proof_form"))
    if jordan:
        rep = check_df_derivation(ctx.D, ctx.delta, ctx.f, probe, require_leibniz=True)
        out.append(_entry("jordan_is_df", ctx.name, "implication", rep.verdict, count=rep.count,
                          failures=rep.failures, strategy=rep.strategy,
                          witness=rep.witnesses[0].to_dict() if rep.witnesses else None))
    else:
        out.append(_entry("jordan_is_df", ctx.name, "implication", "skipped", reason="context lacks the Jordan (δ,f)-law"))
    if ctx.S.finite and jordan:
        out.extend(_p_set_entries(ctx))
    return out


def _p_set_entries(ctx: BracketContext) -> list[dict]:
    """s² = 0 ⇒ s ∈ P; u ∈ P outside the center and vu = uv ⇒ v ∈ P."""
    S = ctx.S
    T = S.tables
    P = np.zeros(T.size, dtype=bool)
    for p in P_set(ctx.D, ctx.delta, ctx.f):
        P[T.index[p.payload]] = True
    nil = np.flatnonzero(T.mul[np.arange(T.size), np.arange(T.size)] == T.zero)
    bad13 = nil[~P[nil]]
    Z = (T.mul == T.mul.T).all(axis=1)
    comm = T.mul == T.mul.T  # comm[u, v]: uv = vu
    ant = (P & ~Z)[:, None] & comm
    bad12 = np.argwhere(ant & ~P[None, :])
    show = lambda i: S.show(T.payloads[int(i)])  # noqa: E731
    return [
        _entry("L3313", ctx.name, "implication", "fail" if bad13.size else "pass", count=int(nil.size),
               failures=int(bad13.size), strategy="exhaustive",
               witness={"s": show(bad13[0])} if bad13.size else None),
        _entry("L3312", ctx.name, "implication", "fail" if bad12.size else "pass", count=int(ant.sum()),
               failures=int(len(bad12)), strategy="exhaustive",
               witness={"u": show(bad12[0][0]), "v": show(bad12[0][1])} if len(bad12) else None),
    ]


def _t_set_entries(S: Carrier, M: Carrier) -> list[dict]:
    """T(x) is a sub-bimodule for every x, and vanishes off the center."""
    T = S.tables
    Z = set(p.payload for p in center(S))
    closure_fail, nonzero = [], []
    for x in S.elements():
        try:
            t = T_set(x, M)
        except ClosureFailure:
            closure_fail.append(str(x))
            continue
        if x.payload not in Z and not t.is_zero():
            nonzero.append(str(x))
    return [
        _entry("L3310", S.label, "property", "fail" if closure_fail else "pass", count=T.size,
               failures=len(closure_fail), strategy="exhaustive",
               witness={"x": closure_fail[0]} if closure_fail else None),
        _entry("L3311", S.label, "implication", "fail" if nonzero else "pass", count=T.size - len(Z),
               failures=len(nonzero), strategy="exhaustive", witness={"x": nonzero[0]} if nonzero else None),
    ]


def _colon_prime_entries(carriers: list) -> list[dict]:
    """Every prime submodule L has a prime colon ideal (L:M)."""
    out = []
    for M in carriers:
        subs = substructure_lattice(M, "submodule")
        prime, bad = 0, []
        for L in subs:
            if L.is_whole() or not is_prime_submodule(L, M).holds:
                continue
            prime += 1
            if not is_prime_ideal(colon_ideal(L, M)).holds:
                bad.append([M.encode(p) for p in L.payloads()][:4])
        out.append(_entry("colon_ideal_prime", M.label, "implication", "fail" if bad else "pass", count=prime,
                          failures=len(bad), strategy="exhaustive",
                          witness={"L_members": bad[0]} if bad else None))
    return out


def _corollary_entries(inst: OracleInstance) -> list[dict]:
    """d γ ∈ End(M) iff d = 0, γ = 0 or d ∈ End(M); and d γ = 0 forces d = 0,
    γ = 0 or d ∈ End(M). γ ranges over all module endomorphisms."""
    fam = inst.family()
    M, R = fam.M, fam.R
    TM = M.tables
    gammas = enumerate_additive_maps(EnumerationSpec(M, M, [Constraint("module_hom")], name="γ")).tables
    gz = (gammas == TM.zero).all(axis=1)
    dz = fam.zero_mask()
    de = fam.endomorphism_mask()
    xs, as_ = _all_pairs(M, R)
    c1 = c2 = 0
    bad1, bad2 = [], []
    ant2 = 0
    for gi, g in enumerate(gammas):
        DG = fam.tables[:, g]  # (T, |M|): d∘γ
        endo = (DG[:, TM.act[xs, as_]] == TM.act[DG[:, xs], as_[None, :]]).all(axis=1)
        rhs = dz | gz[gi] | (~dz & ~gz[gi] & de)
        c1 += DG.shape[0]
        for k in np.flatnonzero(endo != rhs):
            bad1.append((int(k), gi))
        kill = (DG == TM.zero).all(axis=1)
        ant2 += int(kill.sum())
        for k in np.flatnonzero(kill & ~rhs):
            bad2.append((int(k), gi))
        c2 += DG.shape[0]
    w = lambda b: {"d": fam.describe(b[0][0]), "gamma_index": b[0][1]} if b else None  # noqa: E731
    return [
        _entry("d_gamma_endomorphism", inst.name, "implication", "fail" if bad1 else "pass", count=c1, failures=len(bad1),
               strategy="exhaustive", witness=w(bad1)),
        _entry("d_gamma_zero", inst.name, "implication", "fail" if bad2 else "pass", count=ant2,
               failures=len(bad2), strategy="exhaustive", witness=w(bad2)),
    ]


def ideal_composition_scan(inst: OracleInstance) -> dict:
    """d1d2(R) ⊆ P and δ1δ2(R) ⊆ P ⇒ d1(R) ⊆ P or d2(R) ⊆ P, with P = inst.L."""
    fam = inst.family()
    Pm = inst.L.mask
    d_in = Pm[fam.tables].all(axis=1)
    dt = fam.delta_tables[fam.delta_of]
    n = fam.size
    ant_total, bad = 0, []
    for t2 in range(n):
        ant = Pm[fam.tables[:, fam.tables[t2]]].all(axis=1) & Pm[dt[:, dt[t2]]].all(axis=1)
        ant_total += int(ant.sum())
        if not d_in[t2]:
            for k in np.flatnonzero(ant & ~d_in):
                bad.append((int(k), t2))
    return _entry("ideal_composition", inst.name, "implication", "fail" if bad else "pass", count=ant_total,
                  failures=len(bad), strategy="exhaustive",
                  witness=_pair_desc(fam, *bad[0]) if bad else None)


def lemma_suite(inst: LemmaSuiteInstance, partitions: int = 1) -> OracleReport:
    """Every lemma residual over its hypothesis-filtered input space for every
    context, plus the T/P-set lemmas, corollary scans, and colon-ideal primeness."""
    t0 = time.perf_counter()
    facts = verify_hypotheses(inst) if inst.S.finite else []
    entries: list[dict] = []
    res = _partitioned(lambda c: _ctx_entries(c, inst.probe), inst.contexts, partitions)
    for r in res:
        entries.extend(r)
    for ctx in inst.unconditional_probe:
        for lid in ("L31", "L32"):
            rep = lemma_reports(ctx, lid, inst.probe)[0]
            e = _report_entry(rep, f"{lid}:unconditional", ctx.name, asserted=False)
            entries.append(e)
    if inst.S.finite and inst.M.finite:
        entries.extend(_t_set_entries(inst.S, inst.M))
    if inst.corollary_family is not None:
        verify_hypotheses(inst.corollary_family)
        entries.extend(_corollary_entries(inst.corollary_family))
    for case in inst.ideal_composition_cases:
        case_facts = [is_prime_ideal(case.L), is_two_torsion_free(quotient_module(case.R, case.L))]
        if not all(f.holds for f in case_facts):
            entries.append(_entry("ideal_composition", case.name, "implication", "skipped",
                                  reason="P not prime or R/P has 2-torsion"))
            continue
        entries.append(ideal_composition_scan(case))
    entries.extend(_colon_prime_entries(inst.colon_prime_carriers))
    summary: dict = {}
    for e in entries:
        s = summary.setdefault(e["id"], {"pass": 0, "fail": 0, "skipped": 0})
        s[e["verdict"]] += 1
    failed = [e for e in entries if e["asserted"] and e["verdict"] == "fail"]
    sizes = {"contexts": len(inst.contexts), "entries": len(entries)}
    rep = OracleReport("lemma_suite", inst.name, "fail" if failed else "pass", sizes,
                       [{k: e[k] for k in ("id", "subject", "witness") if k in e} for e in failed[:MAX_COUNTEREXAMPLES]],
                       len(failed), {k: summary[k] for k in sorted(summary)}, facts, time.perf_counter() - t0,
                       {"entries": entries})
    return rep


# ---------------------------------------------------------------------------
# standard finite instances


def m2z3(n: int = 3):
    from .carriers import CarrierDescriptor, Matrix, make_carrier
    from .scalars import modular

    return make_carrier(CarrierDescriptor(f"M2(Z{n})", "Algebra", Matrix(2, modular(n)), scalar_action=modular(n)))


def posner_instance(R: Carrier | None = None, *, mode: str = "exhaustive", samples: int = 100_000, seed: int = 0,
                    partitions: int = 1, name: str | None = None) -> OracleInstance:
    """M = R over itself; δ over inner derivations; f = identity (exhaustive)
    or f over invertible left multiplications (sampled)."""
    R = R or m2z3()
    fs = [named_hom("identity", R)] if mode == "exhaustive" else invertible_left_mults(R)
    return OracleInstance(name or f"posner:{R.label}:{mode}", R, R, None, inner_derivations(R), fs,
                          ("prime_ring", "prime_module", "two_torsion_free"), mode, samples, seed, partitions)


def creedon_instance(R: Carrier | None = None, L_spec: dict | None = None, partitions: int = 1,
                     name: str | None = None) -> OracleInstance:
    """R = upper-triangular 2×2 over Z₃ as a right module over itself."""
    from .carriers import CarrierDescriptor, Triangular, make_carrier, predicate_substructure
    from .scalars import modular

    R = R or make_carrier(CarrierDescriptor("T2(Z3)", "Ring", Triangular(2, modular(3))))
    L_spec = L_spec or {"entries_zero": [[0, 0]]}
    L = predicate_substructure(R, L_spec, "submodule", name="L")
    return OracleInstance(name or f"creedon:{R.label}", R, R, L, all_derivations(R), invertible_left_mults(R),
                          ("prime_submodule", "quotient_two_torsion_free"), partitions=partitions)


def jordan_instance(S: Carrier | None = None, partitions: int = 1, name: str | None = None) -> OracleInstance:
    S = S or m2z3()
    return OracleInstance(name or f"jordan:{S.label}", S, S, None, inner_derivations(S), central_scalings(S),
                          ("prime_algebra", "two_torsion_free", "jointly_prime"), partitions=partitions)


def right_mult_context(S: Carrier, B0=None, name: str | None = None) -> BracketContext:
    """D = right multiplication by B0, δ = ad(B0), f = negation."""
    from .carriers import as_element

    B0 = as_element(S, B0 if B0 is not None else S.unit(0, 1))
    return BracketContext(named_hom("right_mult", S, B0=B0), inner_derivation(B0), named_hom("negation", S),
                          name or f"right_mult[{S.show(B0.payload)}]")


def lemma_contexts(S: Carrier, per_pair: int = 1, seed: int = 0) -> list[BracketContext]:
    """Per (δ, f) over inner derivations × central scalings: seeded samples of
    the maps obeying the Jordan-action law and of the Jordan (δ,f)-derivations;
    plus the right-multiplication example."""
    rng = np.random.default_rng(seed)
    out = []
    for delta in inner_derivations(S):
        for f in central_scalings(S):
            act = enumerate_additive_maps(EnumerationSpec(S, S, [Constraint("jordan_action_law", delta, f)]))
            jor = enumerate_jordan_df_derivations(delta, f, S, S)
            for tag, res in (("action", act), ("jordan", jor)):
                if not res.count:
                    continue
                for k in sorted(rng.choice(res.count, size=min(per_pair, res.count), replace=False)):
                    D = table_map(S, S, res.tables[k], name=f"{tag}#{k}")
                    out.append(BracketContext(D, delta, f, f"{tag}#{k}[{delta.name},{f.name}]"))
    out.append(right_mult_context(S))
    return out


def colon_prime_carriers() -> list[Carrier]:
    from .carriers import CarrierDescriptor, Modular, Product, Triangular, make_carrier
    from .scalars import modular

    return [
        m2z3(),
        make_carrier(CarrierDescriptor("T2(Z3)", "Ring", Triangular(2, modular(3)))),
        make_carrier(CarrierDescriptor("Z9", "Ring", Modular(9))),
        make_carrier(CarrierDescriptor("Z6", "Ring", Modular(6))),
        make_carrier(CarrierDescriptor("Z3xZ3", "Ring", Product(Modular(3), Modular(3)))),
    ]


def ideal_composition_cases() -> list[OracleInstance]:
    from .carriers import predicate_substructure

    R = m2z3()
    P0 = zero_substructure(R, "ideal", name="0")
    a = OracleInstance(f"ideal_composition:{R.label}:P=0", R, R, P0, inner_derivations(R), [named_hom("identity", R)])
    c = creedon_instance()
    T = c.R
    P = predicate_substructure(T, {"entries_zero": [[0, 0]]}, "ideal", sidedness="two-sided", name="P")
    b = OracleInstance(f"ideal_composition:{T.label}:P", T, T, P, c.deltas, c.fs)
    return [a, b]


def m2z3_lemma_instance(per_pair: int = 1, seed: int = 0, corollaries: bool = True) -> LemmaSuiteInstance:
    S = m2z3()
    return LemmaSuiteInstance(
        "lemma_suite:M2(Z3)", S, S, lemma_contexts(S, per_pair, seed),
        colon_prime_carriers=colon_prime_carriers(),
        corollary_family=posner_instance(S, name="corollaries:M2(Z3)") if corollaries else None,
        ideal_composition_cases=ideal_composition_cases() if corollaries else [],
        unconditional_probe=[right_mult_context(S)],
    )


def m2q_lemma_instance(n_contexts: int = 1, seed: int = 0, probe: ProbeSpec = DEFAULT_PROBE) -> LemmaSuiteInstance:
    """Probe-complete suite on M₂(Q) with right-multiplication contexts."""
    from .carriers import CarrierDescriptor, Matrix, make_carrier
    from .scalars import RATIONALS

    S = make_carrier(CarrierDescriptor("M2(Q)", "Algebra", Matrix(2, RATIONALS), scalar_action=RATIONALS))
    ctxs = [right_mult_context(S)]
    rng = np.random.default_rng(seed)
    for _ in range(n_contexts - 1):
        B0 = tuple(tuple(int(v) for v in row) for row in rng.integers(-2, 3, size=(2, 2)))
        ctxs.append(right_mult_context(S, B0))
    return LemmaSuiteInstance("lemma_suite:M2(Q)", S, S, ctxs, probe=probe, hypothesis_checks=(),
                              unconditional_probe=[ctxs[0]])
