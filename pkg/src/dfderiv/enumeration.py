"""Exhaustive pruned enumeration of additive maps between finite carriers.

A map is fixed by the images of an independent generating set g_0, g_1, ...
of the source's additive group. Partial assignments on the subgroup
H_j = <g_0..g_{j-1}> are extended one generator at a time, vectorized over
all candidate images, and every law instance whose inputs lie in H_j is
checked as soon as H_j is reached.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .carriers import Carrier
from .checks import _require, check_bimodule_hom, check_derivation, check_module_hom
from .errors import BudgetExceeded, CarrierMismatch, MalformedDescriptor, NotFinite
from .maps import AdditiveMap, table_map
from .probe import DEFAULT_PROBE

DEFAULT_BUDGET = 10**8
CONSTRAINT_KINDS = ("derivation", "module_hom", "bimodule_hom", "df_derivation", "jordan_df_derivation",
                    "jordan_action_law", "fixed_values")
_CHUNK_CELLS = 1 << 22  # cap on rows × |H| per vectorized expansion
_MAX_KEPT_CELLS = 5 * 10**7


@dataclass
class Constraint:
    kind: str
    delta: AdditiveMap | None = None
    f: AdditiveMap | None = None
    values: dict = field(default_factory=dict)  # fixed_values: source payload -> target payload

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise MalformedDescriptor(f"unknown constraint {self.kind!r}")
        needs_pair = self.kind in ("df_derivation", "jordan_df_derivation", "jordan_action_law")
        if needs_pair and (self.delta is None or self.f is None):
            raise MalformedDescriptor(f"{self.kind} constraint needs delta and f")

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.delta is not None:
            d["delta"] = self.delta.name
        if self.f is not None:
            d["f"] = self.f.name
        if self.values:
            d["values"] = len(self.values)
        return d


@dataclass
class EnumerationSpec:
    source: Carrier
    target: Carrier
    constraints: list = field(default_factory=list)
    generator_basis: list | None = None  # [(payload, order)], default: from the construction
    budget: int = DEFAULT_BUDGET
    parallel_partitions: int = 1
    keep_tables: bool = True
    name: str = "m"


@dataclass
class EnumerationResult:
    spec: EnumerationSpec
    tables: np.ndarray  # (count, |source|) target indices in source order
    count: int
    examined: int
    survivors: list  # partial assignments alive after each generator
    complete: bool = True
    strategy: str = "pruned"
    elapsed_s: float = 0.0

    def maps(self):
        S, T, name = self.spec.source, self.spec.target, self.spec.name
        for k, row in enumerate(self.tables):
            yield table_map(S, T, row, name=f"{name}#{k}")

    def __iter__(self):
        return self.maps()

    def __len__(self):
        return self.count

    def contains(self, table) -> bool:
        t = np.asarray(table)
        return bool((self.tables == t[None, :]).all(axis=1).any()) if self.count else False

    def summary(self) -> dict:
        return {
            "source": self.spec.source.label,
            "target": self.spec.target.label,
            "constraints": [c.describe() for c in self.spec.constraints],
            "strategy": self.strategy,
            "count": self.count,
            "examined": self.examined,
            "survivors_per_generator": list(self.survivors),
            "complete": self.complete,
            "elapsed_s": self.elapsed_s,
        }


# ---------------------------------------------------------------------------
# generator coordinates


@dataclass
class _Coords:
    gens: list  # source indices of generators
    orders: list
    pos: np.ndarray  # source idx -> mixed-radix position (lowest generator least significant)
    lev: np.ndarray  # source idx -> number of generators needed to reach it
    src_at: np.ndarray  # position -> source idx


def _coordinates(S: Carrier, basis) -> _Coords:
    T = S.tables
    gens = [T.index[S.canonical(p)] for p, _ in basis]
    orders = [int(n) for _, n in basis]
    src_at = np.array([T.zero], dtype=np.intp)
    lev_at = np.array([0], dtype=np.intp)
    for j, (g, n) in enumerate(zip(gens, orders)):
        blocks, levs = [src_at], [lev_at]
        cur = T.zero
        for _ in range(1, n):
            cur = T.add[cur, g]
            blocks.append(T.add[src_at, cur])
            levs.append(np.full(lev_at.shape, j + 1, dtype=np.intp))
        src_at = np.concatenate(blocks)
        lev_at = np.concatenate(levs)
    if src_at.size != T.size or np.unique(src_at).size != T.size:
        raise MalformedDescriptor(f"generator basis of {S.label} is not an independent generating set")
    pos = np.empty(T.size, dtype=np.intp)
    pos[src_at] = np.arange(T.size)
    lev = np.empty(T.size, dtype=np.intp)
    lev[src_at] = lev_at
    return _Coords(gens, orders, pos, lev, src_at)


# ---------------------------------------------------------------------------
# constraint instances, grouped by the level at which they become checkable


@dataclass
class _Checks:
    """lhs = val[p_lhs]; rhs = add[ act[val[p_r], r] | left[r, val[p_r]] | const , const2 ]."""

    p_lhs: np.ndarray
    p_term: np.ndarray  # position of the mapped input in the first rhs term (-1: no term)
    r: np.ndarray  # ring index acting on it
    side: str  # "right" | "left" | "none"
    const: np.ndarray  # target index added to the rhs
    p_term2: np.ndarray | None = None  # optional second mapped term (left action), derivations
    r2: np.ndarray | None = None


def _instances(spec: EnumerationSpec, co: _Coords) -> dict:
    S, Tt = spec.source, spec.target
    TS, TT = S.tables, Tt.tables
    nS = TS.size
    by_level: dict[int, list] = {}

    def add(level_of, checks: _Checks):
        for L in np.unique(level_of):
            sel = level_of == L
            by_level.setdefault(int(L), []).append(_Checks(
                checks.p_lhs[sel], checks.p_term[sel], checks.r[sel], checks.side, checks.const[sel],
                None if checks.p_term2 is None else checks.p_term2[sel],
                None if checks.r2 is None else checks.r2[sel]))

    for c in spec.constraints:
        if c.kind == "fixed_values":
            xs = np.array([TS.index[S.canonical(k)] for k in c.values], dtype=np.intp)
            ts = np.array([TT.index[Tt.canonical(v)] for v in c.values.values()], dtype=np.intp)
            add(co.lev[xs], _Checks(co.pos[xs], np.full(xs.size, -1), np.zeros(xs.size, dtype=np.intp), "none",
                                    ts))
            continue
        if c.kind == "derivation":
            if Tt is not S or not S.is_ring:
                raise CarrierMismatch("derivation constraint needs a ring self-map")
            a, b = np.meshgrid(np.arange(nS), np.arange(nS), indexing="ij")
            a, b = a.ravel(), b.ravel()
            ab = TS.mul[a, b]
            lvl = np.maximum(np.maximum(co.lev[a], co.lev[b]), co.lev[ab])
            # δ(ab) = δ(a)·b + a·δ(b)
            add(lvl, _Checks(co.pos[ab], co.pos[a], b, "right", np.full(a.size, TT.zero), co.pos[b], a))
            continue
        R = S.ring
        nR = R.tables.size
        if c.kind in ("module_hom", "bimodule_hom", "df_derivation"):
            if Tt.ring is not R:
                raise CarrierMismatch(f"{c.kind} constraint needs source and target over one ring")
            x, r = np.meshgrid(np.arange(nS), np.arange(nR), indexing="ij")
            x, r = x.ravel(), r.ravel()
            xr = TS.act[x, r]
            const = np.full(x.size, TT.zero)
            if c.kind == "df_derivation":
                const = TT.act[c.f.table()[x], c.delta.table()[r]]
            add(np.maximum(co.lev[x], co.lev[xr]), _Checks(co.pos[xr], co.pos[x], r, "right", const))
            if c.kind == "bimodule_hom":
                rx = TS.left[r, x]
                add(np.maximum(co.lev[x], co.lev[rx]),
                    _Checks(co.pos[rx], co.pos[x], r, "left", np.full(x.size, TT.zero)))
            continue
        if c.kind == "jordan_df_derivation":
            if not S.is_ring or Tt.ring is not S:
                raise CarrierMismatch("Jordan constraint needs an algebra and a bimodule over it")
            x = np.arange(nS)
            xx = TS.mul[x, x]
            const = TT.act[c.f.table()[x], c.delta.table()[x]]
            add(np.maximum(co.lev[x], co.lev[xx]), _Checks(co.pos[xx], co.pos[x], x, "right", const))
            continue
        if c.kind == "jordan_action_law":
            if not S.is_ring or Tt.ring is not S:
                raise CarrierMismatch("Jordan-action constraint needs an algebra and a bimodule over it")
            x, y = np.meshgrid(np.arange(nS), np.arange(nS), indexing="ij")
            x, y = x.ravel(), y.ravel()
            xy = TS.add[TS.mul[x, y], TS.mul[y, x]]
            fx, dy = c.f.table()[x], c.delta.table()[y]
            const = TT.add[TT.act[fx, dy], TT.left[dy, fx]]
            # D(x•y) = D(x)y + yD(x) + f(x)δ(y) + δ(y)f(x)
            add(np.maximum(np.maximum(co.lev[x], co.lev[y]), co.lev[xy]),
                _Checks(co.pos[xy], co.pos[x], y, "right", const, co.pos[x], y))
    return by_level


def _survives(val: np.ndarray, checks: list, TT) -> np.ndarray:
    ok = np.ones(val.shape[0], dtype=bool)
    for ch in checks:
        if ch.p_lhs.size == 0:
            continue
        lhs = val[:, ch.p_lhs]
        if ch.side == "right":
            term = TT.act[val[:, ch.p_term], ch.r[None, :]]
        elif ch.side == "left":
            term = TT.left[ch.r[None, :], val[:, ch.p_term]]
        else:
            term = np.full(lhs.shape, TT.zero)
        rhs = TT.add[term, ch.const[None, :]]
        if ch.p_term2 is not None:
            rhs = TT.add[rhs, TT.left[ch.r2[None, :], val[:, ch.p_term2]]]
        ok &= (lhs == rhs).all(axis=1)
    return ok


# ---------------------------------------------------------------------------
# search


class _Search:
    def __init__(self, spec: EnumerationSpec):
        S, T = spec.source, spec.target
        if not (S.finite and T.finite):
            raise NotFinite("enumeration needs finite source and target")
        self.spec = spec
        basis = spec.generator_basis if spec.generator_basis is not None else S.generators()
        self.co = _coordinates(S, basis)
        self.TT = T.tables
        self.checks = _instances(spec, self.co)
        self.ngen = len(self.co.gens)
        # candidate images: targets killed by the generator's order
        self.cands = [np.flatnonzero(self.TT.scaled(n) == self.TT.zero) for n in self.co.orders]
        maxn = max(self.co.orders, default=1)
        self.scaled = np.stack([self.TT.scaled(c) for c in range(maxn)]) if maxn else None
        self.examined = 0
        self.survivors = [0] * self.ngen

    def _charge(self, n: int, partial):
        self.examined += n
        if self.examined > self.spec.budget:
            raise BudgetExceeded(
                f"enumeration examined more than {self.spec.budget} candidates",
                summary={"examined": self.examined, "budget": self.spec.budget, "found_so_far": partial,
                         "survivors_per_generator": list(self.survivors), "complete": False},
            )

    def expand(self, val: np.ndarray, j: int) -> np.ndarray:
        """Extend assignments on H_j by every candidate image of g_j; filter."""
        cands = self.cands[j]
        n = self.co.orders[j]
        K, h = val.shape
        self._charge(K * cands.size, None)
        TT = self.TT
        rows = np.repeat(val, cands.size, axis=0)  # (K*C, h)
        t = np.tile(cands, K)  # (K*C,)
        blocks = [rows]
        for c in range(1, n):
            blocks.append(TT.add[rows, self.scaled[c][t][:, None]])
        new = np.concatenate(blocks, axis=1)  # position c*h + p
        ok = _survives(new, self.checks.get(j + 1, []), TT)
        return new[ok]

    def dfs(self, val: np.ndarray, j: int, out: list):
        if j == self.ngen:
            out.append(val)
            return
        step = max(1, _CHUNK_CELLS // max(1, val.shape[1] * self.cands[j].size * self.co.orders[j]))
        for s in range(0, val.shape[0], step):
            nxt = self.expand(val[s:s + step], j)
            self.survivors[j] += nxt.shape[0]
            if nxt.shape[0]:
                self.dfs(nxt, j + 1, out)


def enumerate_additive_maps(spec: EnumerationSpec) -> EnumerationResult:
    """Every additive map source -> target satisfying all constraints, once,
    in lexicographic order of generator images."""
    t0 = time.perf_counter()
    s = _Search(spec)
    TT = s.TT
    root = np.full((1, 1), TT.zero, dtype=np.intp)
    if not _survives(root, s.checks.get(0, []), TT).all():
        return _result(spec, np.empty((0, 0), dtype=np.intp), s, t0)
    if s.ngen == 0:
        return _result(spec, root, s, t0)
    level1 = s.expand(root, 0)
    s.survivors[0] = level1.shape[0]
    parts = max(1, int(spec.parallel_partitions))
    chunks = [c for c in np.array_split(level1, parts) if c.shape[0]] if level1.shape[0] else []
    if parts == 1 or len(chunks) <= 1:
        out: list = []
        s.dfs(level1, 1, out)
        found = out
    else:
        subs = [_Search.__new__(_Search) for _ in chunks]
        for sub in subs:
            sub.__dict__.update(s.__dict__)
            sub.survivors = [0] * s.ngen
            sub.examined = 0
            sub.spec = spec
        budget_left = spec.budget - s.examined

        def work(args):
            sub, chunk = args
            sub.spec = _budgeted(spec, budget_left)
            o: list = []
            sub.dfs(chunk, 1, o)
            return o

        with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
            results = list(ex.map(work, zip(subs, chunks)))
        found = [a for o in results for a in o]
        s.examined += sum(sub.examined for sub in subs)
        for j in range(1, s.ngen):
            s.survivors[j] = sum(sub.survivors[j] for sub in subs)
        if s.examined > spec.budget:
            s._charge(0, None)
    vals = np.concatenate(found) if found else np.empty((0, s.co.src_at.size), dtype=np.intp)
    if spec.keep_tables and vals.size > _MAX_KEPT_CELLS:
        raise BudgetExceeded("too many maps to keep as tables; rerun with keep_tables=False",
                             summary={"count": int(vals.shape[0]), "complete": False})
    tables = vals[:, s.co.pos] if vals.size else np.empty((0, spec.source.tables.size), dtype=np.intp)
    return _result(spec, tables, s, t0)


def _budgeted(spec: EnumerationSpec, budget: int) -> EnumerationSpec:
    return EnumerationSpec(spec.source, spec.target, spec.constraints, spec.generator_basis, budget,
                           spec.parallel_partitions, spec.keep_tables, spec.name)


def _result(spec, tables, s: _Search, t0) -> EnumerationResult:
    count = int(tables.shape[0])
    kept = tables if spec.keep_tables else np.empty((0, spec.source.tables.size), dtype=np.intp)
    return EnumerationResult(spec, kept, count, s.examined, list(s.survivors), True, "pruned",
                             time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# (δ,f)-derivations and Jordan (δ,f)-derivations


def _validate_df_inputs(delta: AdditiveMap, f: AdditiveMap, M: Carrier, bimodule: bool):
    if not (M.finite and delta.source.finite):
        raise NotFinite("enumeration needs finite carriers")
    _require(check_derivation(delta, DEFAULT_PROBE), f"{delta.name} derivation")
    if bimodule:
        _require(check_bimodule_hom(f, DEFAULT_PROBE), f"{f.name} bimodule homomorphism")
    else:
        _require(check_module_hom(f, DEFAULT_PROBE), f"{f.name} module homomorphism")
    if f.source is not M or f.target is not M or delta.source is not M.ring:
        raise CarrierMismatch("δ must act on the ring of M and f must be an endomorphism of M")


def cyclic_generator(M: Carrier) -> int | None:
    """Index of the first g with g·R = M, or None."""
    T = M.tables
    for g in range(T.size):
        if np.unique(T.act[g]).size == T.size:
            return g
    return None


def enumerate_df_derivations(delta: AdditiveMap, f: AdditiveMap, M: Carrier | None = None, *,
                             budget: int = DEFAULT_BUDGET, partitions: int = 1, name: str = "d",
                             closed_form: bool = True) -> EnumerationResult:
    """All d: M -> M with d(xa) = d(x)a + f(x)δ(a). Cyclic M is parameterized
    by d(g) for a generator g; otherwise the pruned search is used."""
    M = M or f.source
    _validate_df_inputs(delta, f, M, bimodule=False)
    g = cyclic_generator(M) if closed_form else None
    if g is None:
        spec = EnumerationSpec(M, M, [Constraint("df_derivation", delta, f)], budget=budget,
                               parallel_partitions=partitions, name=name)
        return enumerate_additive_maps(spec)
    t0 = time.perf_counter()
    T, TR = M.tables, M.ring.tables
    n, nR = T.size, TR.size
    ftab, dtab = f.table(), delta.table()
    cand = np.arange(n)
    # d(g·a) = d(g)·a + f(g)·δ(a) for every candidate d(g)
    vals = T.add[T.act[cand][:, :], T.act[ftab[g], dtab][None, :]]  # (n, nR)
    rep = np.full(n, -1, dtype=np.intp)
    ga = T.act[g]
    for a in range(nR):  # first a reaching each m
        if rep[ga[a]] < 0:
            rep[ga[a]] = a
    consistent = (vals == vals[:, rep[ga]]).all(axis=1)
    tables = vals[:, rep]  # d(m) = value at the representative a of m
    examined = n
    keep = []
    x = np.arange(n)
    fx_da = T.act[ftab[:, None], dtab[None, :]]  # (n, nR)
    for k in np.flatnonzero(consistent):
        d = tables[k]
        examined += 1
        if (d[T.act] != T.add[T.act[d[x][:, None], np.arange(nR)[None, :]], fx_da]).any():
            continue
        if (d[T.add] != T.add[d[:, None], d[None, :]]).any():
            continue
        keep.append(d)
    out = np.array(keep, dtype=np.intp).reshape(-1, n)
    spec = EnumerationSpec(M, M, [Constraint("df_derivation", delta, f)], budget=budget,
                           parallel_partitions=partitions, name=name)
    return EnumerationResult(spec, out, int(out.shape[0]), examined, [int(consistent.sum())], True,
                             "closed_form", time.perf_counter() - t0)


def enumerate_jordan_df_derivations(delta: AdditiveMap, f: AdditiveMap, S: Carrier | None = None,
                                    M: Carrier | None = None, *, budget: int = DEFAULT_BUDGET,
                                    partitions: int = 1, name: str = "D") -> EnumerationResult:
    """All additive D: S -> M with D(x²) = D(x)x + f(x)δ(x)."""
    S = S or delta.source
    M = M or f.target
    if not (S.finite and M.finite):
        raise NotFinite("enumeration needs finite carriers")
    _require(check_derivation(delta, DEFAULT_PROBE), f"{delta.name} derivation")
    _require(check_bimodule_hom(f, DEFAULT_PROBE), f"{f.name} bimodule homomorphism")
    if f.source is not S or f.target is not M or M.ring is not S:
        raise CarrierMismatch("f must map the algebra into a bimodule over it")
    spec = EnumerationSpec(S, M, [Constraint("jordan_df_derivation", delta, f)], budget=budget,
                           parallel_partitions=partitions, name=name)
    return enumerate_additive_maps(spec)


def random_additive_table(S: Carrier, T: Carrier, rng, basis=None) -> np.ndarray:
    """Table of a uniformly random additive map (random admissible generator images)."""
    co = _coordinates(S, basis if basis is not None else S.generators())
    TT = T.tables
    val = np.full(1, TT.zero, dtype=np.intp)
    for n in co.orders:
        cands = np.flatnonzero(TT.scaled(n) == TT.zero)
        t = int(cands[rng.integers(cands.size)])
        blocks = [val]
        cur = TT.zero
        for _ in range(1, n):
            cur = TT.add[cur, t]
            blocks.append(TT.add[val, cur])
        val = np.concatenate(blocks)
    return val[co.pos]
