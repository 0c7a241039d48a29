"""Structural predicates and derived objects on finite carriers:
annihilators, colon ideals, torsion, primeness, center, T(x), and the set
where a map obeys the (δ,f)-law; plus the derivation induced on a quotient."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .carriers import (
    Batch,
    Carrier,
    Element,
    ModuleCarrier,
    PolynomialRing,
    ProductRing,
    Substructure,
    closure_mask,
    quotient_module,
    quotient_ring,
    validate_closure,
    zero_substructure,
)
from .errors import InfiniteCarrier, NotInvariant
from .maps import AdditiveMap
from .probe import DEFAULT_PROBE, ProbeSpec, probe_tuples

LATTICE_CAP = 10_000


@dataclass
class StructuralFact:
    subject: str
    predicate: str
    verdict: str  # holds | fails | declared | incomplete
    witness: tuple | None = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict in ("holds", "declared")

    def witness_str(self) -> str:
        if not self.witness:
            return ""
        return "(" + ", ".join(str(w) for w in self.witness) + ")"

    def to_dict(self) -> dict:
        d = {"subject": self.subject, "predicate": self.predicate, "verdict": self.verdict}
        if self.witness:
            d["witness"] = [_encode_witness_part(w) for w in self.witness]
        if self.note:
            d["note"] = self.note
        return d


def _encode_witness_part(w):
    if isinstance(w, Element):
        return w.encode()
    if isinstance(w, Substructure):
        return {"generators": [w.parent.encode(g) for g in w.generators] if w.generators
                else [w.parent.encode(p) for p in w.payloads()]}
    return w


def _need_finite(*cs: Carrier):
    for c in cs:
        if not c.finite:
            raise InfiniteCarrier(f"{c.label} is infinite; exhaustive analysis unavailable")


def _declared(c: Carrier, fact: str, predicate: str) -> StructuralFact:
    if fact in c.declared_facts:
        return StructuralFact(c.label, predicate, "declared", note=c.declared_facts[fact])
    raise InfiniteCarrier(f"{c.label} is infinite and declares no {fact!r} fact")


def _el(c: Carrier, i) -> Element:
    return Element(c, c.tables.payloads[int(i)])


# ---------------------------------------------------------------------------
# annihilators and colon ideals


def right_annihilator(M: Carrier | Substructure) -> Substructure:
    """{r : m r = 0 for every m}; M may be a module or a submodule."""
    if isinstance(M, Substructure):
        parent, rows = M.parent, np.flatnonzero(M.mask)
    else:
        parent = M
        _need_finite(M)
        rows = np.arange(M.tables.size)
    R = parent.ring
    _need_finite(parent, R)
    T = parent.tables
    keep = (T.act[rows, :] == T.zero).all(axis=0)
    return Substructure(R, "ideal", members=[R.payloads[i] for i in np.flatnonzero(keep)],
                        sidedness="two-sided", name=f"Ann({parent.label})")


def colon_ideal(K: Substructure, M: Carrier | None = None, probe: ProbeSpec = DEFAULT_PROBE) -> Substructure:
    """(K:M) = {r : M r ⊆ K}."""
    M = K.parent if M is None else M
    R = M.ring
    name = f"({K.name or 'K'}:{M.label})"
    if not M.finite:
        return _colon_closed_form(K, M, name, probe)
    T = M.tables
    keep = K.mask[T.act].all(axis=0)
    col = Substructure(R, "ideal", members=[R.payloads[i] for i in np.flatnonzero(keep)],
                       sidedness="two-sided", name=name)
    ann = right_annihilator(quotient_module(M, K))
    if ann.members != col.members:  # two independent computations must agree
        raise AssertionError("colon ideal disagrees with the annihilator of the quotient")
    return col


def _colon_closed_form(K: Substructure, M: Carrier, name: str, probe: ProbeSpec) -> Substructure:
    """Registered closed form: a vanishing-component submodule of a product of
    polynomial modules over a polynomial ring (an integral domain) has colon
    ideal {0} as soon as some component is forced to vanish."""
    spec = K.predicate_desc or {}
    R = M.ring
    ok = (isinstance(M, ModuleCarrier) and M.action == "componentwise" and isinstance(R, PolynomialRing)
          and isinstance(M.base, ProductRing) and set(spec) == {"component_zero"} and spec["component_zero"])
    if not ok:
        raise InfiniteCarrier(f"no closed form for the colon ideal of {K!r} in {M.label}")
    col = zero_substructure(R, "ideal", name=name)
    # validation: each nonzero probe scalar moves some probe element out of K
    basis = M.probe_basis(probe)
    for (r,) in probe_tuples([R], probe):
        if R.is_zero(r):
            continue
        if all(K.contains(M.act(m, r)) for m in basis):
            raise AssertionError(f"closed-form colon ideal refuted by {R.show(r)}")
    return col


# ---------------------------------------------------------------------------
# torsion, faithfulness


def is_two_torsion_free(M: Carrier, trust_declared: bool = True) -> StructuralFact:
    if not M.finite:
        if "two_torsion_free" in M.declared_facts:
            return StructuralFact(M.label, "two_torsion_free", "declared", note=M.declared_facts["two_torsion_free"])
        return StructuralFact(M.label, "two_torsion_free", "incomplete", note="infinite carrier, nothing declared")
    T = M.tables
    ar = np.arange(T.size)
    bad = np.flatnonzero((T.add[ar, ar] == T.zero) & (ar != T.zero))
    if bad.size:
        return StructuralFact(M.label, "two_torsion_free", "fails", witness=(_el(M, bad[0]),),
                              note="2m = 0 with m != 0")
    return StructuralFact(M.label, "two_torsion_free", "holds")


def is_faithful(M: Carrier) -> StructuralFact:
    if not M.finite:
        return _declared(M, "faithful", "faithful")
    ann = right_annihilator(M)
    nz = [p for p in ann.payloads() if p != M.ring.zero]
    if nz:
        return StructuralFact(M.label, "faithful", "fails", witness=(M.ring.elem(nz[0]),),
                              note="nonzero ring element annihilates the module")
    return StructuralFact(M.label, "faithful", "holds")


# ---------------------------------------------------------------------------
# primeness


def is_prime_ring(R: Carrier) -> StructuralFact:
    if not R.finite:
        return _declared(R, "prime", "prime_ring")
    return _prime_ideal_scan(R, zero_substructure(R, "ideal"), "prime_ring", R.label)


def is_prime_ideal(P: Substructure) -> StructuralFact:
    R = P.parent
    _need_finite(R)
    validate_closure(Substructure(R, "ideal", members=P.members, sidedness="two-sided"))
    return _prime_ideal_scan(R, P, "prime_ideal", P.name or "P")


def _prime_ideal_scan(R: Carrier, P: Substructure, predicate: str, subject: str) -> StructuralFact:
    T = R.tables
    if P.is_whole():
        return StructuralFact(subject, predicate, "fails", note="not proper")
    inP = P.mask
    ar = np.arange(T.size)
    xry = T.mul[T.mul[:, :, None], ar[None, None, :]]  # (x, r, y)
    bad = inP[xry].all(axis=1) & ~inP[:, None] & ~inP[None, :]
    if bad.any():
        x, y = np.argwhere(bad)[0]
        return StructuralFact(subject, predicate, "fails", witness=(_el(R, x), _el(R, y)),
                              note="x R y inside with neither factor inside")
    return StructuralFact(subject, predicate, "holds")


def is_prime_submodule(L: Substructure, M: Carrier | None = None) -> StructuralFact:
    M = L.parent if M is None else M
    subject = L.name or "L"
    if not M.finite:
        if L.is_zero() if L.finite else L.predicate_desc == {"zero": True}:
            return _declared(M, "prime", "prime_submodule")
        raise InfiniteCarrier(f"primeness of a submodule of infinite {M.label} is not decidable here")
    if L.is_whole():
        return StructuralFact(subject, "prime_submodule", "fails", note="not proper")
    R = M.ring
    T = M.tables
    col = colon_ideal(L, M)
    nr = R.tables.size
    mrx = T.act[T.act[:, :, None], np.arange(nr)[None, None, :]]  # (m, r, x)
    bad = L.mask[mrx].all(axis=1) & ~L.mask[:, None] & ~col.mask[None, :]
    if bad.any():
        m, x = np.argwhere(bad)[0]
        return StructuralFact(subject, "prime_submodule", "fails", witness=(_el(M, m), _el(R, x)),
                              note="m R x inside L with m outside L and x outside (L:M)")
    return StructuralFact(subject, "prime_submodule", "holds")


def is_prime_module(M: Carrier) -> StructuralFact:
    if not M.finite:
        return _declared(M, "prime", "prime_module")
    f = is_prime_submodule(zero_substructure(M), M)
    return StructuralFact(M.label, "prime_module", f.verdict, f.witness, f.note)


class LatticeCapped(Exception):
    pass


def substructure_lattice(parent: Carrier, kind: str, sidedness: str | None = None,
                         cap: int = LATTICE_CAP) -> list[Substructure]:
    """All sub-structures of the given kind, by closure from singletons and
    iterated joins; raises LatticeCapped past ``cap`` members."""
    _need_finite(parent)
    from .carriers import _sides

    right, left = _sides(kind, sidedness)
    T = parent.tables
    seen: dict[bytes, np.ndarray] = {}
    singles = []
    for i in range(T.size):
        m = closure_mask(parent, [i], right=right, left=left)
        key = m.tobytes()
        if key not in seen:
            seen[key] = m
            singles.append(m)
    queue = list(singles)
    while queue:
        a = queue.pop()
        for s in singles:
            if (s <= a).all():
                continue
            j = closure_mask(parent, np.flatnonzero(a | s), right=right, left=left)
            key = j.tobytes()
            if key not in seen:
                seen[key] = j
                queue.append(j)
                if len(seen) > cap:
                    raise LatticeCapped(f"more than {cap} sub-structures")
    out = []
    for m in sorted(seen.values(), key=lambda m: (m.sum(), m.tobytes())):
        out.append(Substructure(parent, kind, members=[T.payloads[i] for i in np.flatnonzero(m)],
                                sidedness=sidedness, generators=()))
    return out


def _products_vanish(I: np.ndarray, N: np.ndarray, J: np.ndarray, T) -> bool:
    """Is i·n·j = 0 for all i in I, n in N, j in J (index arrays)?"""
    inner = np.unique(T.left[np.ix_(I, N)])
    return bool((T.act[np.ix_(inner, J)] == T.zero).all())


def is_jointly_prime(M: Carrier, cap: int = LATTICE_CAP) -> StructuralFact:
    if not M.finite:
        return _declared(M, "jointly_prime", "jointly_prime")
    S = M.ring
    _need_finite(S)
    try:
        lefts = substructure_lattice(S, "ideal", "left", cap)
        rights = substructure_lattice(S, "ideal", "right", cap)
        subs = substructure_lattice(M, "bisubmodule", None, cap)
    except LatticeCapped as e:
        return StructuralFact(M.label, "jointly_prime", "incomplete", note=str(e))
    T = M.tables
    full = np.arange(T.size)
    for I in lefts:
        Ii = np.flatnonzero(I.mask)
        for J in rights:
            Ji = np.flatnonzero(J.mask)
            if _products_vanish(Ii, full, Ji, T):
                continue
            for N in subs:
                if N.is_zero():
                    continue
                if _products_vanish(Ii, np.flatnonzero(N.mask), Ji, T):
                    return StructuralFact(M.label, "jointly_prime", "fails", witness=(I, N, J),
                                          note="I N J = 0 but I M J != 0 and N != 0")
    return StructuralFact(M.label, "jointly_prime", "holds",
                          note=f"{len(lefts)} left ideals, {len(rights)} right ideals, {len(subs)} bisubmodules")


def is_prime_algebra(S: Carrier, cap: int = LATTICE_CAP) -> StructuralFact:
    if not S.finite:
        return _declared(S, "prime", "prime_algebra")
    try:
        ideals = substructure_lattice(S, "ideal", "two-sided", cap)
    except LatticeCapped as e:
        return StructuralFact(S.label, "prime_algebra", "incomplete", note=str(e))
    T = S.tables
    nonzero = [U for U in ideals if not U.is_zero()]
    for U in nonzero:
        for V in nonzero:
            if (T.mul[np.ix_(np.flatnonzero(U.mask), np.flatnonzero(V.mask))] == T.zero).all():
                return StructuralFact(S.label, "prime_algebra", "fails", witness=(U, V), note="U V = 0")
    return StructuralFact(S.label, "prime_algebra", "holds", note=f"{len(ideals)} two-sided ideals")


# ---------------------------------------------------------------------------
# center, T(x), P


def center(S: Carrier) -> list[Element]:
    _need_finite(S)
    T = S.tables
    central = (T.mul == T.mul.T).all(axis=1)
    return [_el(S, i) for i in np.flatnonzero(central)]


def T_set(x: Element, M: Carrier) -> Substructure:
    """{m : m(xa − ax) = 0 for all a}, validated to be a sub-bimodule."""
    S = M.ring
    _need_finite(M, S)
    TS, TM = S.tables, M.tables
    xi = TS.index[x.payload]
    comm = TS.sub[TS.mul[xi, :], TS.mul[:, xi]]
    keep = (TM.act[:, comm] == TM.zero).all(axis=1)
    sub = Substructure(M, "bisubmodule" if M.has_left else "submodule",
                       members=[TM.payloads[i] for i in np.flatnonzero(keep)], name=f"T({x})")
    validate_closure(sub)
    return sub


def P_set(D: AdditiveMap, delta: AdditiveMap, f: AdditiveMap, S: Carrier | None = None,
          M: Carrier | None = None) -> list[Element]:
    """{x : D(xa) = D(x)a + f(x)δ(a) for all a}."""
    S = D.source if S is None else S
    _need_finite(S, D.target)
    x = Batch.axis(S, 0, 2)
    a = Batch.axis(S, 1, 2)
    lhs = D(x * a)
    rhs = D(x) * a + f(x) * delta(a)
    keep = (lhs.idx == rhs.idx).all(axis=1)
    return [_el(S, i) for i in np.flatnonzero(keep)]


# ---------------------------------------------------------------------------
# induced derivation


def induce_quotient_derivation(delta: AdditiveMap, A: Substructure) -> AdditiveMap:
    """δ*(x + A) = δ(x) + A on R/A; requires δ(A) ⊆ A."""
    R = delta.source
    _need_finite(R)
    if A.parent is not R:
        raise ValueError("ideal does not belong to the map's ring")
    for p in A.payloads():
        img = delta.apply(p)
        if not A.contains(img):
            raise NotInvariant(f"δ({R.show(p)}) = {R.show(img)} leaves the ideal",
                               witness=(R.elem(p), R.elem(img)))
    Q = quotient_ring(R, A)
    fn = lambda p: Q.canonical(delta.apply(p))  # noqa: E731
    star = AdditiveMap(Q, Q, fn, name=f"{delta.name}*", constructor="induced", params={"map": delta.name},
                       role_claim=delta.role_claim)
    from .checks import check_derivation

    base = check_derivation(delta)
    star.validation = check_derivation(star) if base.verdict == "pass" else None
    return star
