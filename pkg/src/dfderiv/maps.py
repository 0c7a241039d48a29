"""Additive maps between carriers: named constructors, table-backed maps,
lazy composition / sum / negation, and probe-based equality."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .carriers import (
    Batch,
    Carrier,
    CarrierMismatch,
    Element,
    ModuleCarrier,
    PolynomialRing,
    ProductRing,
    QuotientModule,
    QuotientRing,
    as_element,
)
from .errors import MalformedDescriptor, NonIntegralScaling, UnsupportedCarrier
from .probe import DEFAULT_PROBE, ProbeSpec, probe_tuples

ROLES = ("derivation", "module_hom", "bimodule_hom", "df_derivation", "jordan_df_derivation",
         "endomorphism", "unclassified")


class AdditiveMap:
    """A map ``source -> target`` given by a payload function.

    ``constructor``/``params`` record how a rule-backed map was built; table-
    backed maps carry an index array over the finite source.
    """

    def __init__(self, source: Carrier, target: Carrier, fn, *, name: str, constructor: str = "rule",
                 params: dict | None = None, role_claim: str = "unclassified", table=None):
        if role_claim.split("(")[0] not in ROLES:
            raise MalformedDescriptor(f"unknown role claim {role_claim!r}")
        self.source = source
        self.target = target
        self._fn = fn
        self.name = name
        self.constructor = constructor
        self.params = dict(params or {})
        self.role_claim = role_claim
        self._table = None if table is None else np.asarray(table, dtype=np.intp)
        self._cache: dict = {}

    @property
    def backing(self) -> str:
        return "table" if self.constructor == "table" else "rule"

    def apply(self, p):
        return self._fn(p)

    def __call__(self, x):
        if isinstance(x, Batch):
            if x.carrier is not self.source:
                raise CarrierMismatch(f"{self.name} expects {self.source.label}, got {x.carrier.label}")
            return Batch(self.target, self.table()[x.idx])
        x = as_element(self.source, x)
        return Element(self.target, self._fn(x.payload))

    def table(self) -> np.ndarray:
        """Target indices of the images of all source elements (finite source)."""
        if self._table is None:
            ix = self.target.tables.index
            self._table = np.array([ix[self._fn(p)] for p in self.source.payloads], dtype=np.intp)
        return self._table

    def describe(self) -> dict:
        d = {"name": self.name, "source": self.source.label, "target": self.target.label,
             "backing": self.backing, "role_claim": self.role_claim}
        if self.backing == "rule":
            d["constructor"] = self.constructor
            if self.params:
                d["params"] = {k: _param_json(v) for k, v in self.params.items()}
        return d

    def __repr__(self):
        return f"<AdditiveMap {self.name}: {self.source.label} -> {self.target.label}>"


def _param_json(v):
    if isinstance(v, Element):
        return v.encode()
    if isinstance(v, Fraction):
        return [v.numerator, v.denominator]
    if isinstance(v, AdditiveMap):
        return v.name
    return v


# ---------------------------------------------------------------------------
# table-backed maps


def table_map(source: Carrier, target: Carrier, assignment, name: str = "table",
              role_claim: str = "unclassified") -> AdditiveMap:
    """Map from a full assignment: dict payload->payload, list of (in, out)
    pairs, or an index array over ``source.payloads``."""
    TS, TT = source.tables, target.tables
    if isinstance(assignment, np.ndarray):
        arr = np.asarray(assignment, dtype=np.intp)
        if arr.shape != (TS.size,) or arr.min(initial=0) < 0 or arr.max(initial=0) >= TT.size:
            raise MalformedDescriptor("table must assign every source element exactly once")
    else:
        pairs = assignment.items() if isinstance(assignment, dict) else assignment
        arr = np.full(TS.size, -1, dtype=np.intp)
        for a, b in pairs:
            a = a.payload if isinstance(a, Element) else source.canonical(a)
            b = b.payload if isinstance(b, Element) else target.canonical(b)
            i = TS.index[a]
            if arr[i] != -1:
                raise MalformedDescriptor(f"table assigns {source.show(a)} twice")
            arr[i] = TT.index[b]
        if (arr < 0).any():
            missing = source.show(TS.payloads[int(np.flatnonzero(arr < 0)[0])])
            raise MalformedDescriptor(f"table leaves {missing} unassigned")
    pl = TT.payloads
    ix = TS.index
    return AdditiveMap(source, target, lambda p: pl[arr[ix[p]]], name=name, constructor="table",
                       role_claim=role_claim, table=arr)


def table_pairs(m: AdditiveMap) -> list:
    """Encoded (input, output) pairs, the table-map file format."""
    S, T = m.source, m.target
    return [[S.encode(p), T.encode(T.tables.payloads[j])] for p, j in zip(S.payloads, m.table())]


# ---------------------------------------------------------------------------
# polynomial maps


def _poly_parts(carrier: Carrier):
    """(ring-or-product, list of polynomial component rings) for polynomial carriers."""
    base = carrier.base if isinstance(carrier, ModuleCarrier) else carrier
    if isinstance(base, PolynomialRing):
        return base, None
    if isinstance(base, ProductRing) and all(isinstance(c, PolynomialRing) for c in base.components):
        return base, base.components
    raise UnsupportedCarrier(f"{carrier.label} is not built on a polynomial construction")


def formal_derivative(carrier: Carrier, name: str = "formal_derivative") -> AdditiveMap:
    base, comps = _poly_parts(carrier)
    if comps is None:
        fn = base.derivative
        role = "derivation" if carrier.is_ring else "unclassified"
    else:
        fn = lambda p: tuple(c.derivative(x) for c, x in zip(comps, p))  # noqa: E731
        role = "unclassified"
    return AdditiveMap(carrier, carrier, fn, name=name, constructor="formal_derivative", role_claim=role)


def scaled_derivative(carrier: Carrier, q, name: str = "scaled_derivative") -> AdditiveMap:
    base, comps = _poly_parts(carrier)
    if comps is None:
        fn = lambda p: base.scale(base.derivative(p), q)  # noqa: E731
    else:
        fn = lambda p: tuple(c.scale(c.derivative(x), q) for c, x in zip(comps, p))  # noqa: E731
    return AdditiveMap(carrier, carrier, fn, name=name, constructor="scaled_derivative", params={"q": q},
                       role_claim="derivation" if carrier.is_ring and comps is None else "unclassified")


# ---------------------------------------------------------------------------
# ring maps


def inner_derivation(B0: Element, name: str | None = None) -> AdditiveMap:
    R = B0.carrier
    if not R.is_ring:
        raise CarrierMismatch(f"inner derivation needs a ring element, got one in {R.label}")
    b = B0.payload
    fn = lambda a: R.sub(R.mul(b, a), R.mul(a, b))  # noqa: E731
    return AdditiveMap(R, R, fn, name=name or f"ad({R.show(b)})", constructor="inner_derivation",
                       params={"B0": B0}, role_claim="derivation")


def _embedder(source: Carrier, target: Carrier):
    """Payload map from a ring into a carrier that contains it (itself, or a
    regular module on the same construction)."""
    if target is source:
        return lambda p: p
    if isinstance(target, ModuleCarrier) and target.action == "regular" and target.ring is source:
        return target.embed_ring
    raise UnsupportedCarrier(f"{target.label} does not contain {source.label}")


def _require_product(carrier: Carrier, n: int = 2) -> ProductRing:
    base = carrier.base if isinstance(carrier, ModuleCarrier) else carrier
    if not isinstance(base, ProductRing) or len(base.components) != n:
        raise UnsupportedCarrier(f"{carrier.label} is not a {n}-fold product")
    return base


def _exact_ratio(p, q) -> Fraction:
    if q == 0:
        raise MalformedDescriptor("scaling denominator q must be nonzero")
    return Fraction(p) / Fraction(q)


def named_hom(name: str, carrier: Carrier, target: Carrier | None = None, **params) -> AdditiveMap:
    """The named module / bimodule maps; see module docstring vocabulary."""
    target = carrier if target is None else target
    S = carrier
    if name == "identity":
        emb = _embedder(S, target)
        return AdditiveMap(S, target, emb, name="identity", constructor="identity",
                           role_claim="bimodule_hom" if target.has_left else "module_hom")
    if name == "zero":
        z = target.zero
        return AdditiveMap(S, target, lambda p: z, name="zero", constructor="zero", role_claim="module_hom")
    if name == "negation":
        emb = _embedder(S, target)
        return AdditiveMap(S, target, lambda p: target.neg(emb(p)), name="negation", constructor="negation",
                           role_claim="bimodule_hom")
    if name == "central_scale":
        c = params["c"]
        emb = _embedder(S, target)
        if isinstance(c, Element):
            cp = c.payload
            fn = lambda p: emb(S.mul(cp, p))  # noqa: E731
        else:
            fn = lambda p: target.scale(emb(p), c)  # noqa: E731
        return AdditiveMap(S, target, fn, name=f"central_scale({_show_param(c)})", constructor="central_scale",
                           params={"c": c}, role_claim="bimodule_hom")
    if name == "left_mult":
        c = params["c"]
        cp = as_element(S.ring, c).payload if not isinstance(c, Element) else c.payload
        if S.is_ring:
            fn = lambda p: S.mul(cp, p)  # noqa: E731
        elif isinstance(S, ModuleCarrier) and S.action == "regular":
            fn = lambda p: S.base.mul(cp, p)  # noqa: E731
        else:
            raise UnsupportedCarrier(f"left multiplication is undefined on {S.label}")
        return AdditiveMap(S, S, fn, name=f"left_mult({S.ring.show(cp)})", constructor="left_mult",
                           params={"c": S.ring.elem(cp)}, role_claim="module_hom")
    if name == "right_mult":
        B0 = params["B0"]
        bp = as_element(S, B0).payload
        emb = _embedder(S, target)
        return AdditiveMap(S, target, lambda p: emb(S.mul(p, bp)), name=f"right_mult({S.show(bp)})",
                           constructor="right_mult", params={"B0": S.elem(bp)},
                           role_claim="jordan_df_derivation")

    # pair maps on two-component product carriers
    P = _require_product(S)
    a_ring, b_ring = P.components
    if name == "pair_identity":
        return AdditiveMap(S, S, lambda p: p, name="pair_identity", constructor="pair_identity",
                           role_claim="module_hom")
    if name == "pair_scaling":
        p_, q_ = params.get("p", 1), params.get("q", 1)
        top, bot = _exact_ratio(p_, q_), _exact_ratio(1, q_)
        fn = lambda v: (_scale_exact(a_ring, v[0], top), _scale_exact(b_ring, v[1], bot))  # noqa: E731
        return AdditiveMap(S, S, fn, name="pair_scaling", constructor="pair_scaling", params={"p": p_, "q": q_},
                           role_claim="module_hom")
    if name == "project_first":
        return AdditiveMap(S, S, lambda v: (v[0], b_ring.zero), name="project_first", constructor="project_first",
                           role_claim="module_hom")
    if name == "project_scaled":
        p_, q_ = params.get("p", 1), params.get("q", 1)
        top = _exact_ratio(p_, q_)
        fn = lambda v: (_scale_exact(a_ring, v[0], top), b_ring.zero)  # noqa: E731
        return AdditiveMap(S, S, fn, name="project_scaled", constructor="project_scaled",
                           params={"p": p_, "q": q_}, role_claim="module_hom")
    if name == "gamma_mix":
        fn = lambda v: (a_ring.add(a_ring.scale(v[0], 2), a_ring.scale(v[1], 3)), v[0])  # noqa: E731
        return AdditiveMap(S, S, fn, name="gamma_mix", constructor="gamma_mix", role_claim="module_hom")
    if name == "gamma_mix_projected":
        fn = lambda v: (a_ring.add(a_ring.scale(v[0], 2), a_ring.scale(v[1], 3)), b_ring.zero)  # noqa: E731
        return AdditiveMap(S, S, fn, name="gamma_mix_projected", constructor="gamma_mix_projected",
                           role_claim="module_hom")
    raise MalformedDescriptor(f"unknown named map {name!r}")


def _show_param(c) -> str:
    return str(c) if not isinstance(c, Element) else c.carrier.show(c.payload)


def _scale_exact(ring, p, ratio: Fraction):
    """Multiply by an exact rational, refusing to leave an integral domain."""
    try:
        if isinstance(ring, PolynomialRing):
            return ring.canonical(c * ratio for c in p)
        return ring.canonical(p * ratio)
    except NonIntegralScaling:
        raise NonIntegralScaling(f"scaling by {ratio} leaves {ring.label}; use a Rationals-based module") from None


def d_example(name: str, carrier: Carrier, p=1) -> AdditiveMap:
    """The pointwise-defined maps d on the two-component polynomial module:

    d1_ex21: [a; b] -> [a'; b']         d2_ex21: [a; b] -> [p a' + a; b]
    d1_ex23: [a; b] -> [a'; 0]          d2_ex23: [a; b] -> [p a' + a; 0]
    """
    base, comps = _poly_parts(carrier)
    if comps is None or len(comps) != 2:
        raise UnsupportedCarrier(f"{carrier.label} is not a two-component polynomial module")
    A, B = comps
    if name == "d1_ex21":
        fn = lambda v: (A.derivative(v[0]), B.derivative(v[1]))  # noqa: E731
    elif name == "d2_ex21":
        fn = lambda v: (A.add(A.scale(A.derivative(v[0]), p), v[0]), v[1])  # noqa: E731
    elif name == "d1_ex23":
        fn = lambda v: (A.derivative(v[0]), B.zero)  # noqa: E731
    elif name == "d2_ex23":
        fn = lambda v: (A.add(A.scale(A.derivative(v[0]), p), v[0]), B.zero)  # noqa: E731
    else:
        raise MalformedDescriptor(f"unknown example map {name!r}")
    return AdditiveMap(carrier, carrier, fn, name=name, constructor="d_example",
                       params={"name": name, "p": p}, role_claim="df_derivation")


# ---------------------------------------------------------------------------
# quotient projection


def natural_projection(quotient: Carrier) -> AdditiveMap:
    if not isinstance(quotient, (QuotientRing, QuotientModule)):
        raise UnsupportedCarrier(f"{quotient.label} is not a quotient")
    parent = quotient.parent
    return AdditiveMap(parent, quotient, quotient.canonical, name="projection", constructor="projection",
                       role_claim="module_hom")


# ---------------------------------------------------------------------------
# algebra of maps


def map_compose(outer: AdditiveMap, inner: AdditiveMap, name: str | None = None) -> AdditiveMap:
    if inner.target is not outer.source:
        raise CarrierMismatch(f"cannot compose {outer.name} after {inner.name}: "
                              f"{inner.target.label} != {outer.source.label}")
    fo, fi = outer.apply, inner.apply
    return AdditiveMap(inner.source, outer.target, lambda p: fo(fi(p)), name=name or f"{outer.name}{inner.name}",
                       constructor="compose", params={"outer": outer.name, "inner": inner.name})


def map_add(a: AdditiveMap, b: AdditiveMap, name: str | None = None) -> AdditiveMap:
    if a.source is not b.source or a.target is not b.target:
        raise CarrierMismatch(f"cannot add {a.name} and {b.name}: different source or target")
    T = a.target
    fa, fb = a.apply, b.apply
    return AdditiveMap(a.source, T, lambda p: T.add(fa(p), fb(p)), name=name or f"({a.name}+{b.name})",
                       constructor="sum", params={"left": a.name, "right": b.name})


def map_negate(a: AdditiveMap, name: str | None = None) -> AdditiveMap:
    T = a.target
    fa = a.apply
    return AdditiveMap(a.source, T, lambda p: T.neg(fa(p)), name=name or f"-{a.name}", constructor="negate",
                       params={"map": a.name})


def is_zero_map(m: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE) -> bool:
    if m.source.finite:
        return bool((m.table() == m.target.tables.zero).all())
    return all(m.target.is_zero(m.apply(p)) for (p,) in probe_tuples([m.source], probe))


def maps_equal(a: AdditiveMap, b: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE):
    """(equal, first disagreeing input or None, strategy)."""
    if a.source is not b.source or a.target is not b.target:
        raise CarrierMismatch(f"{a.name} and {b.name} have different source or target")
    S = a.source
    if S.finite:
        ta, tb = a.table(), b.table()
        bad = np.flatnonzero(ta != tb)
        if bad.size:
            return False, S.elem(S.payloads[bad[0]]), "exhaustive"
        return True, None, "exhaustive"
    for (p,) in probe_tuples([S], probe):
        if a.apply(p) != b.apply(p):
            return False, S.elem(p), "probe-complete"
    return True, None, "probe-complete"
