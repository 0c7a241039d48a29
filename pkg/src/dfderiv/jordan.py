"""Jordan product and action, the bracket x^y, and residual evaluators for the
identities satisfied by Jordan (δ,f)-derivations.

Every evaluator works on :class:`Element` inputs and equally on
:class:`Batch` inputs (whole input grids at once).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .carriers import Batch, Carrier, Element
from .checks import (
    VerificationReport,
    check_additive,
    check_bimodule_hom,
    check_derivation,
    evaluate_law,
    _require,
)
from .errors import CarrierMismatch, HypothesisUnmet, UnknownLemma
from .maps import AdditiveMap
from .probe import DEFAULT_PROBE, ProbeSpec


def jordan_product(a, b):
    """a • b = ab + ba."""
    if a.carrier is not b.carrier or not a.carrier.is_ring:
        raise CarrierMismatch("Jordan product needs two elements of one algebra")
    return a * b + b * a


def jordan_action(m, s):
    """m •′ s = ms + sm (and s •′ m is the same element)."""
    if m.carrier.is_ring and not s.carrier.is_ring:
        m, s = s, m
    if s.carrier is not m.carrier.ring:
        raise CarrierMismatch("Jordan action needs a bimodule element and an algebra element")
    return m * s + s * m


@dataclass
class BracketContext:
    D: AdditiveMap
    delta: AdditiveMap
    f: AdditiveMap
    name: str = "ctx"
    _P: object = field(default=None, repr=False)

    @property
    def S(self) -> Carrier:
        return self.D.source

    @property
    def M(self) -> Carrier:
        return self.D.target

    def validate(self, probe: ProbeSpec = DEFAULT_PROBE) -> list[VerificationReport]:
        if self.delta.source is not self.S or self.f.source is not self.S or self.f.target is not self.M:
            raise CarrierMismatch("D, δ, f do not share source algebra and target bimodule")
        return [
            _require(check_additive(self.D, probe), f"{self.D.name} additive"),
            _require(check_derivation(self.delta, probe), f"{self.delta.name} derivation"),
            _require(check_bimodule_hom(self.f, probe), f"{self.f.name} bimodule homomorphism"),
        ]

    def describe(self) -> dict:
        return {"name": self.name, "D": self.D.describe(), "delta": self.delta.describe(), "f": self.f.describe()}


def bracket(ctx: BracketContext, x, y):
    """x^y = D(xy) − D(x)y − f(x)δ(y)."""
    D, d, f = ctx.D, ctx.delta, ctx.f
    return D(x * y) - D(x) * y - f(x) * d(y)


def jordan_action_residual(ctx: BracketContext, x, y):
    """D(x • y) − D(x) •′ y − f(x) •′ δ(y)."""
    D, d, f = ctx.D, ctx.delta, ctx.f
    Dx, fx, dy = D(x), f(x), d(y)
    return D(x * y + y * x) - (Dx * y + y * Dx) - (fx * dy + dy * fx)


def check_jordan_action_law(ctx: BracketContext, probe: ProbeSpec = DEFAULT_PROBE) -> VerificationReport:
    S = ctx.S
    r = evaluate_law("jordan_action_law", [S, S], lambda x, y: _vs_zero(jordan_action_residual(ctx, x, y)),
                     probe=probe, subject=ctx.name)
    return r


def _vs_zero(v):
    return v, v * 0


# ---------------------------------------------------------------------------
# lemma residuals


def _commutes(x, y):
    return (x * y - y * x).is_zero()


def _annihilates(x, y):
    return (x * y).is_zero()


def _r31(c, x):
    return c.D(x * x) - c.D(x) * x - c.f(x) * c.delta(x)


def _r32(c, x, y):
    D, d, f = c.D, c.delta, c.f
    return D(y) * x + f(y) * d(x) - y * D(x) - d(y) * f(x)


def _r33(c, x, y):
    D, d, f = c.D, c.delta, c.f
    fx = f(x)
    return D(x * y * x) - D(x) * y * x - fx * d(y) * x - fx * y * d(x)


def _r34(c, x, y, z):
    D, d, f = c.D, c.delta, c.f
    fx, fz, dy = f(x), f(z), d(y)
    rhs = D(x) * y * z + D(z) * y * x + fx * dy * z + fz * dy * x + fx * y * d(z) + fz * y * d(x)
    return D(x * y * z + z * y * x) - rhs


def _r35(c, x, y):
    return bracket(c, x, y) * (x * y - y * x)


def _r36a(c, x, y, z):
    return bracket(c, x, y) * (z * y - y * z) + bracket(c, z, y) * (x * y - y * x)


def _r36b(c, x, y, z):
    return bracket(c, x, y) * (z * x - x * z) + bracket(c, z, x) * (y * x - x * y)


def _r37(c, x, y):
    return bracket(c, x, y)


def _r38(c, x, y):
    return c.D(x) * y + c.f(x) * c.delta(y)


def _r39(c, x, y, z):
    yx = y * x
    return c.D(yx * z) - c.D(yx) * z - c.f(yx) * c.delta(z)


def _c331(c, x, y):
    D, d, f = c.D, c.delta, c.f
    base = D(y * x) - D(y) * x
    return base - d(y) * f(x), base - f(y) * d(x)


def _r314(c, x, y, z, w):
    return bracket(c, y, x) * (z * w - w * z)


def _t_additivity(c, x, y, z):
    return bracket(c, x, y + z) - bracket(c, x, y) - bracket(c, x, z)


def _t_antisymmetry(c, x, y):
    return bracket(c, x, y) + bracket(c, y, x)


@dataclass(frozen=True)
class Lemma:
    id: str
    arity: int
    residual: Callable
    description: str
    hypothesis: Callable | None = None  # (ctx, *inputs) -> bool / bool array
    hypothesis_text: str = ""
    context_hypothesis: str | None = None  # whole-context precondition
    with_sums: bool = False
    parts: tuple = ("residual",)


def _in_P(ctx, *elems):
    return all_true(ctx_in_P(ctx, e) for e in elems)


def all_true(vals):
    out = None
    for v in vals:
        out = v if out is None else (out & v)
    return out


def ctx_in_P(ctx: BracketContext, e):
    """Membership in {x : x^a = 0 for all a}: exact mask on finite carriers,
    probe-complete on symbolic ones."""
    if isinstance(e, Batch):
        if ctx._P is None:
            from .structure import P_set

            T = ctx.S.tables
            import numpy as np

            mask = np.zeros(T.size, dtype=bool)
            for p in P_set(ctx.D, ctx.delta, ctx.f):
                mask[T.index[p.payload]] = True
            ctx._P = mask
        return ctx._P[e.idx]
    from .probe import probe_tuples

    cache = ctx.__dict__.setdefault("_P_probe", {})
    if e.payload not in cache:
        S = ctx.S
        cache[e.payload] = all(bracket(ctx, e, Element(S, a)).is_zero()
                               for (a,) in probe_tuples([S], DEFAULT_PROBE))
    return cache[e.payload]


LEMMAS: dict[str, Lemma] = {
    lem.id: lem
    for lem in [
        Lemma("L31", 1, _r31, "D(x²) − D(x)x − f(x)δ(x) under the Jordan-action law",
              context_hypothesis="jordan_action_law", with_sums=True),
        Lemma("L32", 2, _r32, "D(y)x + f(y)δ(x) − yD(x) − δ(y)f(x)",
              context_hypothesis="jordan_action_law", with_sums=True),
        Lemma("L33", 2, _r33, "D(xyx) − D(x)yx − f(x)δ(y)x − f(x)yδ(x)", with_sums=True),
        Lemma("L34", 3, _r34, "D(xyz+zyx) minus its six-term expansion"),
        Lemma("L35", 2, _r35, "x^y (xy − yx)", with_sums=True),
        Lemma("L36a", 3, _r36a, "x^y (zy − yz) + z^y (xy − yx)", with_sums=True),
        Lemma("L36b", 3, _r36b, "x^y (zx − xz) + z^x (yx − xy)", with_sums=True),
        Lemma("L37", 2, _r37, "x^y for commuting x, y", lambda c, x, y: _commutes(x, y), "xy = yx",
              with_sums=True),
        Lemma("L38", 2, _r38, "D(x)y + f(x)δ(y) when xy = 0", lambda c, x, y: _annihilates(x, y), "xy = 0"),
        Lemma("L39", 3, _r39, "D((yx)z) − D(yx)z − f(yx)δ(z) when xy = 0",
              lambda c, x, y, z: _annihilates(x, y), "xy = 0"),
        Lemma("C331", 2, _c331, "D(yx) − D(y)x − [δ(y)f(x) | f(y)δ(x)] when xy = 0",
              lambda c, x, y: _annihilates(x, y), "xy = 0", parts=("statement_form", "proof_form")),
        Lemma("L314", 4, _r314, "y^x (zw − wz) for z, w in P", lambda c, x, y, z, w: _in_P(c, z, w),
              "z, w in P"),
        Lemma("T331_additivity", 3, _t_additivity, "x^(y+z) − x^y − x^z"),
        Lemma("T331_antisymmetry", 2, _t_antisymmetry, "x^y + y^x", with_sums=True),
    ]
}


def get_lemma(lemma_id: str) -> Lemma:
    try:
        return LEMMAS[lemma_id]
    except KeyError:
        raise UnknownLemma(f"unknown lemma id {lemma_id!r}; known: {', '.join(LEMMAS)}") from None


def lemma_residual(ctx: BracketContext, lemma_id: str, *inputs):
    """Residual element(s) of a lemma at concrete inputs (zero iff it holds)."""
    lem = get_lemma(lemma_id)
    if len(inputs) != lem.arity:
        raise ValueError(f"{lemma_id} takes {lem.arity} inputs, got {len(inputs)}")
    inputs = tuple(x if isinstance(x, Element) else ctx.S.elem(x) for x in inputs)
    for x in inputs:
        if x.carrier is not ctx.S:
            raise CarrierMismatch(f"{x!r} is not in {ctx.S.label}")
    if lem.hypothesis is not None and not lem.hypothesis(ctx, *inputs):
        raise HypothesisUnmet(f"{lemma_id} requires {lem.hypothesis_text}")
    return lem.residual(ctx, *inputs)


def lemma_reports(ctx: BracketContext, lemma_id: str, probe: ProbeSpec = DEFAULT_PROBE) -> list[VerificationReport]:
    """Evaluate a lemma over its hypothesis-filtered input space (exhaustive
    on finite carriers, probe set otherwise); one report per residual part."""
    lem = get_lemma(lemma_id)
    S = ctx.S
    where = None if lem.hypothesis is None else (lambda *xs: lem.hypothesis(ctx, *xs))
    if lem.id == "L314" and S.finite:
        return [_l314_exhaustive(ctx)]
    out = []
    for k, part in enumerate(lem.parts):
        if len(lem.parts) == 1:
            law = lambda *xs: _vs_zero(lem.residual(ctx, *xs))  # noqa: E731
        else:
            law = lambda *xs, k=k: _vs_zero(lem.residual(ctx, *xs)[k])  # noqa: E731
        name = lem.id if len(lem.parts) == 1 else f"{lem.id}:{part}"
        out.append(evaluate_law(name, [S] * lem.arity, law, probe=probe, where=where, with_sums=lem.with_sums,
                                subject=ctx.name))
    return out


def _l314_exhaustive(ctx: BracketContext) -> VerificationReport:
    """y^x (zw − wz) over all x, y and z, w in P, evaluated through the sets
    of distinct bracket values and distinct commutator values (the residual
    depends on the inputs only through these two values)."""
    import time

    import numpy as np

    from .checks import Witness

    t0 = time.perf_counter()
    S, M = ctx.S, ctx.M
    TS, TM = S.tables, M.tables
    x = Batch.axis(S, 0, 2)
    y = Batch.axis(S, 1, 2)
    br = bracket(ctx, y, x).idx  # br[x, y] = y^x
    pmask = ctx_in_P(ctx, Batch(S, np.arange(TS.size)))
    P = np.flatnonzero(pmask)
    comm = TS.sub[TS.mul[np.ix_(P, P)], TS.mul[np.ix_(P, P)].T]  # comm[i, j] = z w − w z
    bvals, bpos = np.unique(br.ravel(), return_index=True)
    cvals, cpos = np.unique(comm.ravel(), return_index=True)
    prod = TM.act[np.ix_(bvals, cvals)]
    bad = np.argwhere(prod != TM.zero)
    witnesses = []
    for bi, ci in bad[:5]:
        xi, yi = np.unravel_index(bpos[bi], br.shape)
        zi, wi = np.unravel_index(cpos[ci], comm.shape)
        inputs = tuple(Element(S, TS.payloads[int(k)]) for k in (xi, yi, P[zi], P[wi]))
        witnesses.append(Witness(inputs, Element(M, TM.payloads[int(prod[bi, ci])]), Element(M, M.zero)))
    count = TS.size ** 2 * P.size ** 2
    return VerificationReport("L314", "exhaustive", "fail" if bad.size else "pass", witnesses, count,
                              int(len(bad)), time.perf_counter() - t0, subject=ctx.name)
