"""Law checkers producing witness-bearing reports.

A law is a function of input elements returning ``(lhs, rhs)``. On finite
carriers it is evaluated once over the full input grid with index tables
(:class:`~dfderiv.carriers.Batch`); on symbolic carriers it is evaluated on
the deterministic probe set.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .carriers import Batch, Carrier, Element
from .errors import PrereqFailed
from .maps import AdditiveMap
from .probe import DEFAULT_PROBE, ProbeSpec, probe_tuples

MAX_WITNESSES = 5


@dataclass
class Witness:
    inputs: tuple
    lhs: Element
    rhs: Element
    law: str = ""

    @property
    def residual(self) -> Element:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        d = {
            "inputs": [x.encode() for x in self.inputs],
            "lhs": self.lhs.encode(),
            "rhs": self.rhs.encode(),
            "residual": self.residual.encode(),
            "shown": {"inputs": [str(x) for x in self.inputs], "lhs": str(self.lhs), "rhs": str(self.rhs),
                      "residual": str(self.residual)},
        }
        if self.law:
            d["law"] = self.law
        return d


@dataclass
class VerificationReport:
    check: str
    strategy: str  # exhaustive | probe-complete
    verdict: str  # pass | fail
    witnesses: list = field(default_factory=list)
    count: int = 0
    failures: int = 0
    elapsed_s: float = 0.0
    prereqs: list = field(default_factory=list)
    subject: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = {
            "check": self.check,
            "subject": self.subject,
            "strategy": self.strategy,
            "verdict": self.verdict,
            "count": self.count,
            "failures": self.failures,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "elapsed_s": self.elapsed_s,
        }
        if self.prereqs:
            d["prereqs"] = [{"check": p.check, "subject": p.subject, "verdict": p.verdict} for p in self.prereqs]
        return d


def merge_reports(check: str, subject: str, parts: Sequence[VerificationReport]) -> VerificationReport:
    ws = [w for p in parts for w in p.witnesses][:MAX_WITNESSES]
    return VerificationReport(
        check=check,
        subject=subject,
        strategy=parts[0].strategy if all(p.strategy == parts[0].strategy for p in parts) else "probe-complete",
        verdict="pass" if all(p.passed for p in parts) else "fail",
        witnesses=ws,
        count=sum(p.count for p in parts),
        failures=sum(p.failures for p in parts),
        elapsed_s=sum(p.elapsed_s for p in parts),
    )


def evaluate_law(
    check: str,
    spaces: Sequence[Carrier],
    law: Callable,
    *,
    probe: ProbeSpec = DEFAULT_PROBE,
    focus: Sequence[tuple] = (),
    where: Callable | None = None,
    with_sums: bool = False,
    subject: str = "",
    law_name: str = "",
    max_witnesses: int = MAX_WITNESSES,
) -> VerificationReport:
    """Run ``law`` over all inputs (finite) or the probe set (symbolic).

    ``where`` filters the input space (a hypothesis); ``focus`` inputs are
    evaluated first on symbolic carriers.
    """
    t0 = time.perf_counter()
    witnesses: list[Witness] = []
    if all(c.finite for c in spaces):
        arity = len(spaces)
        xs = [Batch.axis(c, i, arity) for i, c in enumerate(spaces)]
        lhs, rhs = law(*xs)
        shape = tuple(c.tables.size for c in spaces)
        bad = np.broadcast_to(lhs.idx != rhs.idx, shape)
        if where is not None:
            mask = np.broadcast_to(where(*xs), shape)
            bad = bad & mask
            count = int(mask.sum())
        else:
            count = int(np.prod(shape))
        flat = np.flatnonzero(bad)
        lhs_full = np.broadcast_to(lhs.idx, shape)
        rhs_full = np.broadcast_to(rhs.idx, shape)
        for f in flat[:max_witnesses]:
            pos = np.unravel_index(f, shape)
            inputs = tuple(Element(c, c.tables.payloads[int(k)]) for c, k in zip(spaces, pos))
            witnesses.append(Witness(inputs, Element(lhs.carrier, lhs.carrier.tables.payloads[int(lhs_full[pos])]),
                                     Element(rhs.carrier, rhs.carrier.tables.payloads[int(rhs_full[pos])]),
                                     law_name))
        failures = int(flat.size)
        strategy = "exhaustive"
    else:
        count = failures = 0
        tuples = [tuple(x.payload if isinstance(x, Element) else c.canonical(x) for c, x in zip(spaces, t))
                  for t in focus]
        for payloads in _chain(tuples, probe_tuples(list(spaces), probe, with_sums=with_sums)):
            inputs = tuple(Element(c, p) for c, p in zip(spaces, payloads))
            if where is not None and not where(*inputs):
                continue
            count += 1
            lhs, rhs = law(*inputs)
            if lhs != rhs:
                failures += 1
                if len(witnesses) < max_witnesses:
                    witnesses.append(Witness(inputs, lhs, rhs, law_name))
        strategy = "probe-complete"
    return VerificationReport(check, strategy, "fail" if failures else "pass", witnesses, count, failures,
                              time.perf_counter() - t0, subject=subject)


def _chain(first, rest):
    yield from first
    yield from rest


def _cached(m: AdditiveMap, key, compute):
    if key not in m._cache:
        m._cache[key] = compute()
    return m._cache[key]


def _require(report: VerificationReport, what: str) -> VerificationReport:
    if not report.passed:
        raise PrereqFailed(f"prerequisite failed: {what} ({report.check} on {report.subject})", report=report)
    return report


# ---------------------------------------------------------------------------
# individual laws


def check_additive(m: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE) -> VerificationReport:
    def compute():
        X = m.source
        return evaluate_law("additive", [X, X], lambda a, b: (m(a + b), m(a) + m(b)), probe=probe,
                            subject=m.name)

    return _cached(m, ("additive", probe), compute)


def check_derivation(delta: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE) -> VerificationReport:
    def compute():
        R = delta.source
        pre = _require(check_additive(delta, probe), f"{delta.name} additive")
        if delta.target is not R or not R.is_ring:
            raise PrereqFailed(f"{delta.name} is not a self-map of a ring")
        rep = evaluate_law("derivation", [R, R], lambda a, b: (delta(a * b), delta(a) * b + a * delta(b)),
                           probe=probe, subject=delta.name)
        rep.prereqs = [pre]
        return rep

    return _cached(delta, ("derivation", probe), compute)


def check_module_hom(f: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE) -> VerificationReport:
    def compute():
        X, Y = f.source, f.target
        pre = _require(check_additive(f, probe), f"{f.name} additive")
        if X.ring is not Y.ring:
            raise PrereqFailed(f"{f.name}: source and target are modules over different rings")
        rep = evaluate_law("module_hom", [X, X.ring], lambda m, r: (f(m * r), f(m) * r), probe=probe,
                           subject=f.name)
        rep.prereqs = [pre]
        return rep

    return _cached(f, ("module_hom", probe), compute)


def check_bimodule_hom(f: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE) -> VerificationReport:
    def compute():
        X = f.source
        right = check_module_hom(f, probe)
        left = evaluate_law("bimodule_hom", [X.ring, X], lambda r, m: (f(r * m), r * f(m)), probe=probe,
                            subject=f.name, law_name="left")
        for w in right.witnesses:
            w.law = w.law or "right"
        rep = merge_reports("bimodule_hom", f.name, [right, left])
        rep.prereqs = right.prereqs
        return rep

    return _cached(f, ("bimodule_hom", probe), compute)


def check_endomorphism(m: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE,
                       focus: Sequence[tuple] = ()) -> VerificationReport:
    X = m.source
    if m.target is not X:
        return VerificationReport("endomorphism", "exhaustive" if X.finite else "probe-complete", "fail",
                                  subject=m.name)
    pre = _require(check_additive(m, probe), f"{m.name} additive")
    rep = evaluate_law("endomorphism", [X, X.ring], lambda x, r: (m(x * r), m(x) * r), probe=probe,
                       focus=focus, subject=m.name)
    rep.prereqs = [pre]
    return rep


def df_law(d: AdditiveMap, delta: AdditiveMap, f: AdditiveMap):
    return lambda x, a: (d(x * a), d(x) * a + f(x) * delta(a))


def check_df_derivation(d: AdditiveMap, delta: AdditiveMap, f: AdditiveMap, probe: ProbeSpec = DEFAULT_PROBE,
                        *, focus: Sequence[tuple] = (), require_leibniz: bool = True) -> VerificationReport:
    """d(xa) = d(x)a + f(x)δ(a). With ``require_leibniz=False`` δ need only be
    additive (used for composites δ₁δ₂, which are generally not derivations)."""
    X = d.source
    prereqs = [_require(check_additive(d, probe), f"{d.name} additive")]
    if require_leibniz:
        prereqs.append(_require(check_derivation(delta, probe), f"{delta.name} derivation"))
    else:
        prereqs.append(_require(check_additive(delta, probe), f"{delta.name} additive"))
    prereqs.append(_require(check_module_hom(f, probe), f"{f.name} module homomorphism"))
    if delta.source is not X.ring:
        raise PrereqFailed(f"{delta.name} does not act on the ring of {X.label}")
    rep = evaluate_law("df_derivation", [X, X.ring], df_law(d, delta, f), probe=probe, focus=focus,
                       subject=d.name)
    rep.prereqs = prereqs
    return rep


def jordan_law(D: AdditiveMap, delta: AdditiveMap, f: AdditiveMap):
    return lambda x: (D(x * x), D(x) * x + f(x) * delta(x))


def check_jordan_df_derivation(D: AdditiveMap, delta: AdditiveMap, f: AdditiveMap,
                               probe: ProbeSpec = DEFAULT_PROBE, *, focus: Sequence[tuple] = ()) -> VerificationReport:
    """D(x²) = D(x)x + f(x)δ(x) for all x."""
    S = D.source
    prereqs = [
        _require(check_additive(D, probe), f"{D.name} additive"),
        _require(check_derivation(delta, probe), f"{delta.name} derivation"),
        _require(check_bimodule_hom(f, probe), f"{f.name} bimodule homomorphism"),
    ]
    rep = evaluate_law("jordan_df_derivation", [S], jordan_law(D, delta, f), probe=probe, focus=focus,
                       with_sums=True, subject=D.name)
    rep.prereqs = prereqs
    return rep
