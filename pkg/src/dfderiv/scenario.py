"""Scenario files: parsing, reference resolution, task execution, and report
assembly.

A scenario is a JSON document declaring carriers, substructures, maps, and an
ordered task list. Every task yields a result dict with a ``verdict``; an
optional ``expect`` block maps dotted paths into that result to exact values.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import enumeration, oracles, structure
from .carriers import (
    Carrier,
    CarrierDescriptor,
    Element,
    Substructure,
    from_members,
    generated,
    make_carrier,
    predicate_substructure,
    whole,
    zero_substructure,
)
from .checks import (
    VerificationReport,
    check_additive,
    check_bimodule_hom,
    check_derivation,
    check_df_derivation,
    check_endomorphism,
    check_jordan_df_derivation,
    check_module_hom,
)
from .errors import (
    DerivError,
    HypothesisFailed,
    MalformedDescriptor,
    ParseError,
    PrereqFailed,
    ResolveError,
    ValidationError,
)
from .jordan import BracketContext, check_jordan_action_law
from .maps import (
    AdditiveMap,
    d_example,
    formal_derivative,
    inner_derivation,
    map_add,
    map_compose,
    map_negate,
    named_hom,
    natural_projection,
    scaled_derivative,
    table_map,
    table_pairs,
)
from .probe import ProbeSpec, probe_tuples
from .scalars import ScalarDomain

REPORT_SCHEMA_ID = "dfderiv-report/1"
NAMED_HOMS = ("identity", "zero", "negation", "central_scale", "left_mult", "right_mult", "pair_identity",
              "pair_scaling", "project_first", "project_scaled", "gamma_mix", "gamma_mix_projected")
CONSTRUCTORS = NAMED_HOMS + ("formal_derivative", "scaled_derivative", "inner_derivation", "d_example",
                             "projection", "induced_derivation", "table", "expr")
VERB_TASKS = {
    "verify": ("check", "evaluate", "image_in", "structure"),
    "oracle": ("oracle", "lemma_suite"),
    "enumerate": ("enumerate",),
}
ORACLE_HYPOTHESES = {
    "posner_composition": ("prime_ring", "prime_module", "two_torsion_free"),
    "posner_ring": ("prime_ring", "prime_module", "two_torsion_free"),
    "creedon": ("prime_submodule", "quotient_two_torsion_free"),
    "jordan_implies_derivation": ("prime_algebra", "two_torsion_free", "jointly_prime"),
}
STRUCTURE_PREDICATES = ("two_torsion_free", "faithful", "prime_ring", "prime_ideal", "prime_submodule",
                        "prime_module", "jointly_prime", "prime_algebra", "center", "colon_ideal",
                        "right_annihilator")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("dfderiv").joinpath("schemas", name).read_text(encoding="utf-8"))


def shipped_scenarios() -> list[str]:
    d = resources.files("dfderiv").joinpath("scenarios")
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".json"))


def shipped_path(name: str) -> Path:
    return Path(str(resources.files("dfderiv").joinpath("scenarios", f"{name}.json")))


# ---------------------------------------------------------------------------
# scenario object


@dataclass
class Options:
    seed: int | None = None
    probe_degree: int | None = None
    budget: int | None = None
    partitions: int = 1
    verb: str = "run"


@dataclass
class Scenario:
    name: str
    description: str
    seed: int
    probe: ProbeSpec
    carriers: dict
    substructures: dict
    maps: dict
    tasks: list
    base_dir: Path
    doc: dict = field(repr=False, default_factory=dict)

    def carrier(self, ref: str, where: str = "") -> Carrier:
        if ref in self.carriers:
            return self.carriers[ref]
        raise ResolveError(f"undeclared carrier {ref!r}" + (f" at {where}" if where else ""), ref=ref)

    def substructure(self, ref, where: str = "") -> Substructure:
        if isinstance(ref, str):
            if ref in self.substructures:
                return self.substructures[ref]
            raise ResolveError(f"undeclared substructure {ref!r}" + (f" at {where}" if where else ""), ref=ref)
        if isinstance(ref, dict) and set(ref) == {"colon"}:
            return structure.colon_ideal(self.substructure(ref["colon"], where), probe=self.probe)
        raise ParseError(f"bad substructure reference {ref!r} at {where}")

    def map(self, expr, where: str = "") -> AdditiveMap:
        return resolve_map_expr(self, expr, where)


def _loc(doc_text: str, err: json.JSONDecodeError) -> str:
    return f"line {err.lineno}, column {err.colno}"


def parse_scenario(path, options: Options | None = None) -> Scenario:
    """Read, schema-validate, and fully resolve a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"{path}: no such scenario file") from None
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not UTF-8 ({e})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg} at {_loc(text, e)}", line=e.lineno, column=e.colno) from None
    return build_scenario(doc, options, base_dir=path.parent, source=str(path))


def build_scenario(doc: dict, options: Options | None = None, base_dir: Path | None = None,
                   source: str = "<scenario>") -> Scenario:
    options = options or Options()
    validator = jsonschema.Draft202012Validator(load_schema("scenario.schema.json"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "(top level)"
        raise ParseError(f"{source}: {where}: {e.message}", field=where)
    seed = options.seed if options.seed is not None else doc.get("seed", 0)
    pj = dict(doc.get("probe", {}))
    probe = ProbeSpec(
        max_degree=options.probe_degree if options.probe_degree is not None else pj.get("max_degree", 8),
        coefficients=tuple(pj.get("coefficients", (-2, -1, 0, 1, 2))),
        random_samples=pj.get("random_samples", 200),
        seed=seed if options.seed is not None or "seed" not in pj else pj["seed"],
    )
    sc = Scenario(doc["scenario"], doc.get("description", ""), seed, probe, {}, {}, {}, list(doc.get("tasks", [])),
                  base_dir or Path("."), doc)
    _resolve_declarations(sc, doc)
    _resolve_tasks(sc)
    return sc


# ---------------------------------------------------------------------------
# declarations


def _scalar(v):
    """Exact scalar parameter: int or [numerator, denominator]."""
    if isinstance(v, list):
        return Fraction(v[0], v[1])
    return v


def _resolve_declarations(sc: Scenario, doc: dict) -> None:
    carriers = {c["id"]: c for c in doc.get("carriers", [])}
    subs = {s["id"]: s for s in doc.get("substructures", [])}
    maps = {m["id"]: m for m in doc.get("maps", [])}
    for ids, what in ((carriers, "carrier"), (subs, "substructure"), (maps, "map")):
        if len(ids) != len(doc.get(what + "s", [])):
            raise ParseError(f"duplicate {what} id")
    clash = (set(carriers) & set(subs)) | (set(carriers) & set(maps)) | (set(subs) & set(maps))
    if clash:
        raise ParseError(f"id used for two declarations: {sorted(clash)[0]!r}")
    building: set = set()

    def carrier(ref, where):
        if ref in sc.carriers:
            return sc.carriers[ref]
        if ref not in carriers:
            raise ResolveError(f"undeclared carrier {ref!r} at {where}", ref=ref)
        if ref in building:
            raise ResolveError(f"cyclic reference through {ref!r}", ref=ref)
        building.add(ref)
        d = carriers[ref]
        here = f"carriers.{ref}"
        con = dict(d["construction"])
        if con.get("type") == "QuotientRing":
            con["ring"] = carrier(con["ring"], here)
            con["ideal"] = sub(con["ideal"], here)
        elif con.get("type") == "QuotientModule":
            con["module"] = carrier(con["module"], here)
            con["submodule"] = sub(con["submodule"], here)
        facts = d.get("declared_facts", {})
        if isinstance(facts, list):
            facts = {k: "declared in scenario" for k in facts}
        desc = CarrierDescriptor(
            ref, d["kind"], con,
            ring=carrier(d["ring"], here) if "ring" in d else None,
            action=d.get("action"),
            scalar_action=ScalarDomain.from_json(d["scalar_action"]) if "scalar_action" in d else None,
            declared_facts=facts,
        )
        try:
            c = make_carrier(desc)
        except DerivError as e:
            if e.exit_code == 3:
                raise ValidationError(f"{here}: {e}", cause=e) from None
            raise ParseError(f"{here}: {e}") from None
        sc.carriers[ref] = c
        building.discard(ref)
        return c

    def sub(ref, where):
        if ref in sc.substructures:
            return sc.substructures[ref]
        if ref not in subs:
            raise ResolveError(f"undeclared substructure {ref!r} at {where}", ref=ref)
        if ref in building:
            raise ResolveError(f"cyclic reference through {ref!r}", ref=ref)
        building.add(ref)
        d = subs[ref]
        here = f"substructures.{ref}"
        kind, sid = d.get("kind", "submodule"), d.get("sidedness")
        try:
            if "colon" in d:
                s = structure.colon_ideal(sub(d["colon"], here), probe=sc.probe)
                s.name = ref
            elif "annihilator" in d:
                s = structure.right_annihilator(carrier(d["annihilator"], here))
                s.name = ref
            else:
                P = carrier(d["parent"], here)
                if "predicate" in d:
                    s = predicate_substructure(P, d["predicate"], kind, sid, name=ref, probe=sc.probe)
                elif "generators" in d:
                    s = generated(P, [P.element(g).payload for g in d["generators"]], kind, sid, name=ref)
                elif "members" in d:
                    s = from_members(P, [P.element(g).payload for g in d["members"]], kind, sid, name=ref)
                elif d.get("zero"):
                    s = zero_substructure(P, kind, name=ref)
                elif d.get("whole"):
                    s = whole(P, kind, name=ref)
                else:
                    raise ParseError(f"{here}: needs predicate, generators, members, zero, whole, colon, "
                                     "or annihilator")
        except (ResolveError, ParseError, ValidationError):
            raise
        except DerivError as e:
            raise ParseError(f"{here}: {e}") from None
        sc.substructures[ref] = s
        building.discard(ref)
        return s

    def amap(ref, where):
        if ref in sc.maps:
            return sc.maps[ref]
        if ref not in maps:
            raise ResolveError(f"undeclared map {ref!r} at {where}", ref=ref)
        if ref in building:
            raise ResolveError(f"cyclic reference through {ref!r}", ref=ref)
        building.add(ref)
        try:
            m = _build_map(sc, maps[ref], carrier, sub, amap)
        except (ResolveError, ParseError, ValidationError):
            raise
        except DerivError as e:
            raise ParseError(f"maps.{ref}: {e}") from None
        m.name = ref
        sc.maps[ref] = m
        building.discard(ref)
        return m

    sc._lookup = (carrier, sub, amap)  # lazy resolution for map expressions in tasks
    for ref in carriers:
        carrier(ref, "carriers")
    for ref in subs:
        sub(ref, "substructures")
    for ref in maps:
        amap(ref, "maps")


def _build_map(sc: Scenario, d: dict, carrier, sub, amap) -> AdditiveMap:
    here = f"maps.{d['id']}"
    con = d["constructor"]
    params = dict(d.get("params", {}))
    if con == "expr":
        return resolve_map_expr(sc, d["expr"], here)
    if con == "table":
        S, T = carrier(d["source"], here), carrier(d["target"], here)
        pairs = d.get("pairs")
        if pairs is None:
            pairs = _load_table_file(sc, d, here)
        return table_map(S, T, [(S.element(a).payload, T.element(b).payload) for a, b in pairs], name=d["id"])
    if con == "projection":
        return natural_projection(carrier(d["carrier"], here))
    if con == "induced_derivation":
        return structure.induce_quotient_derivation(amap(params["delta"], here), sub(params["ideal"], here))
    C = carrier(d["carrier"], here)
    T = carrier(d["target"], here) if "target" in d else None
    if con == "formal_derivative":
        return formal_derivative(C)
    if con == "scaled_derivative":
        return scaled_derivative(C, _scalar(params.get("q", 1)))
    if con == "inner_derivation":
        return inner_derivation(C.element(params["B0"]))
    if con == "d_example":
        return d_example(params["name"], C, _scalar(params.get("p", 1)))
    if con in NAMED_HOMS:
        kw = {}
        if "c" in params:
            c = params["c"]
            if con == "left_mult":
                kw["c"] = C.ring.element(c)
            elif isinstance(c, int) or (isinstance(c, list) and len(c) == 2 and all(isinstance(v, int) for v in c)
                                        and not C.finite):
                kw["c"] = _scalar(c)
            else:
                kw["c"] = C.element(c)
        if "B0" in params:
            kw["B0"] = C.element(params["B0"])
        for k in ("p", "q"):
            if k in params:
                kw[k] = _scalar(params[k])
        if kw.get("q") == 0:
            raise ParseError(f"{here}: q must be nonzero")
        return named_hom(con, C, T, **kw)
    raise ParseError(f"{here}: unknown constructor {con!r}")


def _load_table_file(sc: Scenario, d: dict, here: str) -> list:
    p = sc.base_dir / d["file"]
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ResolveError(f"{here}: table file {str(p)!r} not found", ref=d["file"]) from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{p}: {e.msg} at line {e.lineno}, column {e.colno}") from None
    if "maps" in data:
        return data["maps"][d.get("index", 0)]["pairs"]
    return data["pairs"]


def resolve_map_expr(sc: Scenario, expr, where: str = "") -> AdditiveMap:
    """Map id, or {"compose": [outer, ..., inner]}, {"add": [a, b, ...]},
    {"negate": m}, or an inline declaration {"constructor": ...}."""
    _, _, amap = sc._lookup
    if isinstance(expr, str):
        return amap(expr, where)
    if isinstance(expr, dict):
        if "compose" in expr:
            ms = [resolve_map_expr(sc, e, where) for e in expr["compose"]]
            out = ms[-1]
            for m in reversed(ms[:-1]):
                out = map_compose(m, out)
            return out
        if "add" in expr:
            ms = [resolve_map_expr(sc, e, where) for e in expr["add"]]
            out = ms[0]
            for m in ms[1:]:
                out = map_add(out, m)
            return out
        if "negate" in expr:
            return map_negate(resolve_map_expr(sc, expr["negate"], where))
        if "constructor" in expr:
            carrier, sub, amap = sc._lookup
            d = dict(expr)
            d.setdefault("id", d["constructor"])
            m = _build_map(sc, d, carrier, sub, amap)
            return m
    raise ParseError(f"bad map expression {expr!r} at {where}")


# ---------------------------------------------------------------------------
# tasks: reference resolution happens at parse time


_TASK_MAP_FIELDS = ("map", "d", "D", "delta", "f")


def _resolve_tasks(sc: Scenario) -> None:
    ids = set()
    for k, t in enumerate(sc.tasks):
        where = f"tasks[{k}] ({t['id']})"
        if t["id"] in ids:
            raise ParseError(f"{where}: duplicate task id")
        ids.add(t["id"])
        for fld in _TASK_MAP_FIELDS:
            if fld in t:
                sc.map(t[fld], f"{where}.{fld}")
        for fld in ("carrier", "source", "target", "algebra", "bimodule", "R", "M"):
            if fld in t:
                sc.carrier(t[fld], f"{where}.{fld}")
        if "within" in t:
            sc.substructure(t["within"], f"{where}.within")
        if "in" in t:
            sc.substructure(t["in"], f"{where}.in")
        if "L" in t:
            sc.substructure(t["L"], f"{where}.L")
        if t["type"] == "structure" and t["predicate"] not in STRUCTURE_PREDICATES:
            raise ParseError(f"{where}: unknown predicate {t['predicate']!r}")
        if t["type"] == "structure":
            subj = t["subject"]
            if subj not in sc.carriers and subj not in sc.substructures:
                raise ResolveError(f"undeclared subject {subj!r} at {where}.subject", ref=subj)
        for c in t.get("constraints", []):
            for fld in ("delta", "f"):
                if fld in c:
                    sc.map(c[fld], f"{where}.constraints.{fld}")
        for fam in ("deltas", "fs"):
            if isinstance(t.get(fam), list):
                for e in t[fam]:
                    sc.map(e, f"{where}.{fam}")
        for c in t.get("contexts", []) if isinstance(t.get("contexts"), list) else []:
            for fld in ("D", "delta", "f"):
                if fld in c:
                    sc.map(c[fld], f"{where}.contexts.{fld}")
        for ref in t.get("colon_ideal_prime", []):
            sc.carrier(ref, f"{where}.colon_ideal_prime")


# ---------------------------------------------------------------------------
# task runners


class _Run:
    def __init__(self, sc: Scenario, options: Options):
        self.sc = sc
        self.opt = options
        self.instances: dict = {}

    @property
    def probe(self) -> ProbeSpec:
        return self.sc.probe

    def seed_for(self, t: dict) -> int:
        if self.opt.seed is not None:
            return self.opt.seed
        return t.get("seed", self.sc.seed)

    # -- check ------------------------------------------------------------
    def check(self, t: dict) -> dict:
        law = t["law"]
        sc = self.sc
        focus = t.get("focus", [])
        try:
            if law in ("additive", "derivation", "module_hom", "bimodule_hom", "endomorphism"):
                m = sc.map(t["map"])
                if law == "endomorphism":
                    fx = [(m.source.element(a), m.source.ring.element(b)) for a, b in focus]
                    rep = check_endomorphism(m, self.probe, focus=fx)
                else:
                    fn = {"additive": check_additive, "derivation": check_derivation,
                          "module_hom": check_module_hom, "bimodule_hom": check_bimodule_hom}[law]
                    rep = fn(m, self.probe)
            elif law == "df_derivation":
                d, delta, f = sc.map(t["d"]), sc.map(t["delta"]), sc.map(t["f"])
                fx = [(d.source.element(a), d.source.ring.element(b)) for a, b in focus]
                rep = check_df_derivation(d, delta, f, self.probe, focus=fx,
                                          require_leibniz=t.get("require_leibniz", True))
            elif law == "jordan_df_derivation":
                D, delta, f = sc.map(t["D"]), sc.map(t["delta"]), sc.map(t["f"])
                fx = [(D.source.element(a),) for (a,) in focus]
                rep = check_jordan_df_derivation(D, delta, f, self.probe, focus=fx)
            elif law == "jordan_action_law":
                ctx = BracketContext(sc.map(t["D"]), sc.map(t["delta"]), sc.map(t["f"]), t["id"])
                rep = check_jordan_action_law(ctx, self.probe)
            else:
                raise ParseError(f"unknown law {law!r}")
        except PrereqFailed as e:
            out = {"check": law, "verdict": "fail", "prereq_failed": str(e)}
            if e.report is not None:
                out["prereq_report"] = e.report.to_dict()
            return out
        return rep.to_dict()

    # -- evaluate ---------------------------------------------------------
    def evaluate(self, t: dict) -> dict:
        m = self.sc.map(t["map"])
        x = m.source.element(t["input"])
        y = m(x)
        out = {"map": m.name, "input": x.encode(), "value": y.encode(), "shown": str(y),
               "is_zero": m.target.is_zero(y.payload), "verdict": "pass"}
        if "in" in t:
            out["in_substructure"] = self.sc.substructure(t["in"]).contains(y.payload)
        return out

    # -- image containment ------------------------------------------------
    def image_in(self, t: dict) -> dict:
        t0 = time.perf_counter()
        m = self.sc.map(t["map"])
        K = self.sc.substructure(t["within"])
        S = m.source
        if K.parent is not m.target:
            raise MalformedDescriptor(f"{K!r} does not live in the target of {m.name}")
        focus = [S.element(a).payload for a in t.get("focus", [])]
        if S.finite:
            inputs, strategy = S.payloads, "exhaustive"
        else:
            inputs, strategy = (p for (p,) in probe_tuples([S], self.probe)), "probe-complete"
        count = failures = 0
        witnesses = []
        for p in _chain(focus, inputs):
            count += 1
            img = m.apply(p)
            if not K.contains(img):
                failures += 1
                if len(witnesses) < 5:
                    witnesses.append({"input": S.encode(p), "image": m.target.encode(img),
                                      "shown": {"input": S.show(p), "image": m.target.show(img)}})
        return {"check": "image_in", "subject": m.name, "within": K.name or "", "strategy": strategy,
                "verdict": "fail" if failures else "pass", "count": count, "failures": failures,
                "witnesses": witnesses, "elapsed_s": time.perf_counter() - t0}

    # -- structure --------------------------------------------------------
    def structure(self, t: dict) -> dict:
        sc = self.sc
        pred, ref = t["predicate"], t["subject"]
        subj = sc.substructures.get(ref) or sc.carriers.get(ref)
        if pred in ("center", "colon_ideal", "right_annihilator"):
            if pred == "center":
                els = structure.center(subj)
                par = subj
                payloads = [e.payload for e in els]
            else:
                s = structure.colon_ideal(subj, probe=sc.probe) if pred == "colon_ideal" \
                    else structure.right_annihilator(subj)
                if not s.finite:
                    return {"predicate": pred, "subject": ref, "verdict": "pass",
                            "description": _jsonable(s.describe())}
                par, payloads = s.parent, s.payloads()
            return {"predicate": pred, "subject": ref, "verdict": "pass", "size": len(payloads),
                    "elements": [par.encode(p) for p in payloads]}
        fn = {
            "two_torsion_free": structure.is_two_torsion_free,
            "faithful": structure.is_faithful,
            "prime_ring": structure.is_prime_ring,
            "prime_ideal": structure.is_prime_ideal,
            "prime_submodule": structure.is_prime_submodule,
            "prime_module": structure.is_prime_module,
            "jointly_prime": structure.is_jointly_prime,
            "prime_algebra": structure.is_prime_algebra,
        }[pred]
        fact = fn(subj)
        return fact.to_dict()

    # -- enumerate --------------------------------------------------------
    def _constraints(self, t: dict, delta=None, f=None) -> list:
        out = []
        for c in t.get("constraints", []):
            dl = self.sc.map(c["delta"]) if "delta" in c else delta
            ff = self.sc.map(c["f"]) if "f" in c else f
            vals = {}
            if "values" in c:
                S, T = self.sc.carrier(t["source"]), self.sc.carrier(t["target"])
                vals = {S.element(a).payload: T.element(b).payload for a, b in c["values"]}
            out.append(enumeration.Constraint(c["kind"], dl if c["kind"] != "fixed_values" else None,
                                              ff if c["kind"] != "fixed_values" else None, vals))
        return out

    def _enumerate_one(self, t: dict, delta=None, f=None) -> enumeration.EnumerationResult:
        budget = self.opt.budget or t.get("budget", enumeration.DEFAULT_BUDGET)
        cons = self._constraints(t, delta, f)
        method = t.get("method", "pruned")
        S, T = self.sc.carrier(t["source"]), self.sc.carrier(t["target"])
        if method == "closed_form":
            if len(cons) != 1 or cons[0].kind != "df_derivation" or S is not T:
                raise MalformedDescriptor("closed_form enumeration needs one df_derivation constraint on M -> M")
            return enumeration.enumerate_df_derivations(cons[0].delta, cons[0].f, S, budget=budget,
                                                        partitions=self.opt.partitions, name=t["id"])
        spec = enumeration.EnumerationSpec(S, T, cons, budget=budget, parallel_partitions=self.opt.partitions,
                                           keep_tables=True, name=t["id"])
        return enumeration.enumerate_additive_maps(spec)

    @staticmethod
    def _summary(res) -> dict:
        s = res.summary()
        s["digest"] = hashlib.sha256(np.ascontiguousarray(res.tables, dtype=np.int64).tobytes()).hexdigest()
        return s

    def enumerate(self, t: dict) -> dict:
        if "for_each" in t:
            fe = t["for_each"]
            S = self.sc.carrier(t["source"])
            deltas = self.family(fe.get("delta", "identity"), S)
            fs = self.family(fe.get("f", "identity"), S)
            runs = []
            for dl in deltas:
                for f in fs:
                    res = self._enumerate_one(t, dl, f)
                    s = self._summary(res)
                    s["delta"], s["f"] = dl.name, f.name
                    runs.append(s)
            counts = [r["count"] for r in runs]
            return {"verdict": "pass", "runs": runs, "counts": counts, "count_set": sorted(set(counts)),
                    "total": sum(counts)}
        res = self._enumerate_one(t)
        out = self._summary(res)
        out["verdict"] = "pass"
        if "dump" in t:
            path = self.sc.base_dir / t["dump"]
            maps = [{"name": m.name, "pairs": table_pairs(m)} for m in res.maps()]
            path.write_text(json.dumps({"source": t["source"], "target": t["target"], "maps": maps}) + "\n",
                            encoding="utf-8")
            out["dumped"] = len(maps)
        return out

    # -- families / oracles -----------------------------------------------
    def family(self, spec, R: Carrier, M: Carrier | None = None) -> list:
        if isinstance(spec, list):
            return [self.sc.map(e) for e in spec]
        M = M or R
        if spec == "inner_derivations":
            return oracles.inner_derivations(R)
        if spec == "all_derivations":
            return oracles.all_derivations(R, self.opt.partitions)
        if spec == "central_scalings":
            return oracles.central_scalings(R, M)
        if spec == "invertible_left_mults":
            return oracles.invertible_left_mults(R)
        if spec == "identity":
            return [named_hom("identity", M)]
        raise MalformedDescriptor(f"unknown map family {spec!r}")

    def instance(self, t: dict) -> oracles.OracleInstance:
        kind = t["oracle"]
        key = json.dumps({k: t.get(k) for k in ("R", "M", "L", "deltas", "fs", "mode", "samples", "seed",
                                                "hypotheses")}, sort_keys=True) + kind.split("_")[0]
        if key in self.instances:
            return self.instances[key]
        R = self.sc.carrier(t["R"])
        M = self.sc.carrier(t.get("M", t["R"]))
        L = self.sc.substructure(t["L"]) if "L" in t else None
        inst = oracles.OracleInstance(
            t.get("name", f"{kind.split('_')[0]}:{M.label}"), R, M, L,
            self.family(t.get("deltas", "inner_derivations"), R, M),
            self.family(t.get("fs", "identity"), R, M),
            tuple(t.get("hypotheses", ORACLE_HYPOTHESES[kind])),
            t.get("mode", "exhaustive"), t.get("samples", 100_000), self.seed_for(t), self.opt.partitions,
        )
        self.instances[key] = inst
        return inst

    def oracle(self, t: dict) -> dict:
        kind = t["oracle"]
        inst = self.instance(t)
        if kind == "posner_composition":
            rep = oracles.posner_composition_oracle(inst)
        elif kind == "posner_ring":
            rep = oracles.posner_ring_oracle(inst)
        elif kind == "creedon":
            rep = oracles.creedon_oracle(inst)
        elif kind == "jordan_implies_derivation":
            rep = oracles.jordan_implies_derivation_oracle(inst, self.probe)
        else:
            raise MalformedDescriptor(f"unknown oracle {kind!r}")
        return _jsonable(rep.to_dict())

    def _context(self, c: dict, S: Carrier) -> BracketContext:
        if "right_mult" in c:
            return oracles.right_mult_context(S, S.element(c["right_mult"]))
        return BracketContext(self.sc.map(c["D"]), self.sc.map(c["delta"]), self.sc.map(c["f"]),
                              c.get("name", c["D"] if isinstance(c["D"], str) else "ctx"))

    def lemma_suite(self, t: dict) -> dict:
        S = self.sc.carrier(t["algebra"])
        M = self.sc.carrier(t.get("bimodule", t["algebra"]))
        seed = self.seed_for(t)
        spec = t.get("contexts", "standard")
        if spec == "standard":
            ctxs = oracles.lemma_contexts(S, t.get("per_pair", 1), seed)
        else:
            ctxs = []
            for c in spec:
                if "random_right_mult" in c:
                    rng = np.random.default_rng(seed)
                    for _ in range(c["random_right_mult"]):
                        B0 = tuple(tuple(int(v) for v in row) for row in rng.integers(-2, 3, size=(2, 2)))
                        ctxs.append(oracles.right_mult_context(S, B0))
                else:
                    ctxs.append(self._context(c, S))
        corollaries = None
        if t.get("corollaries"):
            corollaries = oracles.posner_instance(S, name=f"corollaries:{S.label}", partitions=self.opt.partitions)
        ideal_composition = oracles.ideal_composition_cases() if t.get("ideal_composition") == "standard" else []
        inst = oracles.LemmaSuiteInstance(
            t.get("name", f"lemma_suite:{S.label}"), S, M, ctxs, probe=self.probe,
            hypothesis_checks=tuple(t.get("hypotheses", ("two_torsion_free", "jointly_prime", "prime_algebra")
                                          if S.finite else ())),
            colon_prime_carriers=[self.sc.carrier(r) for r in t.get("colon_ideal_prime", [])],
            corollary_family=corollaries, ideal_composition_cases=ideal_composition,
            unconditional_probe=[self._context(c, S) for c in t.get("unconditional", [])],
        )
        rep = oracles.lemma_suite(inst, self.opt.partitions)
        out = _jsonable(rep.to_dict())
        agg = {}
        for lid, s in out["tallies"].items():
            agg[lid] = "fail" if s["fail"] else ("pass" if s["pass"] else "skipped")
        out["lemma_verdicts"] = agg
        return out


def _chain(a, b):
    yield from a
    yield from b


def _jsonable(x):
    """Coerce numpy scalars/tuples/Fractions into plain JSON values."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    if isinstance(x, Element):
        return x.encode()
    if isinstance(x, VerificationReport):
        return _jsonable(x.to_dict())
    if isinstance(x, AdditiveMap):
        return x.name
    return x


# ---------------------------------------------------------------------------
# expectations and reports


_MISSING = object()


def lookup(obj, path: str):
    """Follow a dotted path (integer components index lists)."""
    cur = obj
    for part in path.split("."):
        if isinstance(cur, list):
            try:
                cur = cur[int(part)]
            except (ValueError, IndexError):
                return _MISSING
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            return _MISSING
    return cur


def compare_expectations(result: dict, expect: dict) -> list:
    out = []
    for path, want in expect.items():
        got = lookup(result, path)
        if got is _MISSING:
            out.append({"path": path, "expected": want, "actual": None, "missing": True})
        elif got != want:
            out.append({"path": path, "expected": want, "actual": got})
    return out


def _passes(result: dict) -> bool:
    return result.get("verdict") in ("pass", "holds", "declared")


def run_scenario(sc: Scenario, options: Options | None = None) -> dict:
    """Execute the tasks selected by ``options.verb`` in order; return the report."""
    options = options or Options()
    runner = _Run(sc, options)
    allowed = VERB_TASKS.get(options.verb)
    entries = []
    for t in sc.tasks:
        e: dict = {"id": t["id"], "type": t["type"]}
        if allowed is not None and t["type"] not in allowed:
            e["status"] = "skipped"
            entries.append(e)
            continue
        try:
            result = _jsonable(getattr(runner, t["type"])(t))
        except HypothesisFailed as err:
            e.update(status="hypothesis_failed", verdict="hypothesis_failed",
                     error={"type": "HypothesisFailed", "message": str(err)},
                     result={"verdict": "hypothesis_failed",
                             "hypotheses": [f.to_dict() for f in err.facts]})
            entries.append(e)
            continue
        except DerivError as err:
            e.update(status="error", verdict="error", error={"type": type(err).__name__, "message": str(err)})
            entries.append(e)
            continue
        e["verdict"] = result.get("verdict")
        e["result"] = result
        if "expect" in t:
            e["expect"] = t["expect"]
            mism = compare_expectations(result, t["expect"])
            e["status"] = "mismatch" if mism else "ok"
            if mism:
                e["mismatches"] = mism
        else:
            e["status"] = "ok" if _passes(result) else "mismatch"
            if e["status"] == "mismatch":
                e["mismatches"] = [{"path": "verdict", "expected": "pass", "actual": result.get("verdict")}]
        entries.append(e)
    counts = {s: sum(1 for e in entries if e["status"] == s)
              for s in ("ok", "mismatch", "error", "hypothesis_failed", "skipped")}
    if counts["hypothesis_failed"]:
        code = 3
    elif counts["mismatch"] or counts["error"]:
        code = 1
    else:
        code = 0
    return {
        "schema": REPORT_SCHEMA_ID,
        "scenario": sc.name,
        "description": sc.description,
        "verb": options.verb,
        "seed": sc.seed,
        "probe": sc.probe.to_json(),
        "tasks": entries,
        "summary": {"tasks": len(entries), **counts, "exit_code": code},
    }


def error_report(name: str, err: DerivError, verb: str = "run") -> dict:
    """Report for a scenario that failed to load."""
    code = err.exit_code if err.exit_code in (2, 3) else 2
    return {
        "schema": REPORT_SCHEMA_ID,
        "scenario": name,
        "description": "",
        "verb": verb,
        "seed": 0,
        "probe": ProbeSpec().to_json(),
        "tasks": [],
        "error": {"type": type(err).__name__, "message": str(err)},
        "summary": {"tasks": 0, "ok": 0, "mismatch": 0, "error": 0, "hypothesis_failed": 0, "skipped": 0,
                    "exit_code": code},
    }


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_schema("report.schema.json"))


def strip_timing(obj):
    """Copy without ``elapsed_s`` fields (excluded from regression comparison)."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "elapsed_s"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def render_text(report: dict) -> str:
    lines = [f"scenario {report['scenario']}  (verb {report.get('verb', 'run')}, seed {report['seed']})"]
    if report.get("error"):
        lines.append(f"  ERROR {report['error']['type']}: {report['error']['message']}")
    for e in report["tasks"]:
        status = e["status"].upper()
        if e["status"] == "skipped":
            lines.append(f"  [{status}] {e['id']} ({e['type']})")
            continue
        line = f"  [{status}] {e['id']} ({e['type']}): {e.get('verdict')}"
        r = e.get("result", {})
        for k in ("count", "counterexample_count", "failures"):
            if k in r:
                line += f", {k}={r[k]}"
        if "elapsed_s" in r:
            line += f", {r['elapsed_s']:.2f}s"
        lines.append(line)
        ws = r.get("witnesses") or []
        if ws and "shown" in ws[0]:
            sh = ws[0]["shown"]
            if "residual" in sh:
                lines.append(f"      witness {', '.join(sh['inputs'])}: lhs {sh['lhs']}, rhs {sh['rhs']}, "
                             f"residual {sh['residual']}")
            else:
                lines.append(f"      witness {sh}")
        for m in e.get("mismatches", []):
            lines.append(f"      mismatch at {m['path']}: expected {m['expected']!r}, got {m['actual']!r}")
        if "error" in e:
            lines.append(f"      {e['error']['type']}: {e['error']['message']}")
    s = report["summary"]
    lines.append(f"summary: {s['ok']} ok, {s['mismatch']} mismatch, {s['error']} error, "
                 f"{s['hypothesis_failed']} hypothesis failed, {s['skipped']} skipped -> exit {s['exit_code']}")
    return "\n".join(lines) + "\n"
