"""Carriers (rings, algebras, modules, bimodules, quotients), their elements,
sub-structures, and index tables for finite carriers.

A carrier works on *payloads* (plain hashable Python values in canonical
form); :class:`Element` wraps a payload with its carrier and provides the
operator syntax, while :class:`Batch` does the same for numpy arrays of
element indices so that a law written once runs elementwise or vectorized.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable

import numpy as np

from .errors import (
    CarrierMismatch,
    ClosureFailure,
    DeclaredFactRefuted,
    InfiniteCarrier,
    MalformedDescriptor,
    NonUnitalModule,
    NotTwoSided,
    UnsupportedCarrier,
)
from .scalars import ScalarDomain, modular

RING_KINDS = ("Ring", "Algebra")
MODULE_KINDS = ("RightModule", "Bimodule")
KINDS = RING_KINDS + MODULE_KINDS
FACTS = ("prime", "two_torsion_free", "jointly_prime", "faithful")


# ---------------------------------------------------------------------------
# construction helpers (descriptor vocabulary)

def Modular(n: int) -> dict:
    return {"type": "Modular", "n": n}


def Polynomial(base: ScalarDomain) -> dict:
    return {"type": "Polynomial", "base": base.to_json()}


def Matrix(size: int, base: ScalarDomain) -> dict:
    return {"type": "Matrix", "size": size, "base": base.to_json()}


def Triangular(size: int, base: ScalarDomain) -> dict:
    return {"type": "TriangularMatrix", "size": size, "base": base.to_json()}


def Product(*components: dict) -> dict:
    return {"type": "Product", "components": list(components)}


@dataclass
class CarrierDescriptor:
    id: str
    kind: str
    construction: dict
    ring: Any = None  # Carrier (or id resolved by the caller) for module kinds
    action: Any = None  # "regular" | "componentwise" | {"entry": [i, j]}
    scalar_action: ScalarDomain | None = None
    declared_facts: dict = field(default_factory=dict)  # fact -> provenance note


# ---------------------------------------------------------------------------
# tables


@dataclass
class Tables:
    payloads: list
    index: dict
    add: np.ndarray
    neg: np.ndarray
    zero: int
    act: np.ndarray  # (N, N_ring) right action (= mul for rings)
    left: np.ndarray | None  # (N_ring, N) left action, bimodules and rings
    mul: np.ndarray | None = None
    one: int | None = None

    @property
    def size(self) -> int:
        return len(self.payloads)

    @cached_property
    def sub(self) -> np.ndarray:
        return self.add[:, self.neg]

    def scaled(self, k: int) -> np.ndarray:
        """Index array of k·m for every m."""
        out = np.full(self.size, self.zero, dtype=np.intp)
        ar = np.arange(self.size)
        step = ar if k >= 0 else self.neg
        for _ in range(abs(k)):
            out = self.add[out, step]
        return out


# ---------------------------------------------------------------------------
# carriers


class Carrier:
    """Additive group with metadata; concrete constructions subclass this."""

    kind = "Ring"

    def __init__(self):
        self.id: str | None = None
        self.kind = type(self).kind
        self.declared_facts: dict = {}
        self.scalar_action: ScalarDomain | None = None

    # -- to be supplied by constructions --------------------------------
    finite: bool = False
    has_left: bool = False

    def describe(self) -> dict:
        raise NotImplementedError

    def canonical(self, p):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def encode(self, p):
        raise NotImplementedError

    def decode(self, obj):
        raise NotImplementedError

    def show(self, p) -> str:
        return str(self.encode(p))

    def _raw_payloads(self) -> Iterable:
        raise InfiniteCarrier(f"{self.label} is infinite and cannot be enumerated")

    def generators(self) -> list:
        raise InfiniteCarrier(f"{self.label} is infinite")

    def probe_basis(self, probe) -> list:
        return list(self.payloads)

    def random_payload(self, rng, probe):
        return rng.choice(self.payloads)

    # -- module interface -------------------------------------------------
    @property
    def ring(self) -> "Carrier":
        raise NotImplementedError

    def act(self, m, r):
        raise NotImplementedError

    def left_act(self, r, m):
        raise CarrierMismatch(f"{self.label} has no left action")

    # -- derived ------------------------------------------------------------
    @property
    def is_ring(self) -> bool:
        return self.kind in RING_KINDS

    @property
    def label(self) -> str:
        return self.id or _construction_label(self.describe())

    def __repr__(self) -> str:
        return f"<{self.kind} {self.label}>"

    @property
    def zero(self):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, p, k: int):
        """k·p by double-and-add (k any integer)."""
        if k < 0:
            p, k = self.neg(p), -k
        acc, base = self.zero, p
        while k:
            if k & 1:
                acc = self.add(acc, base)
            base = self.add(base, base)
            k >>= 1
        return acc

    def is_zero(self, p) -> bool:
        return p == self.zero

    @property
    def cardinality(self):
        return len(self.payloads) if self.finite else "infinite"

    @cached_property
    def payloads(self) -> list:
        if not self.finite:
            raise InfiniteCarrier(f"{self.label} is infinite and cannot be enumerated")
        return sorted(set(self.canonical(p) for p in self._raw_payloads()))

    @cached_property
    def _index(self) -> dict:
        return {p: i for i, p in enumerate(self.payloads)}

    def index(self, p) -> int:
        return self._index[p]

    def elem(self, p) -> "Element":
        return Element(self, self.canonical(p))

    def element(self, obj) -> "Element":
        """Element from its JSON encoding."""
        return Element(self, self.decode(obj))

    def elements(self) -> list["Element"]:
        return [Element(self, p) for p in self.payloads]

    def additive_order(self, p) -> int:
        k, acc = 1, p
        while acc != self.zero:
            acc = self.add(acc, p)
            k += 1
            if k > 10**6:
                raise InfiniteCarrier("element of infinite additive order")
        return k

    @cached_property
    def tables(self) -> Tables:
        if not self.finite:
            raise InfiniteCarrier(f"{self.label} is infinite; no tables")
        ps = self.payloads
        ix = self._index
        n = len(ps)
        add = np.empty((n, n), dtype=np.intp)
        for i, a in enumerate(ps):
            for j in range(i, n):
                add[i, j] = add[j, i] = ix[self.add(a, ps[j])]
        zero = ix[self.zero]
        neg = np.array([ix[self.neg(a)] for a in ps], dtype=np.intp)
        if self.is_ring:
            mul = np.array([[ix[self.mul(a, b)] for b in ps] for a in ps], dtype=np.intp)
            return Tables(ps, ix, add, neg, zero, act=mul, left=mul, mul=mul, one=ix[self.one])
        R = self.ring
        rp = R.payloads
        act = np.array([[ix[self.act(m, r)] for r in rp] for m in ps], dtype=np.intp)
        left = None
        if self.has_left:
            left = np.array([[ix[self.left_act(r, m)] for m in ps] for r in rp], dtype=np.intp)
        return Tables(ps, ix, add, neg, zero, act=act, left=left)


class RingCarrier(Carrier):
    """A unital associative ring; also its own regular bimodule."""

    has_left = True

    @property
    def ring(self) -> "RingCarrier":
        return self

    @property
    def one(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def act(self, m, r):
        return self.mul(m, r)

    def left_act(self, r, m):
        return self.mul(r, m)

    def embed(self, p, source: "Carrier"):
        """Coerce a payload of a compatible ring into this ring."""
        return self.canonical(p)


class ModularRing(RingCarrier):
    def __init__(self, n: int):
        super().__init__()
        if not isinstance(n, int) or n < 1:
            raise MalformedDescriptor(f"Modular(n) needs a positive integer, got {n!r}")
        self.n = n
        self.scalars = modular(n)
        self.finite = True

    def describe(self):
        return Modular(self.n)

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1 % self.n

    def canonical(self, p):
        return self.scalars.canonical(p)

    def add(self, a, b):
        return (a + b) % self.n

    def neg(self, a):
        return (-a) % self.n

    def mul(self, a, b):
        return (a * b) % self.n

    def scale(self, p, k):
        return (p * k) % self.n

    def encode(self, p):
        return p

    def decode(self, obj):
        return self.scalars.decode(obj)

    def _raw_payloads(self):
        return range(self.n)

    def generators(self):
        return [(1 % self.n, self.n)] if self.n > 1 else []


class PolynomialRing(RingCarrier):
    """Univariate polynomials; payload = coefficient tuple, lowest degree first,
    trailing zeros stripped."""

    def __init__(self, base: ScalarDomain):
        super().__init__()
        self.base = base
        self.finite = False

    def describe(self):
        return Polynomial(self.base)

    @property
    def zero(self):
        return ()

    @property
    def one(self):
        return self._strip((self.base.one,))

    @staticmethod
    def _strip(cs) -> tuple:
        cs = list(cs)
        while cs and cs[-1] == 0:
            cs.pop()
        return tuple(cs)

    def canonical(self, p):
        if isinstance(p, (int,)) and not isinstance(p, bool):
            p = (p,)
        return self._strip(self.base.canonical(c) for c in p)

    def add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        can = self.base.canonical
        out = [can(x + y) for x, y in zip(a, b)] + list(a[len(b):])
        return self._strip(out)

    def neg(self, a):
        can = self.base.canonical
        return tuple(can(-c) for c in a)

    def mul(self, a, b):
        if not a or not b:
            return ()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return self.canonical(out)

    def scale(self, p, k):
        return self.canonical(c * k for c in p)

    def derivative(self, p):
        return self.canonical(i * c for i, c in enumerate(p) if i > 0)

    def encode(self, p):
        return [self.base.encode(c) for c in p]

    def decode(self, obj):
        if not isinstance(obj, list):
            raise MalformedDescriptor(f"polynomial must be a coefficient array, got {obj!r}")
        return self._strip(self.base.decode(c) for c in obj)

    def show(self, p) -> str:
        if not p:
            return "0"
        terms = []
        for i in range(len(p) - 1, -1, -1):
            c = p[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            mag = abs(c)
            coef = str(mag) if (mag != 1 or i == 0) else ""
            body = coef + ("*" if coef and mono and "/" in coef else "") + mono
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s

    def probe_basis(self, probe):
        return [tuple([0] * i + [1]) for i in range(probe.max_degree + 1)]

    def random_payload(self, rng, probe):
        deg = rng.randint(0, probe.max_degree)
        return self.canonical(rng.choice(probe.coefficients) for _ in range(deg + 1))

    def embed(self, p, source):
        if isinstance(source, PolynomialRing):
            return self.canonical(p)
        raise CarrierMismatch(f"cannot embed {source.label} into {self.label}")


class MatrixRing(RingCarrier):
    """k×k matrices over a scalar domain; payload = row-major nested tuples.
    With ``triangular`` only upper-triangular matrices belong to the ring."""

    def __init__(self, size: int, base: ScalarDomain, triangular: bool = False):
        super().__init__()
        if not isinstance(size, int) or size < 1:
            raise MalformedDescriptor(f"matrix size must be a positive integer, got {size!r}")
        self.k = size
        self.base = base
        self.triangular = triangular
        self.finite = base.finite

    def describe(self):
        return Triangular(self.k, self.base) if self.triangular else Matrix(self.k, self.base)

    @property
    def zero(self):
        return tuple((0,) * self.k for _ in range(self.k))

    @property
    def one(self):
        o = self.base.one
        return tuple(tuple(o if i == j else 0 for j in range(self.k)) for i in range(self.k))

    def _positions(self):
        return [(i, j) for i in range(self.k) for j in range(self.k) if not self.triangular or i <= j]

    def canonical(self, p):
        rows = tuple(tuple(self.base.canonical(x) for x in row) for row in p)
        if len(rows) != self.k or any(len(r) != self.k for r in rows):
            raise MalformedDescriptor(f"expected a {self.k}x{self.k} matrix, got {p!r}")
        if self.triangular and any(rows[i][j] != 0 for i in range(self.k) for j in range(i)):
            raise MalformedDescriptor(f"{p!r} is not upper triangular")
        return rows

    def add(self, a, b):
        can = self.base.canonical
        return tuple(tuple(can(x + y) for x, y in zip(ra, rb)) for ra, rb in zip(a, b))

    def neg(self, a):
        can = self.base.canonical
        return tuple(tuple(can(-x) for x in r) for r in a)

    def mul(self, a, b):
        can = self.base.canonical
        k = self.k
        cols = list(zip(*b))
        return tuple(tuple(can(sum(x * y for x, y in zip(a[i], cols[j]))) for j in range(k)) for i in range(k))

    def scale(self, p, k):
        can = self.base.canonical
        return tuple(tuple(can(x * k) for x in r) for r in p)

    def unit(self, i: int, j: int):
        o = self.base.one
        return tuple(tuple(o if (r, c) == (i, j) else 0 for c in range(self.k)) for r in range(self.k))

    def encode(self, p):
        return [[self.base.encode(x) for x in r] for r in p]

    def decode(self, obj):
        if not isinstance(obj, list) or any(not isinstance(r, list) for r in obj):
            raise MalformedDescriptor(f"matrix must be a nested row-major array, got {obj!r}")
        return self.canonical(tuple(tuple(self.base.decode(x) for x in r) for r in obj))

    def show(self, p) -> str:
        return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in p) + "]"

    def _raw_payloads(self):
        pos = self._positions()
        for vals in itertools.product(range(self.base.modulus), repeat=len(pos)):
            grid = [[0] * self.k for _ in range(self.k)]
            for (i, j), v in zip(pos, vals):
                grid[i][j] = v
            yield tuple(tuple(r) for r in grid)

    def generators(self):
        if not self.finite:
            raise InfiniteCarrier(f"{self.label} is infinite")
        if self.base.modulus == 1:
            return []
        return [(self.unit(i, j), self.base.modulus) for i, j in self._positions()]

    def probe_basis(self, probe):
        if self.finite:
            return list(self.payloads)
        return [self.unit(i, j) for i, j in self._positions()]

    def random_payload(self, rng, probe):
        if self.finite:
            return rng.choice(self.payloads)
        grid = [[0] * self.k for _ in range(self.k)]
        for i, j in self._positions():
            grid[i][j] = rng.choice(probe.coefficients)
        return self.canonical(grid)

    def embed(self, p, source):
        if isinstance(source, MatrixRing) and source.k == self.k:
            return self.canonical(p)
        raise CarrierMismatch(f"cannot embed {source.label} into {self.label}")


class ProductRing(RingCarrier):
    """Direct product with componentwise operations; payload = tuple."""

    def __init__(self, components: list):
        super().__init__()
        if not components:
            raise MalformedDescriptor("Product needs at least one component")
        self.components = list(components)
        self.finite = all(c.finite for c in components)

    def describe(self):
        return Product(*(c.describe() for c in self.components))

    @property
    def zero(self):
        return tuple(c.zero for c in self.components)

    @property
    def one(self):
        return tuple(c.one for c in self.components)

    def canonical(self, p):
        p = tuple(p)
        if len(p) != len(self.components):
            raise MalformedDescriptor(f"expected {len(self.components)} components, got {p!r}")
        return tuple(c.canonical(x) for c, x in zip(self.components, p))

    def add(self, a, b):
        return tuple(c.add(x, y) for c, x, y in zip(self.components, a, b))

    def neg(self, a):
        return tuple(c.neg(x) for c, x in zip(self.components, a))

    def mul(self, a, b):
        return tuple(c.mul(x, y) for c, x, y in zip(self.components, a, b))

    def scale(self, p, k):
        return tuple(c.scale(x, k) for c, x in zip(self.components, p))

    def encode(self, p):
        return [c.encode(x) for c, x in zip(self.components, p)]

    def decode(self, obj):
        if not isinstance(obj, list) or len(obj) != len(self.components):
            raise MalformedDescriptor(f"expected {len(self.components)} components, got {obj!r}")
        return tuple(c.decode(x) for c, x in zip(self.components, obj))

    def show(self, p) -> str:
        return "[" + "; ".join(c.show(x) for c, x in zip(self.components, p)) + "]"

    def _raw_payloads(self):
        return itertools.product(*(c.payloads for c in self.components))

    def _inject(self, i, x):
        z = list(self.zero)
        z[i] = x
        return tuple(z)

    def generators(self):
        return [(self._inject(i, g), n) for i, c in enumerate(self.components) for g, n in c.generators()]

    def probe_basis(self, probe):
        if self.finite:
            return list(self.payloads)
        return [self._inject(i, b) for i, c in enumerate(self.components) for b in c.probe_basis(probe)]

    def random_payload(self, rng, probe):
        return tuple(c.random_payload(rng, probe) for c in self.components)


class _CosetCarrier:
    """Shared coset bookkeeping for quotient rings and quotient modules."""

    def _init_cosets(self, parent: Carrier, sub: "Substructure"):
        if not parent.finite:
            raise InfiniteCarrier(f"quotients of infinite carrier {parent.label} are not supported")
        if not sub.finite:
            raise InfiniteCarrier("quotient by a predicate-form substructure of an infinite carrier")
        self.parent = parent
        self.sub = sub
        self.finite = True
        members = sorted(sub.members)
        rep: dict = {}
        for p in parent.payloads:  # ascending, so the first hit is the coset minimum
            if p in rep:
                continue
            for k in members:
                rep[parent.add(p, k)] = p
        self.rep_of = rep

    @property
    def zero(self):
        return self.rep_of[self.parent.zero]

    def canonical(self, p):
        return self.rep_of[self.parent.canonical(p)]

    def add(self, a, b):
        return self.rep_of[self.parent.add(a, b)]

    def neg(self, a):
        return self.rep_of[self.parent.neg(a)]

    def encode(self, p):
        return self.parent.encode(p)

    def decode(self, obj):
        return self.rep_of[self.parent.decode(obj)]

    def show(self, p) -> str:
        return self.parent.show(p) + " + " + (self.sub.name or "K")

    def _raw_payloads(self):
        return set(self.rep_of.values())

    def generators(self):
        return _greedy_generators(self)


class QuotientRing(_CosetCarrier, RingCarrier):
    def __init__(self, ring: RingCarrier, ideal: "Substructure"):
        RingCarrier.__init__(self)
        self._init_cosets(ring, ideal)

    def describe(self):
        return {"type": "QuotientRing", "ring": self.parent.label, "ideal": self.sub.name or "ideal"}

    @property
    def one(self):
        return self.rep_of[self.parent.one]

    def mul(self, a, b):
        return self.rep_of[self.parent.mul(a, b)]


class ModuleCarrier(Carrier):
    """A right module (or bimodule) whose additive group is a ring
    construction ``base`` and whose action is one of:

    * ``regular``       — m·r = m r computed in ``base`` (same construction as the ring)
    * ``componentwise`` — base is a Product; m·r multiplies each component by r
    * ``{"entry": [i, j]}`` — m·r = m · r[i][j] for a matrix ring acting on scalars
    """

    kind = "RightModule"

    def __init__(self, base: RingCarrier, ring: RingCarrier, action, bimodule: bool = False):
        super().__init__()
        self.base = base
        self._ring = ring
        self.action = action
        self.has_left = bimodule
        self.finite = base.finite
        if action == "regular":
            if base.describe() != ring.describe():
                raise MalformedDescriptor("regular action needs the module built on the ring's construction")
        elif action == "componentwise":
            if not isinstance(base, ProductRing):
                raise MalformedDescriptor("componentwise action needs a Product construction")
            for c in base.components:
                if type(c) is not type(ring):
                    raise MalformedDescriptor(f"component {c.label} cannot absorb scalars from {ring.label}")
        elif isinstance(action, dict) and set(action) == {"entry"}:
            if not isinstance(ring, MatrixRing):
                raise MalformedDescriptor("entry action needs a matrix ring")
            i, j = action["entry"]
            if not (0 <= i < ring.k and 0 <= j < ring.k):
                raise MalformedDescriptor(f"entry {action['entry']} out of range")
            self._entry = (i, j)
            if bimodule:
                raise MalformedDescriptor("entry action is one-sided")
        else:
            raise MalformedDescriptor(f"unknown module action {action!r}")

    @property
    def ring(self):
        return self._ring

    def describe(self):
        return self.base.describe()

    @property
    def zero(self):
        return self.base.zero

    def canonical(self, p):
        return self.base.canonical(p)

    def add(self, a, b):
        return self.base.add(a, b)

    def neg(self, a):
        return self.base.neg(a)

    def scale(self, p, k):
        return self.base.scale(p, k)

    def act(self, m, r):
        if self.action == "regular":
            return self.base.mul(m, r)
        if self.action == "componentwise":
            return tuple(c.mul(x, c.embed(r, self._ring)) for c, x in zip(self.base.components, m))
        i, j = self._entry
        return self.base.mul(m, self.base.canonical(r[i][j]))

    def left_act(self, r, m):
        if not self.has_left:
            raise CarrierMismatch(f"{self.label} is not a bimodule")
        if self.action == "regular":
            return self.base.mul(r, m)
        return tuple(c.mul(c.embed(r, self._ring), x) for c, x in zip(self.base.components, m))

    def embed_ring(self, p):
        """Payload of the ring viewed inside a regular module."""
        if self.action != "regular":
            raise UnsupportedCarrier(f"{self.label} does not contain a copy of its ring")
        return self.base.canonical(p)

    def encode(self, p):
        return self.base.encode(p)

    def decode(self, obj):
        return self.base.decode(obj)

    def show(self, p) -> str:
        return self.base.show(p)

    def _raw_payloads(self):
        return self.base.payloads

    def generators(self):
        return self.base.generators()

    def probe_basis(self, probe):
        return self.base.probe_basis(probe)

    def random_payload(self, rng, probe):
        return self.base.random_payload(rng, probe)


class QuotientModule(_CosetCarrier, Carrier):
    kind = "RightModule"

    def __init__(self, module: Carrier, submodule: "Substructure"):
        Carrier.__init__(self)
        self._init_cosets(module, submodule)
        self.has_left = module.has_left and submodule.kind in ("bisubmodule", "ideal") and (
            submodule.sidedness in (None, "two-sided")
        )

    def describe(self):
        return {"type": "QuotientModule", "module": self.parent.label, "submodule": self.sub.name or "submodule"}

    @property
    def ring(self):
        return self.parent.ring

    def act(self, m, r):
        return self.rep_of[self.parent.act(m, r)]

    def left_act(self, r, m):
        if not self.has_left:
            raise CarrierMismatch(f"{self.label} has no left action")
        return self.rep_of[self.parent.left_act(r, m)]


def _construction_label(d: dict) -> str:
    t = d.get("type")
    if t == "Modular":
        return f"Z/{d['n']}"
    if t == "Polynomial":
        return f"{ScalarDomain.from_json(d['base'])}[x]"
    if t in ("Matrix", "TriangularMatrix"):
        pre = "M" if t == "Matrix" else "T"
        return f"{pre}{d['size']}({ScalarDomain.from_json(d['base'])})"
    if t == "Product":
        return " x ".join(_construction_label(c) for c in d["components"])
    return f"{t}"


def _greedy_generators(carrier: Carrier) -> list:
    """Independent generators for the additive group of a finite carrier by a
    greedy direct-sum construction; adequate for cyclic and elementary-abelian
    groups (the shapes arising as quotients here)."""
    T = carrier.tables
    n = T.size
    inside = np.zeros(n, dtype=bool)
    inside[T.zero] = True
    gens = []
    order = [carrier.additive_order(p) for p in T.payloads]
    while not inside.all():
        best = None
        for i in sorted(range(n), key=lambda i: (-order[i], i)):
            if inside[i]:
                continue
            # <g> meets the current subgroup only in zero?
            acc, ok = i, True
            for _ in range(order[i] - 1):
                if inside[acc]:
                    ok = False
                    break
                acc = T.add[acc, i]
            if ok:
                best = i
                break
        if best is None:
            raise UnsupportedCarrier(f"no direct-sum generator basis found for {carrier.label}")
        gens.append((T.payloads[best], order[best]))
        cur = np.flatnonzero(inside)
        multiples = [T.zero]
        for _ in range(order[best] - 1):
            multiples.append(T.add[multiples[-1], best])
        new = np.zeros(n, dtype=bool)
        for k in multiples:
            new[T.add[cur, k]] = True
        inside = new
    return gens


# ---------------------------------------------------------------------------
# elements


def product_rule(left: Carrier, right: Carrier) -> str:
    """How ``left * right`` is interpreted: 'act' (ring product or right
    action of ``right`` on ``left``) or 'left' (left action on a bimodule)."""
    if right is left.ring:
        return "act"
    if right.has_left and left is right.ring:
        return "left"
    raise CarrierMismatch(f"cannot multiply {left.label} by {right.label}")


@dataclass(frozen=True, eq=False)
class Element:
    carrier: Carrier
    payload: Any

    def __eq__(self, other):
        return isinstance(other, Element) and other.carrier is self.carrier and other.payload == self.payload

    def __hash__(self):
        return hash((id(self.carrier), self.payload))

    def _same(self, other):
        if not isinstance(other, Element) or other.carrier is not self.carrier:
            raise CarrierMismatch(
                f"operands live in different carriers: {self.carrier.label} vs "
                f"{getattr(getattr(other, 'carrier', None), 'label', type(other).__name__)}"
            )

    def __add__(self, other):
        self._same(other)
        return Element(self.carrier, self.carrier.add(self.payload, other.payload))

    def __sub__(self, other):
        self._same(other)
        return Element(self.carrier, self.carrier.sub(self.payload, other.payload))

    def __neg__(self):
        return Element(self.carrier, self.carrier.neg(self.payload))

    def __mul__(self, other):
        if isinstance(other, int):
            return Element(self.carrier, self.carrier.scale(self.payload, other))
        if not isinstance(other, Element):
            return NotImplemented
        rule = product_rule(self.carrier, other.carrier)
        if rule == "act":
            return Element(self.carrier, self.carrier.act(self.payload, other.payload))
        return Element(other.carrier, other.carrier.left_act(self.payload, other.payload))

    def __rmul__(self, k):
        if isinstance(k, int):
            return Element(self.carrier, self.carrier.scale(self.payload, k))
        return NotImplemented

    def is_zero(self) -> bool:
        return self.carrier.is_zero(self.payload)

    def encode(self):
        return self.carrier.encode(self.payload)

    def __str__(self):
        return self.carrier.show(self.payload)

    def __repr__(self):
        return f"Element({self.carrier.label}: {self})"


class Batch:
    """A numpy array of element indices in one finite carrier; supports the
    same operators as :class:`Element`, elementwise with broadcasting."""

    __slots__ = ("carrier", "idx")

    def __init__(self, carrier: Carrier, idx):
        self.carrier = carrier
        self.idx = np.asarray(idx)

    @classmethod
    def axis(cls, carrier: Carrier, position: int, arity: int) -> "Batch":
        """All elements of ``carrier`` laid along one axis of an ``arity``-dim grid."""
        shape = [1] * arity
        shape[position] = carrier.tables.size
        return cls(carrier, np.arange(carrier.tables.size).reshape(shape))

    def _same(self, other):
        if not isinstance(other, Batch) or other.carrier is not self.carrier:
            raise CarrierMismatch("batch operands live in different carriers")

    def __add__(self, other):
        self._same(other)
        return Batch(self.carrier, self.carrier.tables.add[self.idx, other.idx])

    def __sub__(self, other):
        self._same(other)
        return Batch(self.carrier, self.carrier.tables.sub[self.idx, other.idx])

    def __neg__(self):
        return Batch(self.carrier, self.carrier.tables.neg[self.idx])

    def __mul__(self, other):
        if isinstance(other, int):
            return Batch(self.carrier, self.carrier.tables.scaled(other)[self.idx])
        if not isinstance(other, Batch):
            return NotImplemented
        rule = product_rule(self.carrier, other.carrier)
        if rule == "act":
            return Batch(self.carrier, self.carrier.tables.act[self.idx, other.idx])
        return Batch(other.carrier, other.carrier.tables.left[self.idx, other.idx])

    def __rmul__(self, k):
        if isinstance(k, int):
            return self.__mul__(k)
        return NotImplemented

    def is_zero(self) -> np.ndarray:
        return self.idx == self.carrier.tables.zero

    def element_at(self, pos) -> Element:
        return Element(self.carrier, self.carrier.tables.payloads[int(self.idx[pos])])


def as_element(carrier: Carrier, value) -> Element:
    if isinstance(value, Element):
        if value.carrier is not carrier:
            raise CarrierMismatch(f"{value!r} is not in {carrier.label}")
        return value
    return carrier.elem(value)


# ---------------------------------------------------------------------------
# sub-structures


class Substructure:
    """Submodule / ideal / bisubmodule of a carrier.

    Finite parents store the exact member set; symbolic parents support only
    predicate form (e.g. "component 1 vanishes").
    """

    def __init__(self, parent: Carrier, kind: str, *, members=None, predicate=None,
                 predicate_desc=None, sidedness=None, generators=(), name=None):
        self.parent = parent
        self.kind = kind  # "submodule" | "ideal" | "bisubmodule" | "subset"
        self.members = frozenset(members) if members is not None else None
        self.predicate = predicate
        self.predicate_desc = predicate_desc
        self.sidedness = sidedness
        self.generators = tuple(generators)
        self.name = name

    @property
    def finite(self) -> bool:
        return self.members is not None

    def contains(self, p) -> bool:
        if self.members is not None:
            return p in self.members
        return bool(self.predicate(p))

    def __contains__(self, e: Element) -> bool:
        if e.carrier is not self.parent:
            raise CarrierMismatch(f"{e!r} is not in {self.parent.label}")
        return self.contains(e.payload)

    @property
    def size(self) -> int:
        if self.members is None:
            raise InfiniteCarrier("predicate-form substructure has no finite size")
        return len(self.members)

    def payloads(self) -> list:
        if self.members is None:
            raise InfiniteCarrier("predicate-form substructure cannot be enumerated")
        return sorted(self.members)

    def elements(self) -> list[Element]:
        return [Element(self.parent, p) for p in self.payloads()]

    @cached_property
    def mask(self) -> np.ndarray:
        T = self.parent.tables
        m = np.zeros(T.size, dtype=bool)
        for p in self.members:
            m[T.index[p]] = True
        return m

    def is_zero(self) -> bool:
        return self.members == frozenset([self.parent.zero])

    def is_whole(self) -> bool:
        return self.finite and len(self.members) == self.parent.tables.size

    def __eq__(self, other):
        return isinstance(other, Substructure) and other.parent is self.parent and self.members == other.members \
            and self.members is not None

    def __hash__(self):
        return hash((id(self.parent), self.members))

    def describe(self) -> dict:
        d = {"parent": self.parent.label, "kind": self.kind}
        if self.name:
            d["name"] = self.name
        if self.members is not None:
            d["size"] = len(self.members)
            d["elements"] = [self.parent.encode(p) for p in sorted(self.members)]
        else:
            d["predicate"] = self.predicate_desc
        return d

    def __repr__(self):
        size = len(self.members) if self.members is not None else "predicate"
        return f"<{self.kind} {self.name or ''} of {self.parent.label}: {size}>"


def closure_mask(parent: Carrier, seeds, *, right: bool, left: bool) -> np.ndarray:
    """Smallest subset containing ``seeds`` (indices) and 0, closed under +,
    and under the right / left actions of ``parent.ring``."""
    T = parent.tables
    mask = np.zeros(T.size, dtype=bool)
    mask[T.zero] = True
    mask[list(seeds)] = True
    while True:
        s = np.flatnonzero(mask)
        new = mask.copy()
        new[T.add[np.ix_(s, s)].ravel()] = True
        if right:
            new[T.act[s, :].ravel()] = True
        if left:
            new[T.left[:, s].ravel()] = True
        if (new == mask).all():
            return mask
        mask = new


def _sides(kind: str, sidedness: str | None) -> tuple[bool, bool]:
    if kind == "submodule":
        return True, False
    if kind == "bisubmodule":
        return True, True
    if kind == "ideal":
        return {"right": (True, False), "left": (False, True), "two-sided": (True, True), None: (True, True)}[sidedness]
    if kind == "subset":
        return False, False
    raise MalformedDescriptor(f"unknown substructure kind {kind!r}")


def generated(parent: Carrier, generators, kind: str = "submodule", sidedness: str | None = None,
              name: str | None = None) -> Substructure:
    """Substructure generated by ``generators`` (payloads or Elements)."""
    if not parent.finite:
        raise InfiniteCarrier(f"generator-form substructures of infinite {parent.label} are not decidable")
    if kind == "ideal" and not parent.is_ring:
        raise MalformedDescriptor("ideals live in rings")
    if kind == "ideal" and sidedness is None:
        sidedness = "two-sided"
    gens = [g.payload if isinstance(g, Element) else parent.canonical(g) for g in generators]
    right, left = _sides(kind, sidedness)
    T = parent.tables
    mask = closure_mask(parent, [T.index[g] for g in gens], right=right, left=left)
    members = [T.payloads[i] for i in np.flatnonzero(mask)]
    return Substructure(parent, kind, members=members, sidedness=sidedness, generators=gens, name=name)


def from_members(parent: Carrier, members, kind: str = "submodule", sidedness: str | None = None,
                 name: str | None = None, validate: bool = True) -> Substructure:
    """Wrap an explicit member set, checking closure on request."""
    if kind == "ideal" and sidedness is None:
        sidedness = "two-sided"
    ms = frozenset(m.payload if isinstance(m, Element) else parent.canonical(m) for m in members)
    sub = Substructure(parent, kind, members=ms, sidedness=sidedness, name=name)
    if validate:
        validate_closure(sub)
    return sub


def validate_closure(sub: Substructure) -> None:
    """Raise ClosureFailure (with witness) unless ``sub`` is closed."""
    parent = sub.parent
    T = parent.tables
    mask = sub.mask
    s = np.flatnonzero(mask)
    if not mask[T.zero]:
        raise ClosureFailure("substructure does not contain zero")
    sums = T.add[np.ix_(s, s)]
    bad = ~mask[sums]
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ClosureFailure("not closed under addition",
                             witness=(parent.elem(T.payloads[s[i]]), parent.elem(T.payloads[s[j]])))
    right, left = _sides(sub.kind, sub.sidedness)
    if right:
        bad = ~mask[T.act[s, :]]
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ClosureFailure("not closed under the right action",
                                 witness=(parent.elem(T.payloads[s[i]]), parent.ring.elem(parent.ring.payloads[j])))
    if left:
        bad = ~mask[T.left[:, s]]
        if bad.any():
            j, i = np.argwhere(bad)[0]
            raise ClosureFailure("not closed under the left action",
                                 witness=(parent.ring.elem(parent.ring.payloads[j]), parent.elem(T.payloads[s[i]])))


def _predicate_fn(parent: Carrier, spec: dict):
    if set(spec) == {"component_zero"}:
        base = parent.base if isinstance(parent, ModuleCarrier) else parent
        if not isinstance(base, ProductRing):
            raise MalformedDescriptor("component_zero needs a Product carrier")
        ks = list(spec["component_zero"])
        zeros = [base.components[k].zero for k in ks]
        return lambda p: all(p[k] == z for k, z in zip(ks, zeros))
    if set(spec) == {"entries_zero"}:
        pos = [tuple(e) for e in spec["entries_zero"]]
        return lambda p: all(p[i][j] == 0 for i, j in pos)
    raise MalformedDescriptor(f"unknown predicate {spec!r}")


def predicate_substructure(parent: Carrier, spec: dict, kind: str = "submodule", sidedness=None,
                           name: str | None = None, probe=None) -> Substructure:
    """Substructure given by a vanishing pattern. Finite parents are
    materialized and closure-validated; symbolic ones are spot-validated on
    the probe set."""
    fn = _predicate_fn(parent, spec)
    if kind == "ideal" and sidedness is None:
        sidedness = "two-sided"
    if parent.finite:
        members = [p for p in parent.payloads if fn(p)]
        sub = Substructure(parent, kind, members=members, predicate=fn, predicate_desc=spec,
                           sidedness=sidedness, name=name)
        validate_closure(sub)
        return sub
    sub = Substructure(parent, kind, predicate=fn, predicate_desc=spec, sidedness=sidedness, name=name)
    if probe is not None:
        _spot_validate(sub, probe)
    return sub


def _spot_validate(sub: Substructure, probe) -> None:
    from .probe import probe_tuples

    parent = sub.parent
    inside = [p for (p,) in probe_tuples([parent], probe) if sub.contains(p)]
    for a in inside[:40]:
        for b in inside[:40]:
            if not sub.contains(parent.add(a, b)):
                raise ClosureFailure("predicate substructure not closed under addition")
    right, left = _sides(sub.kind, sub.sidedness)
    R = parent.ring
    for (m, r) in probe_tuples([parent, R], probe):
        if not sub.contains(m):
            continue
        if right and not sub.contains(parent.act(m, r)):
            raise ClosureFailure("predicate substructure not closed under the right action")
        if left and not sub.contains(parent.left_act(r, m)):
            raise ClosureFailure("predicate substructure not closed under the left action")


def zero_substructure(parent: Carrier, kind: str = "submodule", name: str | None = "0") -> Substructure:
    sid = "two-sided" if kind == "ideal" else None
    if not parent.finite:
        return Substructure(parent, kind, predicate=lambda p: p == parent.zero, predicate_desc={"zero": True},
                            sidedness=sid, name=name)
    return Substructure(parent, kind, members=[parent.zero], sidedness=sid, name=name)


def whole(parent: Carrier, kind: str = "submodule", name: str | None = None) -> Substructure:
    sid = "two-sided" if kind == "ideal" else None
    if not parent.finite:
        return Substructure(parent, kind, predicate=lambda p: True, predicate_desc={"all": True},
                            sidedness=sid, name=name)
    return Substructure(parent, kind, members=parent.payloads, sidedness=sid, name=name)


# ---------------------------------------------------------------------------
# quotients


def quotient_ring(ring: RingCarrier, ideal: Substructure, id: str | None = None) -> QuotientRing:
    if ideal.parent is not ring:
        raise CarrierMismatch("ideal does not belong to this ring")
    if not ring.finite:
        raise InfiniteCarrier(f"quotients of infinite {ring.label} are not supported")
    two = Substructure(ring, "ideal", members=ideal.members, sidedness="two-sided", name=ideal.name)
    try:
        validate_closure(Substructure(ring, "subset", members=ideal.members))
    except ClosureFailure as e:
        raise ClosureFailure(f"ideal is not an additive subgroup: {e}", **e.context) from None
    try:
        validate_closure(two)
    except ClosureFailure as e:
        raise NotTwoSided(f"ideal is not two-sided: {e}", **e.context) from None
    q = QuotientRing(ring, two)
    q.id = id or f"{ring.label}/{ideal.name or 'I'}"
    q.kind = ring.kind
    return q


def quotient_module(module: Carrier, submodule: Substructure, id: str | None = None) -> QuotientModule:
    if submodule.parent is not module:
        raise CarrierMismatch("submodule does not belong to this module")
    if not module.finite:
        raise InfiniteCarrier(f"quotients of infinite {module.label} are not supported")
    validate_closure(Substructure(module, "submodule", members=submodule.members))
    q = QuotientModule(module, submodule)
    q.id = id or f"{module.label}/{submodule.name or 'K'}"
    q.kind = "Bimodule" if q.has_left else "RightModule"
    return q


# ---------------------------------------------------------------------------
# descriptor -> carrier


def build_construction(c: dict) -> RingCarrier:
    """Instantiate the ring underlying a construction dict."""
    if not isinstance(c, dict) or "type" not in c:
        raise MalformedDescriptor(f"construction must be an object with a 'type', got {c!r}")
    t = c["type"]
    try:
        if t == "Modular":
            return ModularRing(c["n"])
        if t == "Polynomial":
            return PolynomialRing(ScalarDomain.from_json(c["base"]))
        if t == "Matrix":
            return MatrixRing(c["size"], ScalarDomain.from_json(c["base"]))
        if t == "TriangularMatrix":
            return MatrixRing(c["size"], ScalarDomain.from_json(c["base"]), triangular=True)
        if t == "Product":
            return ProductRing([build_construction(x) for x in c["components"]])
    except KeyError as e:
        raise MalformedDescriptor(f"construction {t} is missing field {e}") from None
    raise MalformedDescriptor(f"unknown construction type {t!r}")


def make_carrier(desc: CarrierDescriptor) -> Carrier:
    """Build and validate a carrier from its descriptor."""
    if desc.kind not in KINDS:
        raise MalformedDescriptor(f"unknown carrier kind {desc.kind!r}")
    for fact in desc.declared_facts:
        if fact not in FACTS:
            raise MalformedDescriptor(f"unknown structural fact {fact!r}")
    c = desc.construction
    if isinstance(c, dict) and c.get("type") == "QuotientRing":
        car = quotient_ring(c["ring"], c["ideal"], id=desc.id)
    elif isinstance(c, dict) and c.get("type") == "QuotientModule":
        car = quotient_module(c["module"], c["submodule"], id=desc.id)
    elif desc.kind in RING_KINDS:
        car = build_construction(c)
    else:
        if not isinstance(desc.ring, Carrier) or not desc.ring.is_ring:
            raise MalformedDescriptor(f"module {desc.id!r} needs a ring carrier")
        car = ModuleCarrier(build_construction(c), desc.ring, desc.action or "regular",
                            bimodule=desc.kind == "Bimodule")
    car.id = desc.id
    car.kind = desc.kind
    if desc.kind == "Algebra":
        if desc.scalar_action is None:
            raise MalformedDescriptor(f"algebra {desc.id!r} needs a scalar_action domain")
        car.scalar_action = desc.scalar_action
    if desc.kind == "Bimodule" and not car.has_left:
        raise MalformedDescriptor(f"{desc.id!r} declared Bimodule but has no left action")
    car.declared_facts = dict(desc.declared_facts)
    if car.finite:
        _validate_module_axioms(car)
        _validate_declared_facts(car)
    return car


def _validate_module_axioms(car: Carrier) -> None:
    """Exhaustive unitality and action-compatibility checks."""
    if car.is_ring:
        return
    T = car.tables
    R = car.ring
    TR = R.tables
    n = T.size
    ar = np.arange(n)
    bad = np.flatnonzero(T.act[:, TR.one] != ar)
    if bad.size:
        raise NonUnitalModule(f"m*1 != m in {car.label}", witness=car.elem(T.payloads[bad[0]]))
    # (m r) s = m (r s)
    lhs = T.act[T.act[:, :, None], np.arange(TR.size)[None, None, :]]
    rhs = T.act[ar[:, None, None], TR.mul[None, :, :]]
    if (lhs != rhs).any():
        raise MalformedDescriptor(f"action on {car.label} is not associative")
    # distributivity
    if (T.act[T.add[:, :, None], np.arange(TR.size)[None, None, :]]
            != T.add[T.act[:, None, :], T.act[None, :, :]]).any():
        raise MalformedDescriptor(f"action on {car.label} does not distribute over module addition")
    if (T.act[ar[:, None, None], TR.add[None, :, :]] != T.add[T.act[:, :, None], T.act[:, None, :]]).any():
        raise MalformedDescriptor(f"action on {car.label} does not distribute over ring addition")
    if car.has_left:
        if (T.left[TR.one, :] != ar).any():
            raise NonUnitalModule(f"1*m != m in {car.label}")
        # (r m) s = r (m s)
        lhs = T.act[T.left[:, :, None], np.arange(TR.size)[None, None, :]]
        rhs = T.left[np.arange(TR.size)[:, None, None], T.act[None, :, :]]
        if (lhs != rhs).any():
            raise MalformedDescriptor(f"left and right actions on {car.label} do not commute")


def _validate_declared_facts(car: Carrier) -> None:
    from . import structure

    for fact in car.declared_facts:
        if fact == "two_torsion_free":
            res = structure.is_two_torsion_free(car, trust_declared=False)
        elif fact == "prime":
            res = structure.is_prime_ring(car) if car.is_ring else structure.is_prime_module(car)
        elif fact == "jointly_prime":
            res = structure.is_jointly_prime(car)
        else:  # faithful
            res = structure.is_faithful(car)
        if res.verdict == "fails":
            raise DeclaredFactRefuted(
                f"declared fact {fact!r} fails on {car.label}" + (f" (witness {res.witness_str()})" if res.witness else ""),
                fact=res,
            )
