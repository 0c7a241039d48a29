"""Exact scalar domains: Z, Q and Z/nZ.

Values are plain Python objects so that arithmetic is arbitrary precision:
integers and residues are ``int``, rationals are ``int`` when integral and
``fractions.Fraction`` otherwise (always reduced, positive denominator).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .errors import MalformedDescriptor, NonIntegralScaling


@dataclass(frozen=True)
class ScalarDomain:
    kind: str  # "Integers" | "Rationals" | "ModularResidues"
    modulus: int | None = None

    def __post_init__(self):
        if self.kind not in ("Integers", "Rationals", "ModularResidues"):
            raise MalformedDescriptor(f"unknown scalar domain {self.kind!r}")
        if self.kind == "ModularResidues":
            if not isinstance(self.modulus, int) or self.modulus < 1:
                raise MalformedDescriptor(f"modulus must be a positive integer, got {self.modulus!r}")
        elif self.modulus is not None:
            raise MalformedDescriptor(f"{self.kind} takes no modulus")

    # -- basic facts -------------------------------------------------------
    @property
    def finite(self) -> bool:
        return self.kind == "ModularResidues"

    @property
    def size(self) -> int | None:
        return self.modulus if self.finite else None

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1 % self.modulus if self.finite else 1

    def __str__(self) -> str:
        return f"Z/{self.modulus}" if self.finite else ("Z" if self.kind == "Integers" else "Q")

    # -- arithmetic --------------------------------------------------------
    def canonical(self, x):
        """Normalize ``x`` into this domain's canonical representation."""
        if isinstance(x, bool):
            x = int(x)
        if self.kind == "Rationals":
            if isinstance(x, int):
                return x
            if isinstance(x, Rational):
                q = Fraction(x)
                return q.numerator if q.denominator == 1 else q
            raise MalformedDescriptor(f"not an exact rational: {x!r}")
        if isinstance(x, Rational) and not isinstance(x, int):
            q = Fraction(x)
            if q.denominator != 1:
                raise NonIntegralScaling(f"{q} is not integral in {self}")
            x = q.numerator
        if not isinstance(x, int):
            raise MalformedDescriptor(f"not an exact integer: {x!r}")
        return x % self.modulus if self.finite else x

    def add(self, a, b):
        return self.canonical(a + b)

    def neg(self, a):
        return self.canonical(-a)

    def mul(self, a, b):
        return self.canonical(a * b)

    def elements(self) -> list[int]:
        if not self.finite:
            raise ValueError(f"{self} is infinite")
        return list(range(self.modulus))

    # -- serialization -----------------------------------------------------
    def encode(self, x):
        if self.kind == "Rationals":
            q = Fraction(x)
            return [q.numerator, q.denominator]
        return int(x)

    def decode(self, obj):
        if self.kind == "Rationals" and isinstance(obj, list):
            if len(obj) != 2 or not all(isinstance(v, int) for v in obj) or obj[1] == 0:
                raise MalformedDescriptor(f"rational must be [num, den], got {obj!r}")
            return self.canonical(Fraction(obj[0], obj[1]))
        if isinstance(obj, bool) or not isinstance(obj, int):
            raise MalformedDescriptor(f"expected an integer scalar, got {obj!r}")
        return self.canonical(obj)

    def to_json(self):
        return {"ModularResidues": self.modulus} if self.finite else self.kind

    @classmethod
    def from_json(cls, obj) -> "ScalarDomain":
        if isinstance(obj, str):
            if obj in ("Integers", "Z"):
                return INTEGERS
            if obj in ("Rationals", "Q"):
                return RATIONALS
            if obj.startswith("Z/"):
                return modular(int(obj[2:]))
        if isinstance(obj, dict) and set(obj) == {"ModularResidues"}:
            return modular(obj["ModularResidues"])
        raise MalformedDescriptor(f"unrecognized scalar domain {obj!r}")


INTEGERS = ScalarDomain("Integers")
RATIONALS = ScalarDomain("Rationals")


def modular(n: int) -> ScalarDomain:
    return ScalarDomain("ModularResidues", n)


def show_scalar(x) -> str:
    return str(x)
