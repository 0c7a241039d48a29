"""Deterministic finite test sets standing in for universal quantifiers over
infinite carriers."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass


@dataclass(frozen=True)
class ProbeSpec:
    max_degree: int = 8
    coefficients: tuple = (-2, -1, 0, 1, 2)
    random_samples: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be nonnegative")
        if not self.coefficients:
            raise ValueError("coefficient set must be nonempty")
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    def rng(self, salt: int = 0) -> random.Random:
        return random.Random((self.seed << 8) ^ salt)

    def to_json(self) -> dict:
        return {
            "max_degree": self.max_degree,
            "coefficients": list(self.coefficients),
            "random_samples": self.random_samples,
            "seed": self.seed,
        }


DEFAULT_PROBE = ProbeSpec()


def _slot_basis(carrier, probe: ProbeSpec, with_sums: bool) -> list:
    basis = list(carrier.probe_basis(probe))
    if with_sums and not carrier.finite:
        basis += [carrier.add(a, b) for a, b in itertools.combinations(basis, 2)]
    return basis


def probe_tuples(carriers: list, probe: ProbeSpec, *, with_sums: bool = False, salt: int = 0):
    """Yield payload tuples: the basis grid first, then seeded random samples.

    ``with_sums`` adds pairwise basis sums to each slot, which makes the grid
    complete for laws that are quadratic in a variable.
    """
    bases = [_slot_basis(c, probe, with_sums) for c in carriers]
    yield from itertools.product(*bases)
    if all(c.finite for c in carriers):
        return
    rng = probe.rng(salt)
    for _ in range(probe.random_samples):
        yield tuple(c.random_payload(rng, probe) for c in carriers)
