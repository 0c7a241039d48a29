"""Exception hierarchy. Every error carries a human-readable message and,
where meaningful, the offending object (witness, report, summary)."""
from __future__ import annotations


class DerivError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context


# algebra core
class MalformedDescriptor(DerivError):
    exit_code = 2


class DeclaredFactRefuted(DerivError):
    exit_code = 3


class NonUnitalModule(DerivError):
    exit_code = 3


class CarrierMismatch(DerivError):
    pass


class InfiniteCarrier(DerivError):
    pass


class NotTwoSided(DerivError):
    pass


class ClosureFailure(DerivError):
    pass


# maps
class UnsupportedCarrier(DerivError):
    pass


class NonIntegralScaling(DerivError):
    pass


# structure
class NotInvariant(DerivError):
    pass


# checks / jordan
class PrereqFailed(DerivError):
    def __init__(self, message: str, report=None, **context):
        super().__init__(message, **context)
        self.report = report


class HypothesisUnmet(DerivError):
    pass


class UnknownLemma(DerivError):
    pass


# enumeration
class BudgetExceeded(DerivError):
    def __init__(self, message: str, summary: dict | None = None, **context):
        super().__init__(message, **context)
        self.summary = summary or {}


class NotFinite(InfiniteCarrier):
    pass


# oracles
class HypothesisFailed(DerivError):
    exit_code = 3

    def __init__(self, message: str, facts=None, **context):
        super().__init__(message, **context)
        self.facts = facts or []


# scenarios
class ParseError(DerivError):
    exit_code = 2


class ResolveError(DerivError):
    exit_code = 2


class ValidationError(DerivError):
    exit_code = 3
