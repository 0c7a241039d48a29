"""Exact (δ,f)-derivations and Jordan (δ,f)-derivations on rings and modules."""
__version__ = "0.1.0"
