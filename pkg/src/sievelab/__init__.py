"""Desk-scale experiments around primes in progressions to sparse moduli."""

__version__ = "0.1.0"
