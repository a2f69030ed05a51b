"""Numerical toolkit for SU(n)-invariant valuations on C^n."""

__version__ = "0.1.0"
