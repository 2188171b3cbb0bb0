"""Exact supersymmetric integral representations of the averaged resolvent
for Gaussian random matrices, their 1/N expansions, and independent oracles."""

__version__ = "0.1.0"
