"""Entropy-inequality workbench for translation-invariant lattice systems."""

__version__ = "0.1.0"
