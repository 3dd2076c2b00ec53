"""Explicit maximal tori in SL_N, polytopes of non-divergence, divergence graphs,
restriction of scalars, orbit statistics and characteristic-polynomial counts."""

__version__ = "0.1.0"
