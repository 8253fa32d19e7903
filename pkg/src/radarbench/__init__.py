"""Radar network placement workbench.

Terrain-aware coverage objective, a portfolio of derivative-free optimizers
with trajectory logging, landscape feature extraction, and a per-algorithm
performance model used for algorithm selection.
"""

__version__ = "0.1.0"
