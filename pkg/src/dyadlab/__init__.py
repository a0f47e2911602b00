"""Numerical toolkit for multi-parameter dyadic paraproducts on the periodic torus.

Modules: ``grid`` (sampled functions and transforms), ``dyadic`` (intervals,
rectangles, shifts), ``bump`` (adapted bumps and their support decomposition),
``paraproduct``, ``sqmax`` (square/maximal hybrids), ``stopping`` (exceptional
sets and level-set partitions), ``multiplier`` and ``harness``.
"""

from .grid import FrequencyGrid, GridFunction, forward_transform, inverse_transform, lp_norm, quadrature
from .dyadic import DyadicInterval, DyadicRectangle, RectangleCollection, ShiftParams, default_collection

__version__ = "0.1.0"

__all__ = [
    "DyadicInterval",
    "DyadicRectangle",
    "FrequencyGrid",
    "GridFunction",
    "RectangleCollection",
    "ShiftParams",
    "default_collection",
    "forward_transform",
    "inverse_transform",
    "lp_norm",
    "quadrature",
]
