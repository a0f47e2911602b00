"""Square and maximal functions, and their per-axis hybrids over a rectangle collection.

A hybrid starts from the normalized coefficients
``a_R = sup over shifts |<f, Phi_R>|**2 / |R|`` and aggregates them axis by
axis: an ``S`` axis sums ``a * chi_I`` over that axis's intervals, an ``M``
axis takes the supremum instead.  A square root is applied at the end when
any axis is ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._maximal import maximal_along, strong_maximal
from .dyadic import RectangleCollection, shift_lattice
from .grid import GridFunction
from .paraproduct import BumpFamily, _layout, contract

LETTERS = ("S", "M")


@dataclass(frozen=True)
class HybridSpec:
    letters: str
    collection: RectangleCollection
    slot: int
    type_vector: tuple
    lattice_size: int = 5
    support_dilation: Optional[tuple] = None
    decay: int = 10

    def __post_init__(self):
        letters = self.letters.upper()
        object.__setattr__(self, "letters", letters)
        if len(letters) != self.collection.dim or any(c not in LETTERS for c in letters):
            raise ValueError(f"pattern {self.letters!r} must be {self.collection.dim} letters from S/M")
        if self.slot not in (1, 2, 3):
            raise ValueError("slot must be 1, 2 or 3")
        if len(self.type_vector) != self.collection.dim:
            raise ValueError("type vector length must equal the collection dimension")
        if self.support_dilation is not None and len(self.support_dilation) != self.collection.dim:
            raise ValueError("support_dilation needs one entry per axis")

    @property
    def dim(self) -> int:
        return self.collection.dim

    @property
    def family(self) -> BumpFamily:
        return BumpFamily(tuple(self.type_vector))


def pattern_spec(letters: str, collection: RectangleCollection, lattice_size: int = 5) -> HybridSpec:
    """Slot and type choice that makes the pattern's bumps match its letters.

    An ``M`` axis pairs against a non-cancellative bump, an ``S`` axis against a
    mean-zero bump.  Patterns of the trilinear domination use the type ``(1, 2)``
    slots: ``MS`` slot 1, ``SM`` slot 2, ``SS`` slot 3; one-axis ``S`` uses
    slot 2 of type 1.
    """
    letters = letters.upper()
    d = collection.dim
    known = {"S": (2, (1,)), "M": (1, (1,)), "MS": (1, (1, 2)), "SM": (2, (1, 2)), "SS": (3, (1, 2)),
             "MM": (1, (1, 1))}
    if letters in known and len(letters) == d:
        slot, types = known[letters]
    else:
        slot = 3
        types = tuple(3 if c == "M" else 1 for c in letters)
    return HybridSpec(letters, collection, slot, types, lattice_size)


def hl_maximal(f: GridFunction) -> GridFunction:
    """Strong maximal function: sup of averages of ``|f|`` over all grid boxes containing the point."""
    return f.like(strong_maximal(f.samples))


def coefficient_tensor(spec: HybridSpec, f: GridFunction) -> np.ndarray:
    """Dense array over per-axis interval indices holding ``a_R`` (zero for rectangles not in the collection)."""
    if f.dim != spec.dim:
        raise ValueError(f"function has dim {f.dim}, spec has dim {spec.dim}")
    L = f.log_resolution
    lay = _layout(spec.collection)
    shifts = tuple(shift_lattice(spec.lattice_size))
    tables = []
    for a in range(spec.dim):
        term = None if spec.support_dilation is None else spec.support_dilation[a]
        t = spec.family.table(a, spec.slot, lay.intervals[a], shifts, L, term, spec.decay, True)
        tables.append(t.reshape(-1, t.shape[-1]))
    c = np.abs(contract(f.samples, tables, conjugate=True)) ** 2
    # split each axis into (interval, shift) and take the sup over every shift axis
    c = c.reshape(tuple(x for axis in lay.intervals for x in (len(axis), len(shifts))))
    c = c.max(axis=tuple(range(1, 2 * spec.dim, 2)))
    dense = np.zeros_like(c)
    dense[lay.index] = c[lay.index] * lay.inv_sqrt_measure**2
    return dense


def _indicator_table(intervals, log_resolution: int) -> np.ndarray:
    return np.array([I.indicator(log_resolution) for I in intervals])


def aggregate(spec: HybridSpec, coefficients: np.ndarray, log_resolution: int,
              order: Optional[Sequence[int]] = None) -> np.ndarray:
    """Apply the per-axis S/M aggregation; axes are processed last-to-first unless ``order`` says otherwise.

    The result keeps one grid axis per processed axis, in the original axis order.
    """
    lay = _layout(spec.collection)
    order = list(range(spec.dim - 1, -1, -1)) if order is None else list(order)
    if sorted(order) != list(range(spec.dim)):
        raise ValueError("order must be a permutation of the axes")
    out = np.asarray(coefficients, dtype=float)
    for a in order:
        chi = _indicator_table(lay.intervals[a], log_resolution)
        moved = np.moveaxis(out, a, -1)
        if spec.letters[a] == "S":
            res = moved @ chi
        else:
            res = (moved[..., :, None] * chi).max(axis=-2)
        out = np.moveaxis(res, -1, a)
    if "S" in spec.letters:
        out = np.sqrt(out)
    return out


def hybrid(spec: HybridSpec, f: GridFunction, order: Optional[Sequence[int]] = None) -> GridFunction:
    return GridFunction(spec.dim, f.log_resolution, aggregate(spec, coefficient_tensor(spec, f), f.log_resolution, order))


def hybrid_dilated(spec: HybridSpec, h: GridFunction) -> GridFunction:
    """The hybrid with each bump replaced by the normalized decomposition term of index ``support_dilation``.

    Indicators stay those of the undilated rectangles.
    """
    if spec.support_dilation is None:
        raise ValueError("spec has no support_dilation")
    return hybrid(spec, h)


def partial_coefficients(spec: HybridSpec, g: GridFunction) -> np.ndarray:
    """``v_I(y) = sup over shifts |<g(., y), Phi_I>| / |I|**0.5`` for the first-axis intervals (d = 2)."""
    if spec.dim != 2:
        raise ValueError("partial coefficients are defined for two axes")
    lay = _layout(spec.collection)
    L = g.log_resolution
    shifts = tuple(shift_lattice(spec.lattice_size))
    t = spec.family.table(0, spec.slot, lay.intervals[0], shifts, L)
    n = g.samples.shape[0]
    c = np.abs(np.tensordot(t, np.asarray(g.samples), axes=([2], [0])) / n)  # (n_I, shifts, N_y)
    lengths = np.array([I.length for I in lay.intervals[0]])
    return c.max(axis=1) / np.sqrt(lengths)[:, None]


def _partial_square(spec: HybridSpec, v: np.ndarray, log_resolution: int) -> np.ndarray:
    chi = _indicator_table(_layout(spec.collection).intervals[0], log_resolution)
    return np.sqrt(np.einsum("iy,ix->xy", v * v, chi))


def fs_majorant(spec: HybridSpec, g: GridFunction) -> GridFunction:
    """``(sum_I M_y(v_I)**2 chi_I(x))**0.5``: the vector-valued maximal bound for the SM function."""
    v = maximal_along(partial_coefficients(spec, g), axis=1)
    return GridFunction(2, g.log_resolution, _partial_square(spec, v, g.log_resolution))


def partial_square(spec: HybridSpec, g: GridFunction) -> GridFunction:
    """``(sum_I v_I(y)**2 chi_I(x))**0.5``: square function in x with y as a parameter."""
    v = partial_coefficients(spec, g)
    return GridFunction(2, g.log_resolution, _partial_square(spec, v, g.log_resolution))
