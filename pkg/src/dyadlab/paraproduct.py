"""Discretized dyadic paraproducts of a given type and the associated trilinear form.

For a type vector ``j`` the bump in slot ``i`` on axis ``a`` has mean zero
whenever ``i != j[a]``.  Per-axis bump tables are cached, and the rectangle sum
is evaluated by contracting one axis at a time: the coefficient of every
rectangle in the collection is exact, and the emitted bumps are summed with
the same weights as the literal term-by-term loop.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bump import bump_samples, dilated_term
from .dyadic import DyadicInterval, RectangleCollection, ShiftParams, realize_shifted, shift_lattice
from .grid import GridFunction

SLOTS = (1, 2, 3)


@dataclass(frozen=True)
class AxisShift:
    """Shift parameters on one axis: a common ``lam`` and one translation per slot."""

    lam: float = 0.0
    t: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.t) != 3:
            raise ValueError("need one translation per slot")
        for t in self.t:
            ShiftParams(self.lam, t)

    def for_slot(self, slot: int) -> ShiftParams:
        return ShiftParams(self.lam, self.t[slot - 1])

    @classmethod
    def uniform(cls, s: ShiftParams) -> "AxisShift":
        return cls(s.lam, (s.t, s.t, s.t))


@dataclass(frozen=True)
class BumpFamily:
    """Which profile realizes each slot on each axis.

    Slot ``i`` on axis ``a`` is cancellative exactly when ``i != type_vector[a]``.
    """

    type_vector: tuple
    smooth_kind: str = "gaussian_like"
    cancel_kind: str = "mean_zero_wavelet"

    def __post_init__(self):
        if any(j not in SLOTS for j in self.type_vector):
            raise ValueError("type vector entries must be 1, 2 or 3")

    def cancellative(self, axis: int, slot: int) -> bool:
        return slot != self.type_vector[axis]

    def kind(self, axis: int, slot: int) -> str:
        return self.cancel_kind if self.cancellative(axis, slot) else self.smooth_kind

    def table(
        self,
        axis: int,
        slot: int,
        intervals: Sequence[DyadicInterval],
        shifts: Sequence[ShiftParams],
        log_resolution: int,
        term: Optional[int] = None,
        decay: int = 10,
        normalize_term: bool = True,
    ) -> np.ndarray:
        """Bump samples of shape ``(len(intervals), len(shifts), N)``.

        With ``term`` set, each bump is replaced by that term of its decomposition.
        """
        return _table(
            tuple(intervals), tuple(shifts), log_resolution, self.kind(axis, slot),
            self.cancellative(axis, slot), term, decay, normalize_term,
        )


@functools.lru_cache(maxsize=512)
def _table(intervals, shifts, log_resolution, kind, cancellation, term, decay, normalize_term):
    n = 2**log_resolution
    out = np.empty((len(intervals), len(shifts), n))
    for i, I in enumerate(intervals):
        for s, shift in enumerate(shifts):
            J = realize_shifted(I, shift)
            if term is None:
                out[i, s] = bump_samples(J, log_resolution, kind, cancellation)
            else:
                out[i, s] = dilated_term(J, log_resolution, kind, cancellation, term, decay, normalize_term)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ParaproductSpec:
    type_vector: tuple
    collection: RectangleCollection
    shifts: tuple = ()
    family: Optional[BumpFamily] = None
    slot3_term: Optional[tuple] = None
    decay: int = 10
    normalize_terms: bool = False

    def __post_init__(self):
        d = self.collection.dim
        if len(self.type_vector) != d:
            raise ValueError("type vector length must equal the collection dimension")
        if not self.shifts:
            object.__setattr__(self, "shifts", (AxisShift(),) * d)
        if len(self.shifts) != d:
            raise ValueError("need one AxisShift per axis")
        if self.family is None:
            object.__setattr__(self, "family", BumpFamily(tuple(self.type_vector)))
        if tuple(self.family.type_vector) != tuple(self.type_vector):
            raise ValueError("bump family was built for a different type vector")
        if self.slot3_term is not None and len(self.slot3_term) != d:
            raise ValueError("slot3_term needs one entry per axis")

    @property
    def dim(self) -> int:
        return self.collection.dim

    def with_shifts(self, shifts: tuple) -> "ParaproductSpec":
        return ParaproductSpec(self.type_vector, self.collection, tuple(shifts), self.family,
                               self.slot3_term, self.decay, self.normalize_terms)

    def with_slot3_term(self, term: Optional[tuple]) -> "ParaproductSpec":
        return ParaproductSpec(self.type_vector, self.collection, self.shifts, self.family,
                               term, self.decay, self.normalize_terms)


@dataclass(frozen=True)
class _Layout:
    intervals: tuple
    index: tuple  # per axis, array of interval indices for every rectangle
    inv_sqrt_measure: np.ndarray = field(repr=False)


@functools.lru_cache(maxsize=256)
def _layout(collection: RectangleCollection) -> _Layout:
    intervals = tuple(tuple(collection.axis_intervals(a)) for a in range(collection.dim))
    lookup = [{I: i for i, I in enumerate(axis)} for axis in intervals]
    index = tuple(
        np.array([lookup[a][R.axes[a]] for R in collection], dtype=np.intp) for a in range(collection.dim)
    )
    measure = np.array([R.measure for R in collection])
    return _Layout(intervals, index, 1.0 / np.sqrt(measure))


def slot_tables(spec: ParaproductSpec, slot: int, log_resolution: int) -> list:
    """One ``(n_intervals, N)`` table per axis for the spec's fixed shifts."""
    lay = _layout(spec.collection)
    tables = []
    for a in range(spec.dim):
        term = spec.slot3_term[a] if (slot == 3 and spec.slot3_term is not None) else None
        t = spec.family.table(a, slot, lay.intervals[a], (spec.shifts[a].for_slot(slot),), log_resolution,
                              term, spec.decay, spec.normalize_terms)
        tables.append(t[:, 0, :])
    return tables


def contract(values: np.ndarray, tables: Sequence[np.ndarray], conjugate: bool) -> np.ndarray:
    """Grid means of ``values`` against every product of table rows: result shape ``(n_0, ..., n_{d-1})``."""
    out = np.asarray(values)
    n = out.shape[0]
    for t in tables:
        t = np.conj(t) if conjugate else t
        # contract the leading grid axis; the new interval axis goes to the back
        out = np.tensordot(out, t, axes=([0], [1])) / n
    return out


def expand(coefficients: np.ndarray, tables: Sequence[np.ndarray]) -> np.ndarray:
    """``sum over index tuples of coefficients * (tensor product of table rows)``."""
    out = np.asarray(coefficients)
    for t in tables:
        out = np.tensordot(out, t, axes=([0], [0]))
    return out


def rectangle_coefficients(spec: ParaproductSpec, f: GridFunction, slot: int, conjugate: bool = True) -> np.ndarray:
    """Pairing of ``f`` with the slot bump of every rectangle, in collection order."""
    lay = _layout(spec.collection)
    full = contract(f.samples, slot_tables(spec, slot, f.log_resolution), conjugate)
    return full[lay.index]


def _check(spec: ParaproductSpec, *fs: GridFunction) -> None:
    for f in fs:
        if f.dim != spec.dim:
            raise ValueError(f"function has dim {f.dim}, paraproduct has dim {spec.dim}")
        if f.log_resolution != fs[0].log_resolution:
            raise ValueError("inputs must share a resolution")


def apply_md(spec: ParaproductSpec, f: GridFunction, g: GridFunction) -> GridFunction:
    """``sum_R |R|**-0.5 <f, Phi1_R> <g, Phi2_R> Phi3_R`` over the collection."""
    _check(spec, f, g)
    L = f.log_resolution
    lay = _layout(spec.collection)
    weights = lay.inv_sqrt_measure * rectangle_coefficients(spec, f, 1) * rectangle_coefficients(spec, g, 2)
    dense = np.zeros(tuple(len(axis) for axis in lay.intervals), dtype=complex)
    dense[lay.index] = weights
    out = expand(dense, slot_tables(spec, 3, L))
    if not (np.iscomplexobj(f.samples) or np.iscomplexobj(g.samples)):
        out = out.real
    return GridFunction(spec.dim, L, out)


def apply_1d(spec: ParaproductSpec, f: GridFunction, g: GridFunction) -> GridFunction:
    if spec.dim != 1:
        raise ValueError("apply_1d needs a one-dimensional spec")
    return apply_md(spec, f, g)


def rectangle_terms(spec: ParaproductSpec, f: GridFunction, g: GridFunction, h: GridFunction) -> np.ndarray:
    """Per-rectangle summands of the trilinear form; ``h`` is paired without conjugation."""
    _check(spec, f, g, h)
    lay = _layout(spec.collection)
    return (
        lay.inv_sqrt_measure
        * rectangle_coefficients(spec, f, 1)
        * rectangle_coefficients(spec, g, 2)
        * rectangle_coefficients(spec, h, 3, conjugate=False)
    )


def rectangle_sum(spec: ParaproductSpec, f: GridFunction, g: GridFunction, h: GridFunction) -> complex:
    return complex(rectangle_terms(spec, f, g, h).sum())


def trilinear_form(spec: ParaproductSpec, f: GridFunction, g: GridFunction, h: GridFunction) -> complex:
    """Grid integral of ``apply_md(spec, f, g) * h``."""
    _check(spec, f, g, h)
    return complex(np.mean(apply_md(spec, f, g).samples * h.samples))


def absolute_rectangle_sum(spec: ParaproductSpec, f: GridFunction, g: GridFunction, h: GridFunction) -> float:
    """Upper bound for ``|trilinear_form|`` by the triangle inequality."""
    return float(np.abs(rectangle_terms(spec, f, g, h)).sum())


def lattice_shifts(dim: int, size: int = 5) -> list:
    """Shift configurations with one ``(lam, t)`` pair shared by every axis and slot."""
    return [(AxisShift.uniform(s),) * dim for s in shift_lattice(size)]


def split_form(spec: ParaproductSpec, f: GridFunction, g: GridFunction, h: GridFunction, k_max: int = 4) -> complex:
    """The trilinear form with every slot-3 bump replaced by its decomposition truncated at ``k_max``.

    Sums ``prod_a 2**(-M k_a) * Lambda_k`` over ``k`` in ``{0..k_max}**d``, where
    ``Lambda_k`` pairs against the raw (unnormalized) terms of index ``k``.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    raw = ParaproductSpec(spec.type_vector, spec.collection, spec.shifts, spec.family, None, spec.decay, False)
    total = 0j
    for k in itertools.product(range(k_max + 1), repeat=spec.dim):
        weight = 2.0 ** (-spec.decay * sum(k))
        total += weight * trilinear_form(raw.with_slot3_term(k), f, g, h)
    return total
