"""Dyadic intervals and rectangles on the unit torus, their shifted variants, and finite collections."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

#: A real interval as ``(left, length)``; it may protrude beyond [0, 1) and is read modulo 1.
Interval = tuple


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """``I = 2**scale * [position, position + 1)``.

    Any integers are accepted; grid operations additionally require the
    interval to sit inside [0, 1) at a scale no finer than the grid.
    """

    scale: int
    position: int

    def check_unit(self, log_resolution: int) -> None:
        if not -log_resolution <= self.scale <= 0:
            raise ValueError(f"scale {self.scale} outside [-{log_resolution}, 0]")
        if not 0 <= self.position < 2 ** (-self.scale):
            raise ValueError(f"position {self.position} outside [0, 2**{-self.scale})")

    @property
    def left(self) -> float:
        return 2.0**self.scale * self.position

    @property
    def length(self) -> float:
        return 2.0**self.scale

    def as_interval(self) -> Interval:
        return (self.left, self.length)

    def cell_range(self, log_resolution: int) -> range:
        """Indices of the grid cells making up the interval."""
        self.check_unit(log_resolution)
        width = 2 ** (self.scale + log_resolution)
        return range(self.position * width, (self.position + 1) * width)

    def indicator(self, log_resolution: int) -> np.ndarray:
        chi = np.zeros(2**log_resolution)
        r = self.cell_range(log_resolution)
        chi[r.start : r.stop] = 1.0
        return chi

    def contains(self, other: "DyadicInterval") -> bool:
        if other.scale > self.scale:
            return False
        return other.position >> (self.scale - other.scale) == self.position


@dataclass(frozen=True)
class ShiftParams:
    lam: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0 and 0.0 <= self.t <= 1.0):
            raise ValueError("shift parameters must lie in [0, 1]")


ZERO_SHIFT = ShiftParams(0.0, 0.0)


@dataclass(frozen=True, order=True)
class DyadicRectangle:
    axes: tuple

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def measure(self) -> float:
        return float(np.prod([I.length for I in self.axes]))

    @property
    def scales(self) -> tuple:
        return tuple(I.scale for I in self.axes)

    def indicator(self, log_resolution: int) -> np.ndarray:
        out = np.ones(())
        for I in self.axes:
            out = np.multiply.outer(out, I.indicator(log_resolution))
        return out

    def slices(self, log_resolution: int) -> tuple:
        return tuple(slice(r.start, r.stop) for r in (I.cell_range(log_resolution) for I in self.axes))

    def cell_count(self, log_resolution: int) -> int:
        return int(np.prod([len(I.cell_range(log_resolution)) for I in self.axes]))

    def __str__(self) -> str:
        return format_rectangle(self)


@dataclass(frozen=True)
class RectangleCollection:
    """A finite, duplicate-free, deterministically ordered set of dyadic rectangles."""

    rects: tuple
    dim: int

    def __post_init__(self):
        rects = tuple(sorted(set(self.rects), key=_sort_key))
        if len(rects) != len(self.rects):
            raise ValueError("duplicate rectangles in collection")
        for R in rects:
            if R.dim != self.dim:
                raise ValueError(f"rectangle {R} has {R.dim} axes, collection has dim {self.dim}")
        object.__setattr__(self, "rects", rects)

    def __len__(self) -> int:
        return len(self.rects)

    def __iter__(self):
        return iter(self.rects)

    def __contains__(self, R) -> bool:
        return R in self.rects

    def axis_intervals(self, axis: int) -> list:
        """Distinct intervals used on one axis, sorted."""
        return sorted({R.axes[axis] for R in self.rects})

    def subset(self, keep: Iterable) -> "RectangleCollection":
        return RectangleCollection(tuple(keep), self.dim)


def _sort_key(R: DyadicRectangle):
    return (R.scales, tuple(I.position for I in R.axes))


def realize_shifted(I: DyadicInterval, s: ShiftParams) -> Interval:
    """``I_{lam,t} = 2**(k+lam) * [n+t, n+t+1]`` as ``(left, length)``."""
    length = 2.0 ** (I.scale + s.lam)
    return (length * (I.position + s.t), length)


def dilate(J: Interval, k: int) -> Interval:
    """Interval with the same center as ``J`` and length ``2**k * |J|``."""
    if k < 0:
        raise ValueError("dilation exponent must be >= 0")
    left, length = J
    center = left + length / 2
    new_length = length * 2.0**k
    return (center - new_length / 2, new_length)


def enumerate_collection(
    dim: int,
    log_resolution: int,
    scale_range: tuple,
    filter: Optional[Callable[[DyadicRectangle], bool]] = None,
) -> RectangleCollection:
    """All rectangles whose per-axis scales lie in ``scale_range`` (inclusive) and pass ``filter``."""
    lo, hi = scale_range
    if not -log_resolution <= lo <= hi <= 0:
        raise ValueError(f"scale_range {scale_range} must lie within [-{log_resolution}, 0]")
    axis_intervals = [DyadicInterval(k, n) for k in range(lo, hi + 1) for n in range(2 ** (-k))]
    rects = (DyadicRectangle(axes) for axes in itertools.product(axis_intervals, repeat=dim))
    if filter is not None:
        rects = (R for R in rects if filter(R))
    return RectangleCollection(tuple(rects), dim)


def default_scale_range(log_resolution: int) -> tuple:
    """Every scale whose intervals span at least 8 grid cells."""
    return (-(log_resolution - 3), 0)


def default_collection(dim: int, log_resolution: int) -> RectangleCollection:
    return enumerate_collection(dim, log_resolution, default_scale_range(log_resolution))


def shift_lattice(size: int = 5) -> list:
    """Evenly spaced ``(lam, t)`` pairs on [0,1]^2, endpoints included; size 1 gives the zero shift."""
    if size < 1:
        raise ValueError("lattice size must be >= 1")
    values = np.linspace(0.0, 1.0, size) if size > 1 else np.zeros(1)
    return [ShiftParams(float(lam), float(t)) for lam in values for t in values]


def format_rectangle(R: DyadicRectangle) -> str:
    return ",".join(f"{I.scale}:{I.position}" for I in R.axes)


def parse_rectangle(text: str) -> DyadicRectangle:
    axes = []
    for part in text.strip().split(","):
        k, n = part.split(":")
        axes.append(DyadicInterval(int(k), int(n)))
    return DyadicRectangle(tuple(axes))


def parse_collection(lines: Sequence) -> RectangleCollection:
    rects = [parse_rectangle(line) for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not rects:
        raise ValueError("empty collection")
    return RectangleCollection(tuple(rects), rects[0].dim)


def format_collection(D: RectangleCollection) -> list:
    return [format_rectangle(R) for R in D]
