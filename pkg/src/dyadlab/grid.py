"""Functions sampled on the periodic unit cube [0,1)^d.

Samples sit at the left endpoints ``i / N`` of the ``N = 2**L`` cells of each
axis, axis order (x, y, z).  Integrals are Riemann sums, so the integral of a
grid function is simply the mean of its samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

MIN_LOG_RESOLUTION = 2
MAX_LOG_RESOLUTION = 14


def _check_shape(dim: int, log_resolution: int) -> None:
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if not MIN_LOG_RESOLUTION <= log_resolution <= MAX_LOG_RESOLUTION:
        raise ValueError(
            f"log_resolution must lie in [{MIN_LOG_RESOLUTION}, {MAX_LOG_RESOLUTION}], "
            f"got {log_resolution}"
        )


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on the periodic grid, stored as an array of shape ``(N,) * dim``."""

    dim: int
    log_resolution: int
    samples: np.ndarray

    def __post_init__(self):
        _check_shape(self.dim, self.log_resolution)
        arr = np.asarray(self.samples)
        if not np.iscomplexobj(arr):
            arr = arr.astype(float)
        n = 2**self.log_resolution
        if arr.size != n**self.dim:
            raise ValueError(f"expected {n**self.dim} samples, got {arr.size}")
        arr = arr.reshape((n,) * self.dim).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return 2**self.log_resolution

    @property
    def shape(self) -> tuple:
        return self.samples.shape

    def like(self, samples: np.ndarray) -> "GridFunction":
        return GridFunction(self.dim, self.log_resolution, samples)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.like(self.samples + other.samples)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.like(self.samples - other.samples)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return self.like(self.samples * other.samples)
        return self.like(self.samples * other)

    __rmul__ = __mul__

    def abs(self) -> "GridFunction":
        return self.like(np.abs(self.samples))

    @classmethod
    def zeros(cls, dim: int, log_resolution: int) -> "GridFunction":
        n = 2**log_resolution
        return cls(dim, log_resolution, np.zeros((n,) * dim))

    @classmethod
    def from_callable(cls, fn: Callable, dim: int, log_resolution: int) -> "GridFunction":
        """Sample ``fn(x)`` (d=1) or ``fn(x, y[, z])`` at the grid points."""
        return cls(dim, log_resolution, fn(*grid_points(dim, log_resolution)))


def grid_points(dim: int, log_resolution: int) -> list:
    """Coordinate arrays of the grid points, ``indexing='ij'``."""
    axis = np.arange(2**log_resolution) / 2**log_resolution
    return list(np.meshgrid(*([axis] * dim), indexing="ij"))


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Fourier coefficients on the integer frequencies ``[-N/2, N/2)^d``.

    ``coefficients`` is kept in FFT order (index ``i`` holds frequency ``i``
    for ``i < N/2`` and ``i - N`` above); use :meth:`at` for frequency lookup.
    """

    dim: int
    log_resolution: int
    coefficients: np.ndarray

    @property
    def n(self) -> int:
        return 2**self.log_resolution

    def at(self, *freq: int) -> complex:
        if len(freq) != self.dim:
            raise ValueError("need one frequency per axis")
        n = self.n
        for k in freq:
            if not -n // 2 <= k < n // 2:
                raise IndexError(f"frequency {k} outside [-{n // 2}, {n // 2})")
        return complex(self.coefficients[tuple(k % n for k in freq)])

    def frequencies(self) -> np.ndarray:
        """Integer frequency of every index of one axis, in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)


def quadrature(f: GridFunction):
    """Riemann sum of ``f`` over the unit cube (equal to the sample mean)."""
    value = f.samples.mean()
    return complex(value) if np.iscomplexobj(value) else float(value)


def lp_norm(f: GridFunction, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    mag = np.abs(f.samples)
    if np.isinf(p):
        return float(mag.max())
    if p == 2:
        return float(np.sqrt(np.mean(mag * mag)))
    return float(np.mean(mag**p) ** (1.0 / p))


def forward_transform(f: GridFunction) -> FrequencyGrid:
    """Fourier series coefficients ``f^(k) = mean(f * exp(-2 pi i k.x))``."""
    coeffs = np.fft.fftn(f.samples) / f.samples.size
    return FrequencyGrid(f.dim, f.log_resolution, coeffs)


def inverse_transform(F: FrequencyGrid) -> GridFunction:
    samples = np.fft.ifftn(F.coefficients) * F.coefficients.size
    return GridFunction(F.dim, F.log_resolution, samples)


PathLike = Union[str, Path]


def write_csv(f: GridFunction, path: PathLike) -> None:
    """Header ``dim,log_resolution``, its values, then one ``re,im`` row per sample (row-major)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dim", "log_resolution"])
        writer.writerow([f.dim, f.log_resolution])
        for z in np.asarray(f.samples, dtype=complex).ravel():
            writer.writerow([repr(float(z.real)), repr(float(z.imag))])


def read_csv(path: PathLike) -> GridFunction:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if rows and rows[0][0].strip() == "dim":
        rows = rows[1:]
    dim, log_res = int(rows[0][0]), int(rows[0][1])
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    samples = data[:, 0] + 1j * data[:, 1]
    if not np.any(data[:, 1]):
        samples = data[:, 0]
    return GridFunction(dim, log_res, samples)
