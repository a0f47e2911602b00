"""Bilinear Fourier multipliers on the periodic grid and a finite-difference check of their symbol estimates.

A symbol is a function of two frequency vectors ``xi1, xi2`` in ``R^d``.  The
frequency variables are grouped per axis: group ``a`` is ``(xi1[a], xi2[a])``,
and the symbol may be singular only where a whole group vanishes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numba
import numpy as np

from .grid import GridFunction, forward_transform, inverse_transform

ARITY = 2


@dataclass(frozen=True)
class Symbol:
    name: str
    dim: int
    evaluator: Callable  # (xi1, xi2), arrays of shape (..., dim) -> complex array of shape (...)
    factors: Optional[tuple] = None  # per-axis (a, b) -> value when the symbol is a tensor product

    def __call__(self, xi1, xi2) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float)))

    def sup_on_grid(self, log_resolution: int) -> float:
        n = 2**log_resolution
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        pts = np.stack(np.meshgrid(*([freqs] * (2 * self.dim)), indexing="ij"), axis=-1)
        return float(np.abs(self(pts[..., : self.dim], pts[..., self.dim :])).max())


def _riesz_factor(a, b):
    """``a / |(a, b)|``, set to 0 at the origin."""
    r = np.hypot(a, b)
    return np.divide(a, r, out=np.zeros(np.broadcast(a, b).shape), where=r > 0)


def constant_symbol(dim: int, value: complex = 1.0) -> Symbol:
    factors = (lambda a, b: np.full(np.broadcast(a, b).shape, value, dtype=complex),) + (
        lambda a, b: np.ones(np.broadcast(a, b).shape),) * (dim - 1)
    return Symbol("constant", dim,
                  lambda xi1, xi2: np.full(np.broadcast(xi1, xi2).shape[:-1], value, dtype=complex), factors)


def riesz_product(dim: int) -> Symbol:
    """Product over axes of ``xi1[a] / |(xi1[a], xi2[a])|``: one Riesz-type factor per frequency group."""

    def evaluate(xi1, xi2):
        out = 1.0
        for a in range(dim):
            out = out * _riesz_factor(xi1[..., a], xi2[..., a])
        return np.asarray(out, dtype=complex)

    name = "riesz" if dim == 1 else "double_riesz" if dim == 2 else f"riesz_product_{dim}"
    return Symbol(name, dim, evaluate, (_riesz_factor,) * dim)


SYMBOLS = {
    "constant": lambda dim: constant_symbol(dim),
    "riesz": lambda dim: riesz_product(dim),
    "double_riesz": lambda dim: riesz_product(2),
}


def get_symbol(name: str, dim: int) -> Symbol:
    if name not in SYMBOLS:
        raise ValueError(f"unknown symbol {name!r}; choose from {sorted(SYMBOLS)}")
    sym = SYMBOLS[name](dim)
    if sym.dim != dim:
        raise ValueError(f"symbol {name!r} is defined for dim {sym.dim}")
    return sym


def band_limit(f: GridFunction) -> GridFunction:
    """Drop every Fourier coefficient with some ``|frequency| >= N/4``."""
    F = forward_transform(f)
    keep = np.abs(F.frequencies()) < f.n // 4
    mask = np.ones(f.shape, dtype=bool)
    for a in range(f.dim):
        shape = [1] * f.dim
        shape[a] = f.n
        mask = mask & keep.reshape(shape)
    out = inverse_transform(type(F)(F.dim, F.log_resolution, F.coefficients * mask))
    if not np.iscomplexobj(f.samples):
        out = out.like(out.samples.real)
    return out


@numba.njit(cache=True)
def _tensor_sum_1d(K, F, G, out):
    nb = F.shape[0]
    for u in range(nb):
        if F[u] == 0:
            continue
        for w in range(nb):
            out[u + w] += K[u, w] * F[u] * G[w]


@numba.njit(cache=True)
def _tensor_sum_2d(Kx, Ky, F, G, out):
    nb = F.shape[0]
    for u in range(nb):
        for v in range(nb):
            fv = F[u, v]
            if fv == 0:
                continue
            for w in range(nb):
                kx = Kx[u, w] * fv
                for z in range(nb):
                    out[u + w, v + z] += kx * Ky[v, z] * G[w, z]


def apply_tm(m: Symbol, f: GridFunction, g: GridFunction, chunk: int = 256, tensor: bool = True) -> GridFunction:
    """``sum over xi1, xi2 of m(xi1, xi2) f^(xi1) g^(xi2) e(x.(xi1 + xi2))`` for band-limited copies of ``f, g``.

    Both inputs are cut to ``|xi| < N/4`` per axis, so every ``xi1 + xi2`` is a
    grid frequency.  Each product is added into its output frequency; for a
    tensor-product symbol in one or two dimensions the symbol is read from
    per-axis tables, otherwise it is evaluated for a chunk of ``xi1`` at a time.
    """
    if f.dim != g.dim or f.log_resolution != g.log_resolution or f.dim != m.dim:
        raise ValueError("f, g and the symbol must share dim and resolution")
    n, d = f.n, f.dim
    half = n // 4
    band = np.r_[n - half:n, 0:half]  # FFT indices of frequencies -N/4 .. N/4 - 1, ascending
    sel = np.ix_(*([band] * d))
    F = (np.fft.fftn(f.samples) / f.samples.size)[sel]
    G = (np.fft.fftn(g.samples) / g.samples.size)[sel]
    for a in range(d):  # -N/4 itself is outside the band
        F[(slice(None),) * a + (0,)] = 0
        G[(slice(None),) * a + (0,)] = 0
    freqs = np.arange(-half, half, dtype=float)
    width = 4 * half - 1  # output frequencies -N/2 .. N/2 - 2
    if tensor and m.factors is not None and d <= 2:
        tables = [np.ascontiguousarray(fac(freqs[:, None], freqs[None, :]), dtype=complex) for fac in m.factors]
        acc = np.zeros((width,) * d, dtype=complex)
        if d == 1:
            _tensor_sum_1d(tables[0], F.astype(complex), G.astype(complex), acc)
        else:
            _tensor_sum_2d(tables[0], tables[1], F.astype(complex), G.astype(complex), acc)
    else:
        acc = _chunked_sum(m, F.ravel(), G.ravel(), freqs, d, width, chunk)
    out = np.zeros((n,) * d, dtype=complex)
    omega = np.arange(width) - 2 * half
    out[np.ix_(*([omega % n] * d))] = acc
    return GridFunction(d, f.log_resolution, np.fft.ifftn(out) * out.size)


def _chunked_sum(m: Symbol, F: np.ndarray, G: np.ndarray, freqs: np.ndarray, d: int, width: int, chunk: int):
    half = len(freqs) // 2
    xi = np.stack(np.meshgrid(*([freqs] * d), indexing="ij"), axis=-1).reshape(-1, d)
    strides = width ** np.arange(d - 1, -1, -1)
    base = ((xi + half).astype(np.intp) * strides).sum(axis=1)
    acc = np.zeros(width**d, dtype=complex)
    active = np.nonzero(F)[0]
    for start in range(0, len(active), chunk):
        rows = active[start:start + chunk]
        vals = (m(xi[rows][:, None, :], xi[None, :, :]) * F[rows][:, None] * G[None, :]).ravel()
        idx = (base[rows][:, None] + base[None, :]).ravel()
        acc += np.bincount(idx, vals.real, minlength=acc.size) + 1j * np.bincount(idx, vals.imag, minlength=acc.size)
    return acc.reshape((width,) * d)


_STENCILS = {
    0: (np.array([0]), np.array([1.0])),
    1: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 1, 2]), np.array([-0.5, 1.0, -1.0, 0.5])),
}


def group_multi_indices(alpha_max: int) -> list:
    """Multi-indices ``(a1, a2)`` over one frequency group with ``a1 + a2 <= alpha_max``."""
    return [(i, j) for i in range(alpha_max + 1) for j in range(alpha_max + 1 - i)]


def sample_points(dim: int, count: int, seed: int = 0, radius=(1e-3, 1e-1)) -> np.ndarray:
    """Points of shape ``(count, dim, 2)``: each group has a log-uniform radius and a uniform direction.

    The default radii keep the difference step at exactly ``|group| / 100``;
    larger radii hit the absolute step cap and round-off takes over.
    """
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(np.log(radius[0]), np.log(radius[1]), size=(count, dim)))
    theta = rng.uniform(0, 2 * np.pi, size=(count, dim))
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def check_marcinkiewicz(m: Symbol, alpha_max: int = 2, sample_count: int = 200, seed: int = 0,
                        points: Optional[np.ndarray] = None) -> dict:
    """Worst ``|d^alpha m| * prod_a |group_a|**|alpha_a|`` over sample points, per multi-index.

    Keys are tuples of per-group multi-indices.  Derivatives are centred
    differences with step ``min(1e-3, |group|/100)`` in each group.
    """
    if not 0 <= alpha_max <= 3:
        raise ValueError("alpha_max must lie in [0, 3]")
    d = m.dim
    pts = sample_points(d, sample_count, seed) if points is None else np.asarray(points, dtype=float)
    if pts.ndim != 3 or pts.shape[1:] != (d, ARITY):
        raise ValueError(f"points must have shape (count, {d}, {ARITY})")
    radius = np.linalg.norm(pts, axis=-1)  # (count, d)
    steps = np.minimum(1e-3, radius / 100)
    if np.any(radius <= steps):
        raise ValueError("sample point within one step of a singular axis")
    report = {}
    for alpha in itertools.product(group_multi_indices(alpha_max), repeat=d):
        orders = [o for group in alpha for o in group]  # per coordinate (group, slot)
        value = np.zeros(len(pts), dtype=complex)
        for combo in itertools.product(*(range(len(_STENCILS[o][0])) for o in orders)):
            shifted = pts.copy()
            weight = np.ones(len(pts))
            for c, (o, j) in enumerate(zip(orders, combo)):
                a, s = divmod(c, ARITY)
                offsets, coeffs = _STENCILS[o]
                shifted[:, a, s] += offsets[j] * steps[:, a]
                weight = weight * coeffs[j] / steps[:, a] ** o
            value += weight * m(shifted[..., 0], shifted[..., 1])
        scale = np.prod([radius[:, a] ** sum(alpha[a]) for a in range(d)], axis=0)
        report[alpha] = float(np.max(np.abs(value) * scale))
    return report


def format_multi_index(alpha: tuple) -> str:
    return ";".join(f"{a1},{a2}" for a1, a2 in alpha)
