"""Adapted bump functions, the smooth cutoff, and the dyadic-annulus bump decomposition.

A bump adapted to ``J`` is realized on the periodic grid from a Gaussian of
width ``|J|/6`` centred on ``J`` (or its derivative, when it must have mean
zero).  The decomposition splits a bump into pieces supported on the
concentric dilates ``2**k J``, each weighted by ``2**(-M k)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dyadic import Interval, dilate
from .grid import GridFunction, lp_norm, quadrature

PROFILE_KINDS = ("gaussian_like", "compact_smooth", "mean_zero_wavelet")
MIN_CELLS = 8
_EPS = np.finfo(float).eps


def smooth_step(s):
    """``exp(-1/s)`` for ``s > 0``, else 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_ramp(s):
    """C-infinity ramp: 0 for ``s <= 0``, 1 for ``s >= 1``."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    a, b = smooth_step(s), smooth_step(1.0 - s)
    return a / (a + b)


def smooth_cutoff(u):
    """Reference cutoff on the line: 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2)."""
    u = np.abs(np.asarray(u, dtype=float))
    return smooth_ramp((0.5 - u) / 0.25)


def cutoff_at(x, interval: Interval):
    """``psi_I(x) = psi((x - center(I)) / |I|)`` on the real line (no wrapping)."""
    left, length = interval
    return smooth_cutoff((np.asarray(x, dtype=float) - (left + length / 2)) / length)


def _offsets(interval: Interval, log_resolution: int) -> np.ndarray:
    """Signed offset of each grid point from the interval centre, wrapped into [-1/2, 1/2)."""
    left, length = interval
    x = np.arange(2**log_resolution) / 2**log_resolution
    return np.mod(x - (left + length / 2) + 0.5, 1.0) - 0.5


def make_cutoff(interval: Interval, log_resolution: int) -> GridFunction:
    """``psi_I`` on the periodic grid, using the nearest periodic image of the centre."""
    return GridFunction(1, log_resolution, _cutoff_samples(interval, log_resolution))


@functools.lru_cache(maxsize=8192)
def _cutoff_samples(interval: Interval, log_resolution: int) -> np.ndarray:
    out = smooth_cutoff(_offsets(interval, log_resolution) / interval[1])
    out.setflags(write=False)
    return out


def torus_distance(interval: Interval, log_resolution: int) -> np.ndarray:
    """Distance on the circle from each grid point to the closed interval."""
    left, length = interval
    x = np.arange(2**log_resolution) / 2**log_resolution
    if length >= 1.0:
        return np.zeros_like(x)
    o = np.mod(x - left, 1.0)
    return np.where(o <= length, 0.0, np.minimum(o - length, 1.0 - o))


def outside_mask(interval: Interval, log_resolution: int) -> np.ndarray:
    return torus_distance(interval, log_resolution) > 0


@dataclass(frozen=True)
class BumpProfile:
    kind: str = "gaussian_like"
    decay_order: int = 4
    smoothness_order: int = 2

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile {self.kind!r}; choose from {PROFILE_KINDS}")
        if self.decay_order < 2 or self.smoothness_order < 1:
            raise ValueError("need decay_order >= 2 and smoothness_order >= 1")


@dataclass(frozen=True, eq=False)
class AdaptedBump:
    interval: Interval
    profile: BumpProfile
    normalized: bool
    cancellation: bool
    samples: GridFunction

    def __post_init__(self):
        if self.normalized and abs(lp_norm(self.samples, 2) - 1.0) > 1e-6:
            raise ValueError("normalized bump does not have unit L2 norm")
        if self.cancellation and abs(quadrature(self.samples)) > 1e-8:
            raise ValueError("cancellative bump does not have mean zero")

    @property
    def log_resolution(self) -> int:
        return self.samples.log_resolution


def _periodized_gaussian(d: np.ndarray, sigma: float):
    images = int(np.ceil(9 * sigma + 0.5))
    g = np.zeros_like(d)
    dg = np.zeros_like(d)
    for m in range(-images, images + 1):
        e = d + m
        w = np.exp(-(e * e) / (2 * sigma * sigma))
        g += w
        dg -= e / (sigma * sigma) * w
    return g, dg


def _compact(d: np.ndarray, half: float):
    u = d / half
    inside = np.abs(u) < 1
    g = np.zeros_like(d)
    dg = np.zeros_like(d)
    ui = u[inside]
    g[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
    dg[inside] = g[inside] * (-2.0 * ui / (1.0 - ui * ui) ** 2) / half
    return g, dg


def _truncate(v: np.ndarray) -> np.ndarray:
    peak = np.abs(v).max()
    if peak > 0:
        v = np.where(np.abs(v) < _EPS * peak, 0.0, v)
    return v


@functools.lru_cache(maxsize=16384)
def bump_samples(interval: Interval, log_resolution: int, kind: str, cancellation: bool, normalized: bool = True):
    """Cached 1-d bump samples (read-only array)."""
    d = _offsets(interval, log_resolution)
    length = interval[1]
    if kind == "compact_smooth":
        base, deriv = _compact(d, length / 2)
    else:
        base, deriv = _periodized_gaussian(d, length / 6)
    base, deriv = _truncate(base), _truncate(deriv)
    if kind == "mean_zero_wavelet" or cancellation:
        # first derivative, with the grid-level mean removed along the base profile
        out = deriv - (deriv.mean() / base.mean()) * base
    else:
        out = base
    if normalized:
        out = out / np.sqrt(np.mean(out * out))
    out.setflags(write=False)
    return out


def make_bump(
    interval: Interval,
    log_resolution: int,
    profile: Optional[BumpProfile] = None,
    normalized: bool = True,
    cancellation: Optional[bool] = None,
) -> AdaptedBump:
    """Realize a bump adapted to ``interval`` on the grid."""
    profile = profile or BumpProfile()
    if cancellation is None:
        cancellation = profile.kind == "mean_zero_wavelet"
    interval = (float(interval[0]), float(interval[1]))
    samples = bump_samples(interval, log_resolution, profile.kind, bool(cancellation), normalized)
    return AdaptedBump(interval, profile, normalized, bool(cancellation), GridFunction(1, log_resolution, samples))


def _derivative(v: np.ndarray, order: int, h: float) -> np.ndarray:
    if order == 0:
        return v
    if order == 1:
        return (np.roll(v, -1) - np.roll(v, 1)) / (2 * h)
    if order == 2:
        return (np.roll(v, -1) - 2 * v + np.roll(v, 1)) / (h * h)
    return _derivative(_derivative(v, 2, h), order - 2, h)


def verify_adapted(b: AdaptedBump, l_max: Optional[int] = None, alpha_max: Optional[int] = None) -> dict:
    """Worst constants ``C[l, alpha]`` in the adaptedness inequalities, measured on the grid.

    For a normalized bump the check is applied to ``|J|**(1/2) * b`` (the
    un-normalized bump).  Derivatives are centred finite differences.
    """
    l_max = b.profile.smoothness_order if l_max is None else l_max
    alpha_max = b.profile.decay_order if alpha_max is None else alpha_max
    L = b.log_resolution
    length = b.interval[1]
    if length * 2**L < MIN_CELLS:
        raise ValueError(f"bump spans fewer than {MIN_CELLS} cells; finite differences unreliable")
    v = np.asarray(b.samples.samples)
    if b.normalized:
        v = v * np.sqrt(length)
    weight = 1.0 + torus_distance(b.interval, L) / length
    h = 1.0 / 2**L
    report = {}
    for l in range(l_max + 1):
        dv = np.abs(_derivative(v, l, h)) * length**l
        for alpha in range(alpha_max + 1):
            report[(l, alpha)] = float(np.max(dv * weight**alpha))
    return report


@dataclass(frozen=True, eq=False)
class BumpDecomposition:
    """``phi = sum_k 2**(-M k) * terms[k] + residual`` with ``supp terms[k]`` inside ``2**k J``."""

    interval: Interval
    decay_exponent: int
    terms: tuple
    residual: GridFunction
    residual_sups: tuple = field(default=())
    residual_means: tuple = field(default=())

    @property
    def term_count(self) -> int:
        """Index ``N`` of the last term."""
        return len(self.terms) - 1

    def weight(self, k: int) -> float:
        return 2.0 ** (-self.decay_exponent * k)

    def partial_sum(self, upto: Optional[int] = None) -> np.ndarray:
        upto = self.term_count if upto is None else upto
        total = np.zeros_like(np.asarray(self.terms[0].samples))
        for k in range(upto + 1):
            total = total + self.weight(k) * np.asarray(self.terms[k].samples)
        return total

    def reconstruction(self) -> np.ndarray:
        return self.partial_sum() + np.asarray(self.residual.samples)

    def support_leak(self, k: int) -> float:
        """Largest ``|term k|`` at grid points outside ``2**k J``."""
        mask = outside_mask(dilate(self.interval, k), self.residual.log_resolution)
        vals = np.abs(np.asarray(self.terms[k].samples))[mask]
        return float(vals.max()) if vals.size else 0.0

    def rows(self) -> list:
        """``(k, weight, mean, sup_outside_support, residual_sup_after_k)`` per term."""
        return [
            (
                k,
                self.weight(k),
                float(np.real(np.mean(self.terms[k].samples))),
                self.support_leak(k),
                self.residual_sups[k] if k < len(self.residual_sups) else float("nan"),
            )
            for k in range(len(self.terms))
        ]


def _check_decay_args(M: int, N: int) -> None:
    if M < 4:
        raise ValueError("decay exponent M must be >= 4")
    if N < 1:
        raise ValueError("need at least N = 1")


def _source(phi) -> tuple:
    if isinstance(phi, AdaptedBump):
        return phi.interval, np.asarray(phi.samples.samples), phi.log_resolution
    raise TypeError("expected an AdaptedBump")


def decompose_plain(phi: AdaptedBump, M: int = 10, N: int = 4) -> BumpDecomposition:
    """Telescoping split over the cutoffs ``psi_{2**k J}``; no cancellation is enforced."""
    _check_decay_args(M, N)
    J, v, L = _source(phi)
    cut = [_cutoff_samples(dilate(J, k), L) for k in range(N + 1)]
    terms, sups, means = [], [], []
    for k in range(N + 1):
        piece = v * cut[0] if k == 0 else v * (cut[k] - cut[k - 1])
        terms.append(GridFunction(1, L, piece * 2.0 ** (M * k)))
        rest = v * (1.0 - cut[k])
        sups.append(float(np.abs(rest).max()))
        means.append(float(np.real(rest.mean())))
    return BumpDecomposition(J, M, tuple(terms), GridFunction(1, L, v * (1.0 - cut[N])), tuple(sups), tuple(means))


def decompose_mean_zero(phi: AdaptedBump, M: int = 10, N: int = 4) -> BumpDecomposition:
    """Split a mean-zero bump into mean-zero pieces supported on ``2**k J``.

    At step ``k`` the current residual is localized with ``psi_{2**k J}``; the
    multiple of the cutoff carrying its mass is moved back into the residual so
    that the extracted piece has mean zero.
    """
    _check_decay_args(M, N)
    J, v, L = _source(phi)
    if abs(v.mean()) > 1e-10:
        raise ValueError("source bump must have mean zero (|mean| <= 1e-10)")
    rest = v
    terms, sups, means = [], [], []
    for k in range(N + 1):
        cut = _cutoff_samples(dilate(J, k), L)
        w = (rest * cut).mean() / cut.mean()
        piece = rest * cut - w * cut
        rest = w * cut + rest * (1.0 - cut)
        terms.append(GridFunction(1, L, piece * 2.0 ** (M * k)))
        sups.append(float(np.abs(rest).max()))
        means.append(float(np.real(rest.mean())))
    return BumpDecomposition(J, M, tuple(terms), GridFunction(1, L, rest), tuple(sups), tuple(means))


def decompose(phi: AdaptedBump, M: int = 10, N: int = 4) -> BumpDecomposition:
    """Mean-zero variant for cancellative bumps, plain variant otherwise."""
    return decompose_mean_zero(phi, M, N) if phi.cancellation else decompose_plain(phi, M, N)


@functools.lru_cache(maxsize=16384)
def dilated_term(interval: Interval, log_resolution: int, kind: str, cancellation: bool, k: int, M: int,
                 normalized: bool = True) -> np.ndarray:
    """Term ``k`` of the decomposition of the cached bump, optionally rescaled to unit L2 norm.

    Terms whose extracted piece is below ``1e-12 * sup|phi|`` are numerically
    empty and returned as zeros rather than amplified round-off.
    """
    bump = make_bump(interval, log_resolution, BumpProfile(kind), True, cancellation)
    dec = decompose(bump, M, max(k, 1))
    term = np.asarray(dec.terms[k].samples)
    piece_sup = np.abs(term).max() * dec.weight(k)
    if piece_sup <= 1e-12 * np.abs(np.asarray(bump.samples.samples)).max():
        out = np.zeros_like(term)
    elif normalized:
        out = term / np.sqrt(np.mean(np.abs(term) ** 2))
    else:
        out = term.copy()
    out.setflags(write=False)
    return out
