"""Exceptional sets, greedy level-set partitions of a rectangle collection, and the measure ledger.

Everything is an exact bitmap over grid points; the measure of a set is its
cell count divided by ``N**d``.  Level ``n`` of a score ``s`` with base
threshold ``T`` at level ``n0`` is the set ``{s > T / 2**(n - n0)}``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from ._maximal import strong_maximal
from .bump import _cutoff_samples
from .dyadic import DyadicRectangle, RectangleCollection, dilate
from .grid import GridFunction
from .paraproduct import ParaproductSpec, lattice_shifts, rectangle_terms, trilinear_form
from .sqmax import HybridSpec, hybrid, pattern_spec

DENSITY = 1 / 100
CELL_DENSITY = 97 / 100
MAX_HALVINGS = 64


class InvariantBreach(RuntimeError):
    """A property that the construction guarantees failed on the grid."""


def measure(mask: np.ndarray) -> float:
    return float(np.count_nonzero(mask)) / mask.size


def overlap(mask: np.ndarray, R: DyadicRectangle, log_resolution: int) -> float:
    """``|R intersect mask| / |R|``."""
    return float(np.count_nonzero(mask[R.slices(log_resolution)])) / R.cell_count(log_resolution)


def overlaps(mask: np.ndarray, collection: RectangleCollection, log_resolution: int) -> np.ndarray:
    """``|R intersect mask| / |R|`` for every rectangle, via a summed-area table."""
    lo, hi = _bounds(collection, log_resolution)
    table = mask.astype(np.int64)
    for a in range(mask.ndim):
        table = np.cumsum(table, axis=a)
        table = np.concatenate([np.zeros_like(table.take([0], axis=a)), table], axis=a)
    total = np.zeros(len(lo), dtype=np.int64)
    for corner in itertools.product((0, 1), repeat=mask.ndim):
        idx = tuple(np.where(c, hi[:, a], lo[:, a]) for a, c in enumerate(corner))
        sign = -1 if (mask.ndim - sum(corner)) % 2 else 1
        total += sign * table[idx]
    return total / np.prod(hi - lo, axis=1)


@functools.lru_cache(maxsize=256)
def _bounds(collection: RectangleCollection, log_resolution: int):
    rows = [[(s.start, s.stop) for s in R.slices(log_resolution)] for R in collection]
    arr = np.array(rows, dtype=np.intp).reshape(len(rows), collection.dim, 2)
    return arr[:, :, 0], arr[:, :, 1]


def dilation_size(k: Sequence[int]) -> int:
    return int(sum(k))


@dataclass
class ExceptionalSets:
    """Per dilation vector ``k``: the three tiers of exceptional sets, plus their union and the good set."""

    dilations: tuple
    omega: Dict[tuple, np.ndarray]
    omega_tilde: Dict[tuple, np.ndarray]
    omega_tilde_tilde: Dict[tuple, np.ndarray]
    global_omega: np.ndarray
    e_prime: np.ndarray
    constant_C: float
    doublings: int = 0

    def summary(self) -> dict:
        return {
            "constant_C": self.constant_C,
            "global_omega": measure(self.global_omega),
            "e_prime": measure(self.e_prime),
            "omega": {",".join(map(str, k)): measure(self.omega[k]) for k in self.dilations},
        }


def _tiers(ms: np.ndarray, sm: np.ndarray, C: float, size: int):
    threshold = C * 2.0 ** (5 * size)
    omega = (ms > threshold) | (sm > threshold)
    tilde = strong_maximal(omega.astype(float)) > DENSITY
    # ">=" keeps the k = 0 tier equal to the middle tier rather than empty
    tilde_tilde = strong_maximal(tilde.astype(float)) >= 2.0 ** (-size)
    return omega, tilde, tilde_tilde


def build_exceptional(
    ms_values: np.ndarray,
    sm_values: np.ndarray,
    dilations: Iterable[tuple],
    C_init: float = 1.0,
    E: Optional[np.ndarray] = None,
) -> ExceptionalSets:
    """Double ``C`` from ``C_init`` until the union of the outer tiers has measure below 1/2.

    ``ms_values`` and ``sm_values`` are the grid values of the two hybrid
    functions of the normalized inputs.
    """
    dilations = tuple(tuple(k) for k in dilations)
    E = np.ones(ms_values.shape, dtype=bool) if E is None else np.asarray(E, dtype=bool)
    C = float(C_init)
    for doublings in range(31):
        tiers = {}
        union = np.zeros(ms_values.shape, dtype=bool)
        for size in sorted({dilation_size(k) for k in dilations}):
            tiers[size] = _tiers(ms_values, sm_values, C, size)
            union |= tiers[size][2]
            if measure(union) >= 0.5:
                break
        else:
            return ExceptionalSets(
                dilations,
                {k: tiers[dilation_size(k)][0] for k in dilations},
                {k: tiers[dilation_size(k)][1] for k in dilations},
                {k: tiers[dilation_size(k)][2] for k in dilations},
                union,
                E & ~union,
                C,
                doublings,
            )
        C *= 2.0
    raise InvariantBreach(f"no C up to 2**30 * {C_init} gives |Omega| < 1/2")


@dataclass
class GreedyPartition:
    """Rectangles by selection level, the superlevel sets, and which rectangles were forced in at the end."""

    levels: Dict[int, tuple]
    level_sets: Dict[int, np.ndarray]
    forced: frozenset
    start_level: int

    def level_of(self) -> dict:
        return {R: n for n, rects in self.levels.items() for R in rects}


def greedy_levels(
    score: np.ndarray,
    collection: RectangleCollection,
    start_threshold: float,
    start_level: int = 0,
    log_resolution: Optional[int] = None,
) -> GreedyPartition:
    """Halve the threshold step by step; at each step take the unselected rectangles
    that put more than 1/100 of their measure in the superlevel set.

    Once the threshold drops below the smallest positive score (or 64 halvings
    after the superlevel set first became nonempty) every remaining rectangle is
    assigned to that step and recorded as forced.
    """
    score = np.asarray(score, dtype=float)
    L = log_resolution if log_resolution is not None else int(round(np.log2(score.shape[0])))
    positive = score[score > 0]
    floor = positive.min() if positive.size else np.inf
    remaining = list(collection)
    position = {R: i for i, R in enumerate(collection)}
    levels: Dict[int, tuple] = {}
    level_sets = {start_level: score > start_threshold}
    forced: set = set()
    first_nonempty = None
    step = 0
    while remaining:
        step += 1
        threshold = start_threshold / 2.0**step
        mask = score > threshold
        n = start_level + step
        level_sets[n] = mask
        if first_nonempty is None and mask.any():
            first_nonempty = step
        if mask.any():
            dense = overlaps(mask, collection, L) > DENSITY
            chosen = [R for R in remaining if dense[position[R]]]
        else:
            chosen = []
        exhausted = threshold < floor or (first_nonempty is not None and step - first_nonempty >= MAX_HALVINGS)
        if not positive.size:
            exhausted = True
        if exhausted:
            taken = set(chosen)
            rest = [R for R in remaining if R not in taken]
            forced.update(rest)
            chosen = chosen + rest
        if chosen:
            levels[n] = tuple(chosen)
            taken = set(chosen)
            remaining = [R for R in remaining if R not in taken]
    return GreedyPartition(levels, level_sets, frozenset(forced), start_level)


@dataclass
class StoppingTrace:
    dilation: tuple
    partitions: tuple  # three GreedyPartition, for f, g and h
    cells: Dict[tuple, tuple]
    shadows: Dict[tuple, float]
    log_resolution: int

    @property
    def start_levels(self) -> tuple:
        return tuple(p.start_level for p in self.partitions)


def _previous_set(part: GreedyPartition, n: int) -> np.ndarray:
    return part.level_sets[n - 1]


def combine_cells(parts: Sequence[GreedyPartition], log_resolution: int, dilation: tuple = ()) -> StoppingTrace:
    """Intersect the three partitions; every cell is checked for the 97/100 density of the good set."""
    if len(parts) != 3:
        raise ValueError("need exactly three partitions")
    maps = [p.level_of() for p in parts]
    if not (maps[0].keys() == maps[1].keys() == maps[2].keys()):
        raise ValueError("partitions cover different collections")
    grouped: Dict[tuple, list] = {}
    for R in maps[0]:
        grouped.setdefault(tuple(m[R] for m in maps), []).append(R)
    cells, shadows = {}, {}
    for key in sorted(grouped):
        rects = tuple(sorted(grouped[key], key=lambda R: (R.scales, R.axes)))
        bad = np.zeros_like(parts[0].level_sets[parts[0].start_level])
        for part, n in zip(parts, key):
            bad = bad | _previous_set(part, n)
        union = np.zeros_like(bad)
        for R in rects:
            sl = R.slices(log_resolution)
            if 1.0 - overlap(bad, R, log_resolution) <= CELL_DENSITY:
                raise InvariantBreach(f"cell {key}: rectangle {R} has good-set density <= 97/100")
            union[sl] = True
        cells[key] = rects
        shadows[key] = measure(union)
    return StoppingTrace(tuple(dilation), tuple(parts), cells, shadows, log_resolution)


def shadow_bound_violations(part: GreedyPartition, log_resolution: int) -> int:
    """Count grid points of a level's shadow lying outside ``{MM(chi_level_set) > 1/100}``.

    Forced rectangles are skipped: they were not selected by density.
    """
    count = 0
    for n, rects in part.levels.items():
        chosen = [R for R in rects if R not in part.forced]
        if not chosen:
            continue
        shadow = np.zeros_like(part.level_sets[n])
        for R in chosen:
            shadow[R.slices(log_resolution)] = True
        big = _expanded(part.level_sets[n].tobytes(), part.level_sets[n].shape)
        count += int(np.count_nonzero(shadow & ~big))
    return count


@functools.lru_cache(maxsize=1024)
def _expanded(mask_bytes: bytes, shape: tuple) -> np.ndarray:
    mask = np.frombuffer(mask_bytes, dtype=bool).reshape(shape)
    return strong_maximal(mask.astype(float)) > DENSITY


def part_split(collection: RectangleCollection, k: tuple, exceptional: ExceptionalSets, log_resolution: int):
    """Rectangles meeting the complement of the middle tier (part I) and those inside it (part II).

    For part II the support of the dilated cutoff must lie in the outer tier.
    """
    tilde = exceptional.omega_tilde[tuple(k)]
    outer = exceptional.omega_tilde_tilde[tuple(k)]
    one, two = [], []
    for R in collection:
        if tilde[R.slices(log_resolution)].all():
            two.append(R)
            support = np.ones(())
            for I, ka in zip(R.axes, k):
                support = np.multiply.outer(support, _cutoff_samples(dilate(I.as_interval(), ka), log_resolution))
            if np.any((support > 0) & ~outer):
                raise InvariantBreach(f"dilated support of {R} leaves the outer exceptional set for k={k}")
        else:
            one.append(R)
    return collection.subset(one), collection.subset(two)


def start_level_for(score: np.ndarray, collection: RectangleCollection, C: float, log_resolution: int) -> int:
    """Smallest ``N >= 1`` with ``|R intersect {score > C 2**N}| < |R| / 100`` for every rectangle."""
    N = 1
    while True:
        mask = score > C * 2.0**N
        if not mask.any() or np.all(overlaps(mask, collection, log_resolution) < DENSITY):
            return N
        N += 1


def default_theta(n3: int) -> tuple:
    return (0.5, 0.5, 0.0) if n3 > 0 else (0.3, 0.3, 0.4)


def verify_ledger(trace: StoppingTrace, p: float, q: float, alpha: float = 3.0, theta=None, tol: float = 1.0) -> dict:
    """Per-cell shadow ratios and the two partial sums of ``2**-(n1+n2+n3) |shadow|``.

    ``theta`` is a fixed triple, or ``None`` to use ``(1/2, 1/2, 0)`` for cells
    with ``n3 > 0`` and ``(0.3, 0.3, 0.4)`` otherwise.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if theta is not None:
        _check_theta(theta)
    rows = []
    upper = lower = 0.0
    for (n1, n2, n3), shadow in sorted(trace.shadows.items()):
        th = default_theta(n3) if theta is None else theta
        bound = 2.0 ** (n1 * p * th[0] + n2 * q * th[1] + n3 * alpha * th[2])
        rows.append({"n": [n1, n2, n3], "size": len(trace.cells[(n1, n2, n3)]), "shadow": shadow,
                     "ratio": shadow / bound})
        term = 2.0 ** (-(n1 + n2 + n3)) * shadow
        if n3 > 0:
            upper += term
        else:
            lower += term
    total = upper + lower
    budget = tol * 2.0 ** (10 * dilation_size(trace.dilation)) if trace.dilation else tol
    return {
        "rows": rows,
        "max_ratio": max((r["ratio"] for r in rows), default=0.0),
        "sum_positive_n3": upper,
        "sum_other_n3": lower,
        "total": total,
        "within_budget": total <= budget,
    }


def _check_theta(theta) -> None:
    if len(theta) != 3 or abs(sum(theta) - 1.0) > 1e-12 or any(not 0 <= t < 1 for t in theta):
        raise ValueError("theta needs three entries in [0, 1) summing to 1")


@dataclass
class PipelineResult:
    exceptional: ExceptionalSets
    traces: Dict[tuple, StoppingTrace]
    ledgers: Dict[tuple, dict]
    part_two: Dict[tuple, float]
    part_sizes: Dict[tuple, tuple]
    lambda_values: list
    shadow_violations: int = 0
    extras: dict = field(default_factory=dict)

    def ledger_constant(self) -> float:
        return max(led["total"] / 2.0 ** (10 * dilation_size(k)) for k, led in self.ledgers.items())

    def to_json(self) -> dict:
        return {
            "exceptional": self.exceptional.summary(),
            "dilations": {
                ",".join(map(str, k)): {
                    "part_sizes": list(self.part_sizes[k]),
                    "part_two": self.part_two[k],
                    "start_levels": list(self.traces[k].start_levels),
                    "cells": self.ledgers[k]["rows"],
                    "sum_positive_n3": self.ledgers[k]["sum_positive_n3"],
                    "sum_other_n3": self.ledgers[k]["sum_other_n3"],
                    "total": self.ledgers[k]["total"],
                }
                for k in self.traces
            },
            "ledger_constant": self.ledger_constant(),
            "shadow_violations": self.shadow_violations,
            "lambda_abs": [abs(v) for v in self.lambda_values],
        }


def run_pipeline(
    f: GridFunction,
    g: GridFunction,
    collection: RectangleCollection,
    k_max: int = 4,
    decay: int = 12,
    p: float = 2.5,
    q: float = 2.5,
    alpha: float = 3.0,
    lattice_size: int = 5,
    C_init: float = 2.0**-8,
    C_fixed: Optional[float] = None,
) -> PipelineResult:
    """Full construction for normalized ``f`` and ``g`` with ``E`` the whole torus.

    With ``C_fixed`` the doubling search is skipped and that constant is used.
    """
    L = f.log_resolution
    ms = hybrid(pattern_spec("MS", collection, lattice_size), f).samples
    sm = hybrid(pattern_spec("SM", collection, lattice_size), g).samples
    dilations = list(itertools.product(range(k_max + 1), repeat=collection.dim))
    if C_fixed is not None:
        exc = build_exceptional(ms, sm, dilations, C_fixed)
        if exc.doublings:
            raise InvariantBreach(f"fixed C = {C_fixed} leaves |Omega| >= 1/2")
    else:
        exc = build_exceptional(ms, sm, dilations, C_init)
    C = exc.constant_C
    h = GridFunction(f.dim, L, exc.e_prime.astype(float))
    spec = ParaproductSpec((1, 2), collection, decay=decay)
    traces, ledgers, part_two, sizes = {}, {}, {}, {}
    shared: dict = {}
    violations = 0
    for k in dilations:
        size = dilation_size(k)
        one, two = part_split(collection, k, exc, L)
        sizes[k] = (len(one), len(two))
        if len(two):
            spec_two = ParaproductSpec((1, 2), two, decay=decay, slot3_term=tuple(k))
            part_two[k] = float(np.abs(rectangle_terms(spec_two, f, g, h)).sum())
        else:
            part_two[k] = 0.0
        if not len(one):
            continue
        ss = hybrid(HybridSpec("SS", collection, 3, (1, 2), lattice_size, tuple(k), decay), h).samples
        N = start_level_for(ss, one, C, L)
        key = (size, one)
        if key not in shared:
            shared[key] = (
                greedy_levels(ms, one, C * 2.0 ** (5 * size), -5 * size, L),
                greedy_levels(sm, one, C * 2.0 ** (5 * size), -5 * size, L),
            )
            violations += sum(shadow_bound_violations(part, L) for part in shared[key])
        parts = shared[key] + (greedy_levels(ss, one, C * 2.0**N, -N, L),)
        violations += shadow_bound_violations(parts[2], L)
        traces[k] = combine_cells(parts, L, k)
        ledgers[k] = verify_ledger(traces[k], p, q, alpha)
    lambdas = [trilinear_form(spec.with_shifts(s), f, g, h) for s in lattice_shifts(f.dim, lattice_size)]
    return PipelineResult(exc, traces, ledgers, part_two, sizes, lambdas, violations)
