"""Random inputs, empirical norm estimates, and the experiment runners behind the command line.

Random streams come from the Philox counter-based generator: stream ``s`` of
seed ``k`` uses the 128-bit key ``k + (s << 64)``, so any trial can be
regenerated on its own.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bump import BumpProfile, bump_samples, decompose, make_bump
from .dyadic import DyadicInterval, DyadicRectangle, RectangleCollection, default_collection, default_scale_range
from .grid import GridFunction, lp_norm
from .multiplier import check_marcinkiewicz, format_multi_index, get_symbol
from .paraproduct import ParaproductSpec, trilinear_form
from .sqmax import HybridSpec, hl_maximal, hybrid

SCHEMA = 1
MODELS = ("gaussian_field", "random_wavelet_sum", "indicator_union")
EXPERIMENTS = ("lemma_decompose", "verify_domination", "norm_scan", "stopping_trace", "symbol_check", "hybrid_eval")


def rng(seed: int, stream: int = 0) -> np.random.Generator:
    if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
        raise ValueError("seed and stream must be 64-bit unsigned integers")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


def _random_rectangle(gen: np.random.Generator, dim: int, log_resolution: int, scale_range) -> DyadicRectangle:
    lo, hi = scale_range
    axes = []
    for _ in range(dim):
        k = int(gen.integers(lo, hi + 1))
        axes.append(DyadicInterval(k, int(gen.integers(0, 2 ** (-k)))))
    return DyadicRectangle(tuple(axes))


def random_function(
    seed: int,
    dim: int,
    log_resolution: int,
    model: str = "gaussian_field",
    stream: int = 0,
    amplitude: float = 1.0,
    spectral_decay: float = 1.0,
    terms: int = 12,
    rectangles: Optional[Sequence[DyadicRectangle]] = None,
) -> GridFunction:
    """Deterministic random test function.

    ``gaussian_field``: complex normal Fourier coefficients scaled by
    ``amplitude * (1 + |xi|^2)**(-spectral_decay / 2)``, real part taken.
    ``random_wavelet_sum``: ``terms`` normal coefficients on tensor products of
    mean-zero bumps over random dyadic rectangles.
    ``indicator_union``: indicator of ``terms`` random dyadic rectangles with
    sides between two cells and half the torus, or of ``rectangles`` when given.
    """
    gen = rng(seed, stream)
    n = 2**log_resolution
    shape = (n,) * dim
    if model == "gaussian_field":
        freqs = np.fft.fftfreq(n, d=1.0 / n)
        grids = np.meshgrid(*([freqs] * dim), indexing="ij")
        weight = amplitude * (1.0 + sum(k * k for k in grids)) ** (-spectral_decay / 2)
        coeffs = (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) * weight
        return GridFunction(dim, log_resolution, np.fft.ifftn(coeffs).real * coeffs.size)
    scales = default_scale_range(log_resolution)
    if model == "random_wavelet_sum":
        out = np.zeros(shape)
        for _ in range(terms):
            R = _random_rectangle(gen, dim, log_resolution, scales)
            c = gen.standard_normal()
            term = np.ones(())
            for I in R.axes:
                term = np.multiply.outer(term, bump_samples(I.as_interval(), log_resolution, "mean_zero_wavelet", True))
            out += c * term
        return GridFunction(dim, log_resolution, out)
    if model == "indicator_union":
        rects = rectangles if rectangles is not None else [
            _random_rectangle(gen, dim, log_resolution, (-(log_resolution - 1), -1)) for _ in range(terms)]
        out = np.zeros(shape, dtype=bool)
        for R in rects:
            out[R.slices(log_resolution)] = True
        return GridFunction(dim, log_resolution, out.astype(float))
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


def trial_inputs(seed: int, trial: int, dim: int, log_resolution: int, arity: int, models=MODELS) -> list:
    """Inputs of one trial: the model cycles with the trial index, one stream per input."""
    model = models[trial % len(models)]
    return [random_function(seed, dim, log_resolution, model, stream=trial * arity + i) for i in range(arity)]


@dataclass
class NormEstimate:
    operator: str
    max_ratio: dict  # resolution -> max ratio
    argmax: dict  # resolution -> (seed, trial)
    trials: int
    ratios: dict = field(default_factory=dict, repr=False)

    def growth(self, lo: int, hi: int) -> float:
        return self.max_ratio[hi] / self.max_ratio[lo]

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "operator": self.operator,
            "trials": self.trials,
            "resolutions": {
                str(L): {"max_ratio": self.max_ratio[L], "argmax": list(self.argmax[L])} for L in self.max_ratio
            },
        }


def estimate_norm(
    operator: Callable,
    exponents: Sequence[float],
    trials: int,
    resolutions: Sequence[int],
    seed: int,
    dim: int,
    name: str = "operator",
    models=MODELS,
    workers: int = 1,
) -> NormEstimate:
    """Max over trials of ``||operator(inputs)||_r / prod ||input_i||_{p_i}`` per resolution.

    ``exponents`` lists the input exponents followed by the output exponent;
    inputs are normalized first and zero inputs are skipped.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    *p_in, r = exponents
    arity = len(p_in)
    best, where, every = {}, {}, {}

    def one(L, t):
        inputs = trial_inputs(seed, t, dim, L, arity, models)
        norms = [lp_norm(f, p) for f, p in zip(inputs, p_in)]
        if min(norms) == 0:
            return None
        inputs = [f * (1.0 / nf) for f, nf in zip(inputs, norms)]
        return lp_norm(operator(*inputs), r)

    for L in resolutions:
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                ratios = list(pool.map(lambda t: one(L, t), range(trials)))
        else:
            ratios = [one(L, t) for t in range(trials)]
        valid = [(v, t) for t, v in enumerate(ratios) if v is not None]
        value, t_best = max(valid, key=lambda vt: (vt[0], -vt[1]))
        best[L], where[L], every[L] = value, (seed, t_best), ratios
    return NormEstimate(name, best, where, trials, every)


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    resolutions: tuple = (6,)
    exponents: tuple = (None, None, None)
    trials: int = 10
    decay: int = 10
    lattice_size: int = 5
    output: Optional[str] = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        p, q, r = (tuple(self.exponents) + (None, None, None))[:3]
        if None not in (p, q, r) and abs(1 / p + 1 / q - 1 / r) > 1e-12:
            raise ValueError("exponents must satisfy 1/p + 1/q = 1/r")
        self.resolutions = tuple(self.resolutions)
        self.exponents = (p, q, r)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {k: data[k] for k in ("kind", "seed", "resolutions", "exponents", "trials", "decay",
                                      "lattice_size", "output") if k in data}
        rest = {k: v for k, v in data.items() if k not in known and k not in ("schema", "options")}
        return cls(options={**data.get("options", {}), **rest}, **known)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema"] = SCHEMA
        return out


# ---- experiments -----------------------------------------------------------------


def lemma_rows(interval, profile: str, decay: int, terms: int, log_resolution: int) -> list:
    bump = make_bump(tuple(interval), log_resolution, BumpProfile(profile))
    return decompose(bump, decay, terms).rows()


def domination_sides(type_vector: tuple, collection: RectangleCollection, inputs: Sequence[GridFunction],
                     lattice_size: int = 1) -> tuple:
    """``|Lambda(f1, f2, f3)|`` and the integral of the product of the three controlling functions.

    On each axis the slot equal to the type is controlled by a maximal
    function and the other two by square functions; an input whose axes are
    all maximal uses the strong maximal function.
    """
    spec = ParaproductSpec(tuple(type_vector), collection)
    lhs = abs(trilinear_form(spec, *inputs))
    rhs = np.ones(inputs[0].shape)
    for slot, f in zip((1, 2, 3), inputs):
        letters = "".join("M" if slot == j else "S" for j in type_vector)
        if "S" not in letters:
            rhs = rhs * hl_maximal(f).samples
        else:
            rhs = rhs * hybrid(HybridSpec(letters, collection, slot, tuple(type_vector), lattice_size), f).samples
    return lhs, float(np.mean(rhs))


def domination_rows(type_vector: tuple, trials: int, log_resolution: int, seed: int,
                    collection: Optional[RectangleCollection] = None, lattice_size: int = 1,
                    floor: float = 1e-12) -> list:
    """``(trial, lhs, rhs, ratio)`` per trial.

    The ratio is NaN when ``rhs <= floor * prod ||f_i||_3``: both sides are then
    round-off and their quotient carries no information.
    """
    dim = len(type_vector)
    collection = collection or default_collection(dim, log_resolution)
    rows = []
    for t in range(trials):
        inputs = trial_inputs(seed, t, dim, log_resolution, 3)
        lhs, rhs = domination_sides(type_vector, collection, inputs, lattice_size)
        scale = float(np.prod([lp_norm(f, 3) for f in inputs]))
        rows.append((t, lhs, rhs, lhs / rhs if rhs > floor * scale else float("nan")))
    return rows


def fitted_constant(rows: Sequence) -> float:
    """Largest finite ratio among domination rows (NaN if none)."""
    finite = [r[3] for r in rows if np.isfinite(r[3])]
    return max(finite) if finite else float("nan")


def hybrid_operator(pattern: str, collection: RectangleCollection, lattice_size: int = 5) -> Callable:
    """Operator handle for a letter pattern; all-``M`` patterns are the strong maximal function."""
    from .sqmax import pattern_spec

    if "S" not in pattern.upper():
        return hl_maximal
    spec = pattern_spec(pattern, collection, lattice_size)
    return lambda f: hybrid(spec, f)


def norm_scan(pattern: str, p: float, trials: int, resolutions: Sequence[int], seed: int,
              lattice_size: int = 5) -> NormEstimate:
    dim = len(pattern)

    def op(f):
        return hybrid_operator(pattern, default_collection(dim, f.log_resolution), lattice_size)(f)

    return estimate_norm(op, (p, p), trials, resolutions, seed, dim, name=pattern.upper())


def stopping_report(log_resolution: int, p: float, q: float, seed: int, k_max: int, decay: int,
                    lattice_size: int = 5, C_fixed: Optional[float] = None) -> dict:
    from .stopping import run_pipeline

    f, g = trial_inputs(seed, 0, 2, log_resolution, 2, models=("indicator_union",))
    f = f * (1.0 / lp_norm(f, p))
    g = g * (1.0 / lp_norm(g, q))
    result = run_pipeline(f, g, default_collection(2, log_resolution), k_max, decay, p, q,
                          lattice_size=lattice_size, C_fixed=C_fixed)
    out = {"schema": SCHEMA, "resolution": log_resolution, "p": p, "q": q, "seed": seed, "kmax": k_max,
           "decay": decay}
    out.update(result.to_json())
    return out


def symbol_rows(name: str, dim: int, alpha_max: int, samples: int, seed: int) -> list:
    report = check_marcinkiewicz(get_symbol(name, dim), alpha_max, samples, seed)
    return [(format_multi_index(alpha), value) for alpha, value in report.items()]


def to_json(data) -> str:
    """Stable JSON text: sorted keys, repr-exact floats."""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=True)
