import numpy as np
import pytest

import oracles
from dyadlab.grid import GridFunction, forward_transform
from dyadlab.harness import random_function
from dyadlab.multiplier import (Symbol, apply_tm, band_limit, check_marcinkiewicz, constant_symbol, format_multi_index,
                                get_symbol, group_multi_indices, riesz_product, sample_points)


def band(seed, dim, L, model="gaussian_field"):
    return band_limit(random_function(seed, dim, L, model))


@pytest.mark.parametrize("dim", [1, 2])
def test_constant_symbol_gives_product(dim):
    f, g = band(1, dim, 6), band(2, dim, 6)
    out = apply_tm(constant_symbol(dim), f, g)
    assert np.abs(out.samples - f.samples * g.samples).max() <= 1e-10


def test_constant_symbol_band_limits_raw_inputs():
    f, g = random_function(1, 1, 6), random_function(2, 1, 6)
    out = apply_tm(constant_symbol(1), f, g)
    expected = band_limit(f).samples * band_limit(g).samples
    assert np.abs(out.samples - expected).max() <= 1e-10


def test_pure_frequencies():
    L = 6
    m = get_symbol("riesz", 1)
    for a, b in [(3, 5), (-7, 2), (0, 4), (-15, -15)]:
        f = GridFunction.from_callable(lambda x: np.exp(2j * np.pi * a * x), 1, L)
        g = GridFunction.from_callable(lambda x: np.exp(2j * np.pi * b * x), 1, L)
        value = complex(m(np.array([[a]]), np.array([[b]]))[0])
        expected = value * np.exp(2j * np.pi * (a + b) * np.arange(64) / 64)
        assert np.abs(apply_tm(m, f, g).samples - expected).max() <= 1e-12


@pytest.mark.parametrize("name", ["riesz", "constant"])
def test_matches_naive_double_loop(name):
    m = get_symbol(name, 1)
    for seed in range(3):
        f, g = random_function(seed, 1, 6), random_function(seed + 10, 1, 6, "indicator_union")
        assert np.abs(apply_tm(m, f, g).samples - oracles.multiplier_naive(m, f, g)).max() <= 1e-11


@pytest.mark.parametrize("dim", [1, 2])
def test_tensor_path_matches_general_path(dim):
    m = riesz_product(dim)
    f, g = random_function(4, dim, 5), random_function(5, dim, 5, "random_wavelet_sum")
    fast = apply_tm(m, f, g).samples
    slow = apply_tm(m, f, g, tensor=False, chunk=37).samples
    assert np.abs(fast - slow).max() <= 1e-12


def test_general_path_for_non_tensor_symbol():
    radial = Symbol("radial", 1, lambda a, b: np.exp(-(a[..., 0] ** 2 + b[..., 0] ** 2) / 50.0).astype(complex))
    f, g = random_function(0, 1, 6), random_function(1, 1, 6)
    assert np.abs(apply_tm(radial, f, g).samples - oracles.multiplier_naive(radial, f, g)).max() <= 1e-11


def test_bilinearity():
    m = riesz_product(2)
    f1, f2, g = (random_function(s, 2, 5) for s in range(3))
    lhs = apply_tm(m, f1 * 2.0 + f2 * 0.5, g).samples
    rhs = 2.0 * apply_tm(m, f1, g).samples + 0.5 * apply_tm(m, f2, g).samples
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_frequency_support_sum_of_bands():
    L = 6
    n = 64
    rng = np.random.default_rng(0)
    F, G = np.zeros(n, complex), np.zeros(n, complex)
    F[[2, 3, 4]] = rng.standard_normal(3)
    G[[n - 5, 7]] = rng.standard_normal(2)
    f = GridFunction(1, L, np.fft.ifft(F) * n)
    g = GridFunction(1, L, np.fft.ifft(G) * n)
    coeffs = forward_transform(apply_tm(get_symbol("riesz", 1), f, g)).coefficients
    allowed = {(a + b) % n for a in (2, 3, 4) for b in (-5, 7)}
    outside = [i for i in range(n) if i not in allowed]
    assert np.abs(coeffs[outside]).max() <= 1e-14


def test_input_validation():
    with pytest.raises(ValueError):
        apply_tm(riesz_product(1), random_function(0, 1, 5), random_function(0, 1, 6))
    with pytest.raises(ValueError):
        apply_tm(riesz_product(2), random_function(0, 1, 5), random_function(0, 1, 5))
    with pytest.raises(ValueError):
        get_symbol("unknown", 1)
    with pytest.raises(ValueError):
        get_symbol("double_riesz", 1)


def test_check_constant_symbol():
    report = check_marcinkiewicz(constant_symbol(1), alpha_max=2, sample_count=50)
    for alpha, value in report.items():
        assert value == (1.0 if alpha == ((0, 0),) else 0.0)


def test_check_riesz_constants_finite():
    report = check_marcinkiewicz(riesz_product(1), alpha_max=3, sample_count=200)
    assert len(report) == len(group_multi_indices(3)) == 10
    assert all(np.isfinite(v) for v in report.values())
    assert report[((0, 0),)] <= 1 + 1e-12


def test_tensor_constants_bounded_by_factor_products():
    pts = sample_points(2, 150, seed=3)
    factor_a = check_marcinkiewicz(riesz_product(1), 2, points=pts[:, :1, :])
    factor_b = check_marcinkiewicz(riesz_product(1), 2, points=pts[:, 1:, :])
    product = check_marcinkiewicz(riesz_product(2), 2, points=pts)
    for (a1, a2), value in product.items():
        assert value <= factor_a[(a1,)] * factor_b[(a2,)] * (1 + 1e-9)


def test_check_validation():
    with pytest.raises(ValueError):
        check_marcinkiewicz(riesz_product(1), alpha_max=4)
    with pytest.raises(ValueError):
        check_marcinkiewicz(riesz_product(1), points=np.zeros((3, 2, 2)))
    with pytest.raises(ValueError):
        check_marcinkiewicz(riesz_product(1), points=np.array([[[0.0, 0.0]]]))


def test_format_multi_index():
    assert format_multi_index(((1, 0), (0, 2))) == "1,0;0,2"


def test_sup_on_grid():
    assert riesz_product(1).sup_on_grid(3) == pytest.approx(1.0)
