import numpy as np
import pytest

from dyadlab.bump import (AdaptedBump, BumpProfile, cutoff_at, decompose, decompose_mean_zero, decompose_plain,
                          dilated_term, make_bump, make_cutoff, smooth_cutoff, verify_adapted)
from dyadlab.dyadic import dilate
from dyadlab.grid import GridFunction, lp_norm, quadrature

EPS = np.finfo(float).eps


def seeded_bump(seed, kind="gaussian_like", L=10):
    rng = np.random.default_rng(seed)
    length = 2.0 ** -int(rng.integers(2, 6))
    left = float(rng.uniform(0, 1))
    return make_bump((left, length), L, BumpProfile(kind))


def test_cutoff_examples():
    I = (-0.5, 1.0)
    assert cutoff_at(0.0, I) == 1.0
    assert cutoff_at(0.6, I) == 0.0
    assert cutoff_at(0.2, I) == 1.0
    assert smooth_cutoff(0.5) == 0.0 and smooth_cutoff(0.25) == 1.0


def test_grid_cutoff_support_and_plateau():
    psi = make_cutoff((0.25, 0.5), 6).samples
    x = np.arange(64) / 64
    assert np.all(psi[np.abs(x - 0.5) >= 0.25] == 0.0)
    assert np.all(psi[np.abs(x - 0.5) <= 0.125] == 1.0)
    assert np.all((psi >= 0) & (psi <= 1))


def test_grid_cutoff_wraps():
    psi = make_cutoff((0.875, 0.25), 6).samples  # centred on 0 = 1 mod 1
    assert psi[0] == 1.0 and psi[63] == 1.0 and psi[32] == 0.0


@pytest.mark.parametrize("kind", ["gaussian_like", "compact_smooth", "mean_zero_wavelet"])
def test_make_bump_invariants(kind):
    b = make_bump((0.25, 0.25), 8, BumpProfile(kind))
    assert lp_norm(b.samples, 2) == pytest.approx(1.0, abs=1e-6)
    if kind == "mean_zero_wavelet":
        assert b.cancellation and abs(quadrature(b.samples)) <= 1e-8


def test_forced_cancellation_on_smooth_profile():
    b = make_bump((0.5, 0.125), 8, BumpProfile("gaussian_like"), cancellation=True)
    assert abs(quadrature(b.samples)) <= 1e-12


def test_profile_validation():
    with pytest.raises(ValueError):
        BumpProfile("boxcar")
    with pytest.raises(ValueError):
        BumpProfile(decay_order=1)
    with pytest.raises(ValueError):
        AdaptedBump((0, 1), BumpProfile(), True, False, GridFunction(1, 4, np.full(16, 2.0)))


def test_verify_adapted_gaussian_constant():
    report = verify_adapted(make_bump((0.0, 0.25), 10), l_max=2, alpha_max=2)
    assert 0 < report[(0, 2)] <= 10
    assert all(np.isfinite(v) for v in report.values())


def test_verify_adapted_zero_function():
    zero = AdaptedBump((0.25, 0.25), BumpProfile(), False, False, GridFunction.zeros(1, 8))
    assert all(v == 0.0 for v in verify_adapted(zero).values())


def test_verify_adapted_indicator_blows_up():
    def indicator_bump(L):
        x = np.arange(2**L) / 2**L
        chi = ((x >= 0.25) & (x < 0.5)).astype(float)
        return AdaptedBump((0.25, 0.25), BumpProfile(), False, False, GridFunction(1, L, chi))

    coarse = verify_adapted(indicator_bump(6), l_max=1)[(1, 0)]
    fine = verify_adapted(indicator_bump(10), l_max=1)[(1, 0)]
    assert fine >= 8 * coarse


def test_verify_adapted_rejects_unresolved_bump():
    with pytest.raises(ValueError):
        verify_adapted(make_bump((0.0, 1 / 32), 6))


def test_plain_collapses_when_already_localized():
    J = (0.25, 0.5)
    inner = make_bump((0.375, 0.25), 8, BumpProfile("compact_smooth"))  # supported where psi_J = 1
    phi = AdaptedBump(J, inner.profile, True, False, inner.samples)
    dec = decompose_plain(phi, M=10, N=4)
    assert np.array_equal(dec.terms[0].samples, phi.samples.samples)
    assert all(np.all(t.samples == 0) for t in dec.terms[1:])


def test_plain_residual_bound_and_support():
    phi = make_bump((0.375, 0.25), 10)
    dec = decompose_plain(phi, M=10, N=4)
    sup = np.abs(phi.samples.samples).max()
    err = np.abs(phi.samples.samples - dec.partial_sum()).max()
    assert err <= 100 * 2.0 ** (-40) * sup
    for k in range(5):
        assert dec.support_leak(k) == 0.0
    assert np.abs(dec.reconstruction() - phi.samples.samples).max() <= 1e-12


def test_mean_zero_of_zero_function():
    zero = AdaptedBump((0.25, 0.25), BumpProfile("mean_zero_wavelet"), False, True, GridFunction.zeros(1, 8))
    dec = decompose_mean_zero(zero, 10, 3)
    assert all(np.all(t.samples == 0) for t in dec.terms)
    assert np.all(dec.residual.samples == 0)


def test_mean_zero_residual_bound():
    phi = make_bump((0.375, 0.25), 10, BumpProfile("mean_zero_wavelet"))
    dec = decompose_mean_zero(phi, 10, 3)
    sup = np.abs(phi.samples.samples).max()
    assert np.abs(dec.residual.samples).max() / sup <= 100 * 2.0 ** (-40)


def test_mean_zero_rejects_biased_source():
    with pytest.raises(ValueError):
        decompose_mean_zero(make_bump((0.25, 0.25), 8), 10, 2)


def test_decay_arguments_validated():
    phi = make_bump((0.25, 0.25), 8)
    with pytest.raises(ValueError):
        decompose_plain(phi, M=3, N=2)
    with pytest.raises(ValueError):
        decompose_plain(phi, M=10, N=0)


@pytest.mark.parametrize("seed", range(20))
def test_reconstruction_support_and_means(seed):
    for kind in ("gaussian_like", "mean_zero_wavelet"):
        phi = seeded_bump(seed, kind)
        dec = decompose(phi, 10, 4)
        assert np.abs(dec.reconstruction() - phi.samples.samples).max() <= 1e-12
        assert all(dec.support_leak(k) == 0.0 for k in range(5))
        if phi.cancellation:
            assert all(abs(np.mean(t.samples)) * dec.weight(k) <= 1e-10 for k, t in enumerate(dec.terms))
            assert all(abs(m) <= 1e-10 for m in dec.residual_means)


@pytest.mark.parametrize("seed", range(20))
def test_geometric_residual_decay(seed):
    M = 10
    phi = seeded_bump(seed, "mean_zero_wavelet")
    dec = decompose_mean_zero(phi, M, 4)
    floor = 64 * EPS * np.abs(phi.samples.samples).max()
    sups = dec.residual_sups
    for N in range(1, 4):
        if sups[N] > floor:
            assert sups[N + 1] <= 2.0 ** (-M + 2) * sups[N]


def test_rows_layout():
    dec = decompose(make_bump((0.25, 0.25), 8), 10, 2)
    rows = dec.rows()
    assert [r[0] for r in rows] == [0, 1, 2]
    assert rows[1][1] == 2.0**-10
    assert dec.term_count == 2


def test_dilated_term_normalized_and_supported():
    J = (0.375, 0.125)
    for k in range(3):
        t = dilated_term(J, 8, "mean_zero_wavelet", True, k, 10)
        assert np.sqrt(np.mean(t**2)) == pytest.approx(1.0, abs=1e-12)
        left, length = dilate(J, k)
        x = np.arange(256) / 256
        outside = (x < left) | (x > left + length)
        assert np.all(t[outside] == 0)


def test_dilated_term_drops_negligible_pieces():
    t = dilated_term((0.375, 0.125), 8, "mean_zero_wavelet", True, 4, 10)
    assert np.all(t == 0)
