import numpy as np
import pytest

import oracles
from dyadlab.dyadic import DyadicInterval, DyadicRectangle
from dyadlab.grid import lp_norm
from dyadlab.harness import (MODELS, ExperimentConfig, NormEstimate, domination_rows, estimate_norm, fitted_constant,
                             norm_scan,
                             random_function, rng, symbol_rows, to_json, trial_inputs)

VECTORS = {
    (0, 0): [213000021201967259, 4455796210202625458, 2055444239878205049],
    (1, 2): [5705853004827290377, 6584680345644299050, 680768428710196683],
    (2**63, 1): [11399913948281210984, 9791271464446217943, 14115276238465807388],
}


@pytest.mark.parametrize("key", list(VECTORS))
def test_rng_test_vectors(key):
    raw = [int(x) for x in rng(*key).bit_generator.random_raw(3)]
    assert raw == VECTORS[key] == oracles.philox_raw(*key, 3)


def test_rng_longer_stream_matches_reference():
    assert [int(x) for x in rng(12345, 7).bit_generator.random_raw(10)] == oracles.philox_raw(12345, 7, 10)


def test_rng_rejects_out_of_range():
    with pytest.raises(ValueError):
        rng(-1)
    with pytest.raises(ValueError):
        rng(0, 2**64)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("dim", [1, 2])
def test_random_function_deterministic(model, dim):
    a = random_function(42, dim, 5, model, stream=3)
    b = random_function(42, dim, 5, model, stream=3)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, random_function(43, dim, 5, model, stream=3).samples)


def test_zero_amplitude_field():
    assert np.all(random_function(1, 2, 5, "gaussian_field", amplitude=0.0).samples == 0)


def test_full_torus_indicator():
    full = DyadicRectangle((DyadicInterval(0, 0), DyadicInterval(0, 0)))
    assert np.all(random_function(0, 2, 4, "indicator_union", rectangles=[full]).samples == 1.0)


def test_indicator_union_is_proper_subset():
    for seed in range(20):
        f = random_function(seed, 2, 5, "indicator_union")
        assert 0 < f.samples.mean() < 1 and set(np.unique(f.samples)) <= {0.0, 1.0}


def test_unknown_model():
    with pytest.raises(ValueError):
        random_function(0, 1, 4, "brownian")


def test_trial_inputs_cycle_models():
    first = trial_inputs(0, 0, 1, 5, 2)
    again = random_function(0, 1, 5, MODELS[0], stream=0)
    assert np.array_equal(first[0].samples, again.samples)
    third = trial_inputs(0, 2, 1, 5, 1)[0]
    assert set(np.unique(third.samples)) <= {0.0, 1.0}


def test_identity_ratio_is_one():
    est = estimate_norm(lambda f: f, (3.0, 3.0), 6, (4, 5), 0, 1)
    for L in (4, 5):
        assert est.max_ratio[L] == pytest.approx(1.0, abs=1e-12)


def test_product_ratio_at_most_one():
    est = estimate_norm(lambda f, g: f * g, (4.0, 4.0, 2.0), 20, (5,), 1, 2)
    assert est.max_ratio[5] <= 1 + 1e-12


def test_product_ratio_equality_for_constant_modulus():
    from dyadlab.grid import GridFunction

    f = GridFunction.from_callable(lambda x: np.exp(2j * np.pi * 3 * x), 1, 6)
    g = GridFunction.from_callable(lambda x: 2 * np.exp(-2j * np.pi * 5 * x), 1, 6)
    assert lp_norm(f * g, 2) / (lp_norm(f, 4) * lp_norm(g, 4)) == pytest.approx(1.0, abs=1e-14)


def test_zero_inputs_are_skipped():
    est = estimate_norm(lambda f: f, (2, 2), 3, (4,), 0, 1, models=("gaussian_field",))
    assert all(v is not None for v in est.ratios[4])
    with pytest.raises(ValueError):
        estimate_norm(lambda f: f, (2, 2), 0, (4,), 0, 1)


def test_monotone_in_trials():
    op = lambda f: f * f  # noqa: E731
    values = [estimate_norm(op, (2, 1), t, (5,), 3, 1).max_ratio[5] for t in (1, 3, 9, 27)]
    assert values == sorted(values)


def test_worker_count_does_not_change_results():
    op = lambda f: f.abs()  # noqa: E731
    a = estimate_norm(op, (1.5, 1.5), 8, (5,), 2, 2, workers=1)
    b = estimate_norm(op, (1.5, 1.5), 8, (5,), 2, 2, workers=4)
    assert a.to_json() == b.to_json() and a.ratios == b.ratios


def test_norm_estimate_json():
    est = NormEstimate("S", {5: 2.0, 6: 3.0}, {5: (0, 1), 6: (0, 2)}, 4)
    data = est.to_json()
    assert data["schema"] == 1 and data["resolutions"]["6"]["argmax"] == [0, 2]
    assert est.growth(5, 6) == 1.5


def test_config_invariants():
    cfg = ExperimentConfig("norm_scan", exponents=(4, 4, 2))
    assert cfg.to_dict()["schema"] == 1
    assert ExperimentConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()
    with pytest.raises(ValueError):
        ExperimentConfig("norm_scan", exponents=(4, 4, 3))
    with pytest.raises(ValueError):
        ExperimentConfig("norm_scan", trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig("plot")
    extra = ExperimentConfig.from_dict({"kind": "hybrid_eval", "pattern": "MS"})
    assert extra.options == {"pattern": "MS"}


def test_runners_are_deterministic():
    assert domination_rows((1, 2), 3, 5, 4) == domination_rows((1, 2), 3, 5, 4)
    assert to_json(norm_scan("S", 2.0, 4, (5, 6), 1).to_json()) == to_json(norm_scan("S", 2.0, 4, (5, 6), 1).to_json())
    assert symbol_rows("riesz", 1, 1, 20, 0) == symbol_rows("riesz", 1, 1, 20, 0)


def test_json_is_sorted_and_exact():
    text = to_json({"b": 0.1, "a": [1, 2]})
    assert text.index('"a"') < text.index('"b"') and "0.1" in text


def test_domination_round_off_rows_are_flagged():
    rows = domination_rows((1,), 12, 6, 0)
    flagged = [r for r in rows if not np.isfinite(r[3])]
    assert flagged and all(r[2] < 1e-12 for r in flagged)
    assert fitted_constant(rows) == max(r[3] for r in rows if np.isfinite(r[3]))
    assert np.isnan(fitted_constant([(0, 0.0, 0.0, float("nan"))]))
