import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cddsim import (AmplitudeNoiseSpec, FitFailure, HyperfineEnsemble,
                    PhaseMod, SimulationConfig, SingleDrive, compare_schemes,
                    contrast, fit_decay, scan_alpha)
from cddsim.evolve import DecoherenceCurve


def synthetic_curve(times, values, n=100):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return DecoherenceCurve(times=times, fidelity=values,
                            stderr=np.zeros_like(values), n_realizations=n,
                            config_hash="synthetic")


def test_plain_fit_recovers_its_own_model():
    t = np.linspace(0, 25, 400)
    curve = synthetic_curve(t, np.exp(-t / 5.0))
    fit = fit_decay(curve, "plain_exp")
    assert fit.t_decay == pytest.approx(5.0, abs=1e-3)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-6)
    assert fit.offset == pytest.approx(0.0, abs=1e-6)


def test_envelope_fit_recovers_modulated_exponential():
    t = np.arange(0, 4.0, 1.0 / 360.0)
    values = 0.5 + 0.5 * np.exp(-t / 0.81) * np.cos(2 * np.pi * 9.0 * t)
    fit = fit_decay(synthetic_curve(t, values), "envelope_exp")
    assert fit.t_decay == pytest.approx(0.81, rel=0.05)


def test_fit_scale_equivariance():
    t = np.arange(0, 4.0, 1.0 / 360.0)
    values = 0.5 + 0.5 * np.exp(-t / 0.7) * np.cos(2 * np.pi * 9.0 * t)
    base = fit_decay(synthetic_curve(t, values), "envelope_exp")
    scaled = fit_decay(synthetic_curve(2.0 * t, values), "envelope_exp")
    assert scaled.t_decay == 2.0 * base.t_decay


def test_fit_refuses_flat_curve():
    t = np.linspace(0, 10, 300)
    rng = np.random.default_rng(4)
    flat = 0.5 + 0.001 * rng.standard_normal(len(t))
    with pytest.raises(FitFailure):
        fit_decay(synthetic_curve(t, flat), "plain_exp")


def test_fit_requires_enough_points():
    t = np.linspace(0, 1, 5)
    with pytest.raises(FitFailure):
        fit_decay(synthetic_curve(t, np.exp(-t)), "plain_exp")


def test_fit_rejects_unknown_method():
    t = np.linspace(0, 1, 50)
    with pytest.raises(ValueError):
        fit_decay(synthetic_curve(t, np.exp(-t)), "linear")


def test_contrast_values():
    assert contrast(1.0, 1.0) == 0.0
    assert contrast(1.0, 0.0) == 1.0
    with pytest.raises(ValueError):
        contrast(0.0, 0.0)


@settings(max_examples=200)
@given(st.floats(min_value=1e-6, max_value=1e6),
       st.floats(min_value=1e-6, max_value=1e6))
def test_contrast_antisymmetric_and_bounded(r1, r2):
    c = contrast(r1, r2)
    assert c == pytest.approx(-contrast(r2, r1), rel=1e-12, abs=1e-15)
    assert -1.0 <= c <= 1.0


def small_config(**kwargs):
    base = dict(scheme=PhaseMod(9.0, 0.1), duration=6.0, n_realizations=64,
                master_seed=2026)
    base.update(kwargs)
    return SimulationConfig(**base)


def test_scan_alpha_validation():
    cfg = small_config()
    with pytest.raises(ValueError):
        scan_alpha(cfg, [])
    with pytest.raises(ValueError):
        scan_alpha(cfg, [0.2, 0.1])


def test_scan_alpha_modulation_helps():
    result = scan_alpha(small_config(duration=24.0), [0.0, 0.1], init_axis="y")
    assert result.status[0] == 0 and result.status[1] == 0
    assert result.t_decay[1] > result.t_decay[0]


def test_scan_alpha_isolates_fit_failures():
    # A two-point curve cannot be fitted; the scan must record the failure
    # and still produce the other rows.
    cfg = small_config(duration=0.005, n_realizations=4)
    result = scan_alpha(cfg, [0.0, 0.1], init_axis="y")
    assert list(result.status) == [1, 1]
    assert np.all(np.isnan(result.t_decay))


def test_compare_schemes_identical_at_zero_alpha():
    cmp0 = compare_schemes(small_config(duration=1.0, n_realizations=16), 0.0)
    assert cmp0.max_abs_diff == 0.0
    assert np.array_equal(cmp0.phase_curve.fidelity, cmp0.amp_curve.fidelity)


def test_compare_schemes_close_at_small_alpha():
    cmp1 = compare_schemes(small_config(duration=2.0, n_realizations=64), 0.1)
    pooled = np.sqrt(cmp1.phase_curve.stderr**2 + cmp1.amp_curve.stderr**2)
    diff = np.abs(cmp1.phase_curve.fidelity - cmp1.amp_curve.fidelity)
    assert cmp1.max_abs_diff > 0.0
    assert np.all(diff <= 2.0 * pooled + 1e-4)
