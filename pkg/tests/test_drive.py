import math

import numpy as np
import pytest

from cddsim import (AmpMod, DoubleDrive, IqWaveform, LabFrameParams, PhaseMod,
                    SingleDrive, alpha_of, compile_iq, iq_values,
                    lab_frame_hamiltonian, omega2_mhz, phase_waveform,
                    rotating_frame_hamiltonian)

TWO_PI = 2.0 * math.pi


def test_scheme_validation():
    with pytest.raises(ValueError):
        SingleDrive(0.0)
    with pytest.raises(ValueError):
        PhaseMod(9.0, -0.1)
    with pytest.raises(ValueError):
        DoubleDrive(9.0, 9.0)
    assert alpha_of(DoubleDrive(9.0, 0.45)) == pytest.approx(0.1)
    assert omega2_mhz(PhaseMod(9.0, 0.1)) == pytest.approx(0.45)


def test_phase_waveform_values():
    assert phase_waveform(0.37, 0.0, 9.0) == 0.0
    t_peak = 1.0 / (4 * 9.0)
    assert phase_waveform(t_peak, 0.1, 9.0) == pytest.approx(0.1, rel=1e-12)
    # bounded by alpha, periodic with 1/omega1
    t = np.linspace(0, 1, 1000)
    w = phase_waveform(t, 0.1, 9.0)
    assert np.max(np.abs(w)) <= 0.1 + 1e-12
    assert phase_waveform(0.05 + 1 / 9.0, 0.1, 9.0) == pytest.approx(
        phase_waveform(0.05, 0.1, 9.0), abs=1e-9)


def test_rotating_frame_single_drive():
    h = rotating_frame_hamiltonian(SingleDrive(9.0), t=0.123)
    assert h.hx == pytest.approx(TWO_PI * 4.5, rel=1e-12)
    assert h.hy == 0.0 and h.hz == 0.0 and h.h0 == 0.0


def test_rotating_frame_modulation_amplitude():
    # |hy| = 2*pi*0.45 rad/us at the sine peak for alpha = 0.1, omega1 = 9.
    scheme = PhaseMod(9.0, 0.1)
    t_peak = 1.0 / (4 * 9.0)
    h = rotating_frame_hamiltonian(scheme, t_peak)
    assert abs(h.hy) == pytest.approx(TWO_PI * 0.45, rel=1e-9)
    # Sign follows the drive quadrature sin(alpha sin) > 0 at the peak.
    assert h.hy > 0


def test_rotating_frame_noise_terms():
    scheme = PhaseMod(9.0, 0.2)
    d_omega1 = 0.05
    t_peak = 1.0 / (4 * 9.0)
    h = rotating_frame_hamiltonian(scheme, t_peak, d_omega1=d_omega1,
                                   f=0.3, detuning=0.2)
    assert h.hx == pytest.approx(0.5 * (TWO_PI * 9.0 + d_omega1))
    assert h.hz == pytest.approx(0.5)
    # Second drive inherits the fluctuation scaled by omega2/omega1.
    ratio = omega2_mhz(scheme) / 9.0
    assert h.hy == pytest.approx(TWO_PI * omega2_mhz(scheme) + ratio * d_omega1)


def test_rotating_frame_phase_and_amp_mod_identical():
    for t in (0.0, 0.013, 0.031, 0.05):
        hp = rotating_frame_hamiltonian(PhaseMod(9.0, 0.1), t, 0.01, 0.2, 0.1)
        ha = rotating_frame_hamiltonian(AmpMod(9.0, 0.1), t, 0.01, 0.2, 0.1)
        hd = rotating_frame_hamiltonian(DoubleDrive(9.0, 0.45), t, 0.01, 0.2, 0.1)
        assert (hp.hx, hp.hy, hp.hz) == (ha.hx, ha.hy, ha.hz)
        assert (hp.hx, hp.hy, hp.hz) == pytest.approx((hd.hx, hd.hy, hd.hz))


def test_alpha_to_zero_continuity():
    t = 0.019
    base = rotating_frame_hamiltonian(SingleDrive(9.0), t)
    for alpha in (0.1, 0.05, 0.02, 0.01):
        h = rotating_frame_hamiltonian(PhaseMod(9.0, alpha), t)
        assert abs(h.hy - base.hy) <= TWO_PI * 9.0 * alpha / 2 + 1e-12
        assert h.hx == base.hx


def test_lab_frame_at_time_zero():
    params = LabFrameParams(900.0, PhaseMod(9.0, 0.1))
    h = lab_frame_hamiltonian(params, 0.0, d_omega1=0.3)
    assert h.hx == pytest.approx(TWO_PI * 9.0 + 0.3, rel=1e-12)
    assert h.hz == pytest.approx(TWO_PI * 450.0)


def test_lab_frame_alpha_zero_reduces_to_plain_drive():
    p_mod = LabFrameParams(900.0, PhaseMod(9.0, 0.0))
    p_plain = LabFrameParams(900.0, SingleDrive(9.0))
    for t in np.linspace(0, 0.01, 17):
        hm = lab_frame_hamiltonian(p_mod, float(t))
        hp = lab_frame_hamiltonian(p_plain, float(t))
        assert hm.hx == pytest.approx(hp.hx, abs=1e-9)


def test_lab_frame_carrier_averages_out():
    params = LabFrameParams(900.0, PhaseMod(9.0, 0.1))
    t = np.linspace(0, 50.0 / 900.0, 20001)
    vals = np.array([lab_frame_hamiltonian(params, float(tt)).hx for tt in t])
    mean = np.trapz(vals, t) / (t[-1] - t[0])
    assert abs(mean) < 0.01 * TWO_PI * 9.0


def test_lab_frame_warns_for_small_carrier():
    with pytest.warns(UserWarning):
        LabFrameParams(50.0, SingleDrive(9.0))


def test_compile_iq_phase_mod():
    wf = compile_iq(PhaseMod(9.0, 0.1), duration=1.0, sample_period=1.0)
    assert len(wf) == 1000
    assert wf.i_samples[0] == pytest.approx(1.0)
    assert wf.q_samples[0] == pytest.approx(0.0)
    # Constant power: samples on the unit circle.
    assert np.max(np.abs(wf.i_samples**2 + wf.q_samples**2 - 1.0)) < 1e-12


def test_compile_iq_amp_mod():
    wf = compile_iq(AmpMod(9.0, 0.1), duration=1.0, sample_period=1.0)
    assert np.all(wf.i_samples == 1.0)
    assert np.max(wf.q_samples) == pytest.approx(0.1, abs=1e-4)
    assert np.min(wf.q_samples) == pytest.approx(-0.1, abs=1e-4)
    # Not constant power for alpha > 0.
    assert np.max(np.abs(wf.i_samples**2 + wf.q_samples**2 - 1.0)) > 1e-3


def test_compile_iq_single_drive_and_double():
    wf = compile_iq(SingleDrive(9.0), duration=0.1)
    assert np.all(wf.q_samples == 0.0) and np.all(wf.i_samples == 1.0)
    wd = compile_iq(DoubleDrive(9.0, 0.45), duration=0.1)
    wa = compile_iq(AmpMod(9.0, 0.1), duration=0.1)
    assert np.array_equal(wd.q_samples, wa.q_samples)


def test_compile_iq_periodicity():
    alpha, omega1, period_ns = 0.1, 9.0, 1.0
    wf = compile_iq(PhaseMod(omega1, alpha), duration=0.5, sample_period=period_ns)
    lag = int(round((1.0 / omega1) * 1e3 / period_ns))
    bound = alpha * omega1 * period_ns * 1e-3 * TWO_PI + 1e-9
    assert np.max(np.abs(wf.q_samples[lag:] - wf.q_samples[:-lag])) <= bound


def test_compile_iq_rejects_bad_requests():
    with pytest.raises(ValueError):
        compile_iq(SingleDrive(9.0), duration=0.0)
    with pytest.raises(ValueError):
        compile_iq(SingleDrive(9.0), duration=1e9, sample_period=1.0)
