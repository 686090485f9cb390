"""Drive schemes, rotating/lab-frame Hamiltonian assembly, and I/Q compilation.

Scheme frequencies are quoted in MHz; assembled Hamiltonian coefficients come
out in rad/us.  The modulation strength alpha == 2*omega2/omega1 sets the
amplitude of the second effective drive omega2 = alpha*omega1/2.

A single source realizes the two-axis drive through baseband quadratures
(I, Q) that multiply the carrier as I*cos(w0 t) - Q*sin(w0 t):

    amplitude modulation:  I = 1,                     Q = alpha*sin(w1 t)
    phase modulation:      I = cos(alpha*sin(w1 t)),  Q = sin(alpha*sin(w1 t))

Dropping terms oscillating at twice the carrier, either waveform reduces to
the rotating-frame Hamiltonian

    H = (omega1 + d_omega1)/2 * sx + (omega2 + d_omega2) sin(omega1 t) * sy
        + (f + detuning) * sz          (all angular),

which is the canonical simulation frame.  The sign of the sy term follows
directly from the waveforms above; the small-alpha limit sin(phi) ~ phi makes
the three modulated schemes coincide there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .spincore import PauliVector

__all__ = [
    "SingleDrive",
    "PhaseMod",
    "AmpMod",
    "DoubleDrive",
    "DriveScheme",
    "LabFrameParams",
    "IqWaveform",
    "alpha_of",
    "omega2_mhz",
    "phase_waveform",
    "iq_values",
    "rotating_frame_hamiltonian",
    "lab_frame_hamiltonian",
    "compile_iq",
]

TWO_PI = 2.0 * math.pi

MAX_IQ_SAMPLES = 50_000_000


@dataclass(frozen=True)
class SingleDrive:
    """Plain continuous drive at Rabi frequency omega1 (MHz)."""

    omega1: float

    def __post_init__(self):
        _check_omega1(self.omega1)


@dataclass(frozen=True)
class PhaseMod:
    """Drive with phase modulation alpha*sin(omega1 t) on the carrier."""

    omega1: float
    alpha: float

    def __post_init__(self):
        _check_omega1(self.omega1)
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class AmpMod:
    """Drive with a quadrature tone of relative amplitude alpha*sin(omega1 t)."""

    omega1: float
    alpha: float

    def __post_init__(self):
        _check_omega1(self.omega1)
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class DoubleDrive:
    """Explicit two-source drive: omega1 along x, omega2 (MHz) along the
    dressed z axis.  Requires omega2 < omega1."""

    omega1: float
    omega2: float

    def __post_init__(self):
        _check_omega1(self.omega1)
        if self.omega2 < 0:
            raise ValueError("omega2 must be non-negative")
        if self.omega2 >= self.omega1:
            raise ValueError("omega2 must be smaller than omega1")


DriveScheme = Union[SingleDrive, PhaseMod, AmpMod, DoubleDrive]


def _check_omega1(omega1: float) -> None:
    if not (math.isfinite(omega1) and omega1 > 0):
        raise ValueError(f"omega1 must be positive, got {omega1}")


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValueError(f"alpha must be non-negative, got {alpha}")


def alpha_of(scheme: DriveScheme) -> float:
    """Modulation strength 2*omega2/omega1 of the scheme (0 for a single drive)."""
    if isinstance(scheme, SingleDrive):
        return 0.0
    if isinstance(scheme, DoubleDrive):
        return 2.0 * scheme.omega2 / scheme.omega1
    return scheme.alpha


def omega2_mhz(scheme: DriveScheme) -> float:
    """Second-drive amplitude alpha*omega1/2 in MHz (0 for a single drive)."""
    if isinstance(scheme, DoubleDrive):
        return scheme.omega2
    return 0.5 * alpha_of(scheme) * scheme.omega1


@dataclass(frozen=True)
class LabFrameParams:
    """Carrier frequency omega0 (MHz) plus the drive scheme, for untruncated
    lab-frame propagation."""

    omega0: float
    scheme: DriveScheme

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError("omega0 must be positive")
        if self.omega0 < 10.0 * self.scheme.omega1:
            warnings.warn(
                f"omega0 = {self.omega0} MHz is less than 10x the Rabi "
                f"frequency {self.scheme.omega1} MHz; rotating-frame "
                "reductions will be poor",
                stacklevel=2,
            )


def phase_waveform(t, alpha: float, omega1: float):
    """Carrier phase offset alpha*sin(2*pi*omega1*t) in rad (t in us, omega1 MHz)."""
    _check_alpha(alpha)
    return alpha * np.sin(TWO_PI * omega1 * np.asarray(t, dtype=float))


def iq_values(scheme: DriveScheme, t):
    """Baseband quadratures (I, Q) of the scheme at times t (us).

    Phase modulation keeps I^2 + Q^2 = 1 exactly (constant drive power);
    amplitude modulation does not for alpha > 0.  An explicit double drive
    compiles to the amplitude-modulated waveform of equal strength, its
    single-source realization.
    """
    t = np.asarray(t, dtype=float)
    if isinstance(scheme, SingleDrive):
        return np.ones_like(t), np.zeros_like(t)
    alpha = alpha_of(scheme)
    mod = alpha * np.sin(TWO_PI * scheme.omega1 * t)
    if isinstance(scheme, PhaseMod):
        return np.cos(mod), np.sin(mod)
    return np.ones_like(t), mod


def rotating_frame_hamiltonian(scheme: DriveScheme, t: float,
                               d_omega1: float = 0.0, f: float = 0.0,
                               detuning: float = 0.0) -> PauliVector:
    """Canonical-frame Hamiltonian coefficients at time t (us).

    d_omega1 is the instantaneous drive-amplitude fluctuation (rad/us); the
    second drive inherits it scaled by omega2/omega1.  f and detuning are the
    sigma_z coefficients in rad/us supplied by the caller (half the angular
    transition-frequency shift each).
    """
    omega1a = TWO_PI * scheme.omega1
    hx = 0.5 * (omega1a + d_omega1)
    hz = f + detuning
    omega2 = omega2_mhz(scheme)
    if omega2 == 0.0:
        return PauliVector(0.0, hx, 0.0, hz)
    omega2a = TWO_PI * omega2 + (omega2 / scheme.omega1) * d_omega1
    hy = omega2a * math.sin(omega1a * t)
    return PauliVector(0.0, hx, hy, hz)


def lab_frame_hamiltonian(params: LabFrameParams, t: float,
                          d_omega1: float = 0.0, f: float = 0.0) -> PauliVector:
    """Full untruncated lab-frame Hamiltonian at time t (us).

    No rotating-wave approximation: the drive term carries the oscillating
    carrier, with the scheme's exact phase- or amplitude-modulated waveform.
    f is the sigma_z noise coefficient in rad/us, as in the rotating frame.
    """
    scheme = params.scheme
    omega0a = TWO_PI * params.omega0
    amp = TWO_PI * scheme.omega1 + d_omega1
    if isinstance(scheme, PhaseMod):
        drive = amp * math.cos(omega0a * t + phase_waveform(t, scheme.alpha,
                                                            scheme.omega1))
    else:
        i_val, q_val = iq_values(scheme, t)
        drive = amp * (float(i_val) * math.cos(omega0a * t)
                       - float(q_val) * math.sin(omega0a * t))
    return PauliVector(0.0, drive, 0.0, 0.5 * omega0a + f)


@dataclass(frozen=True)
class IqWaveform:
    """Sampled baseband channels at a fixed sample period (ns)."""

    sample_period: float
    i_samples: np.ndarray
    q_samples: np.ndarray

    def __len__(self) -> int:
        return len(self.i_samples)


def compile_iq(scheme: DriveScheme, duration: float,
               sample_period: float = 1.0) -> IqWaveform:
    """Sample the scheme's I/Q channels over `duration` us at `sample_period` ns.

    Sampling is on the left edge of each period (the value a zero-order-hold
    generator would emit).  Raises ValueError for a non-positive duration or
    a sample count beyond MAX_IQ_SAMPLES.
    """
    if not (math.isfinite(duration) and duration > 0):
        raise ValueError(f"duration must be positive, got {duration}")
    if not (math.isfinite(sample_period) and sample_period > 0):
        raise ValueError(f"sample_period must be positive, got {sample_period}")
    n = int(round(duration * 1e3 / sample_period))
    if n <= 0 or n > MAX_IQ_SAMPLES:
        raise ValueError(f"sample count {n} outside (0, {MAX_IQ_SAMPLES}]")
    t = np.arange(n) * (sample_period * 1e-3)
    i_samples, q_samples = iq_values(scheme, t)
    return IqWaveform(sample_period, i_samples, q_samples)
