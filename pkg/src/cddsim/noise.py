"""Ornstein-Uhlenbeck noise streams and the static hyperfine detuning ensemble.

An OU process with correlation time tau and diffusion coefficient c has the
stationary correlation <f(t) f(t')> = (c tau / 2) exp(-|t - t'| / tau).  It is
advanced with the exact update

    f(t + dt) = f(t) exp(-dt/tau) + n * sqrt((c tau / 2) (1 - exp(-2 dt/tau)))

for a unit Gaussian draw n, which is distribution-exact for any step size.

Unit convention (validated against the free-induction and spin-echo
calibration targets, see the run manifest): the bath process value is the
instantaneous angular-frequency shift of the |0>-|1> transition in rad/us,
and the configured diffusion coefficient is used as-is in those units.  The
sigma_z Hamiltonian coefficient is therefore half the process value, applied
by the trajectory layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "OuProcess",
    "AmplitudeNoiseSpec",
    "HyperfineEnsemble",
    "ou_step",
    "ou_stream",
    "ou_path",
    "sample_detuning",
    "stationary_sigma",
]

TWO_PI = 2.0 * math.pi


def stationary_sigma(tau: float, c: float) -> float:
    """Standard deviation sqrt(c*tau/2) of the stationary OU distribution."""
    return math.sqrt(0.5 * c * tau)


@dataclass(frozen=True)
class OuProcess:
    """Stateful OU stream: correlation time tau (us), diffusion c, current value."""

    tau: float
    c: float
    value: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be non-negative, got {self.c}")

    @property
    def stationary_sigma(self) -> float:
        return stationary_sigma(self.tau, self.c)


def ou_step(p: OuProcess, dt: float, n: float) -> OuProcess:
    """Advance the process by dt using the exact update and the draw n.

    Deterministic given n.  Raises ValueError for non-positive dt.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive, got {dt}")
    decay = math.exp(-dt / p.tau)
    kick = math.sqrt(0.5 * p.c * p.tau * (1.0 - decay * decay))
    return OuProcess(p.tau, p.c, p.value * decay + n * kick)


def _ou_coeffs(tau: float, c: float, dt: float) -> tuple[float, float]:
    decay = math.exp(-dt / tau)
    kick = math.sqrt(0.5 * c * tau * (1.0 - decay * decay))
    return decay, kick


def ou_path(tau: float, c: float, dt: float, value0: float,
            normals: np.ndarray) -> np.ndarray:
    """Exact OU recursion from value0 through len(normals) updates.

    Returns an array of length len(normals) + 1 starting at value0.
    """
    decay, kick = _ou_coeffs(tau, c, dt)
    n_steps = len(normals)
    out = np.empty(n_steps + 1)
    out[0] = value0
    if n_steps:
        # AR(1) recursion y[k] = decay*y[k-1] + kick*n[k] via a linear filter.
        out[1:] = lfilter([kick], [1.0, -decay], normals, zi=[decay * value0])[0]
    return out


def ou_stream(tau: float, c: float, dt: float, n_steps: int,
              rng: np.random.Generator) -> np.ndarray:
    """Sample a stationary OU trace: initial value from N(0, c*tau/2), then
    n_steps exact updates.  Returns n_steps + 1 values.

    Reproducible: identical (tau, c, dt, n_steps) and generator state give
    bit-identical output.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    value0 = rng.standard_normal() * stationary_sigma(tau, c)
    return ou_path(tau, c, dt, value0, rng.standard_normal(n_steps))


@dataclass(frozen=True)
class AmplitudeNoiseSpec:
    """Relative drive-amplitude error and its OU correlation time.

    The process applied to the drive amplitude has diffusion
    c = 2 (relative_error * omega)^2 / tau, so its stationary standard
    deviation is exactly relative_error * omega.  The second effective drive
    reuses the same stream scaled by omega2/omega1 (one physical source).
    """

    relative_error: float = 0.0075
    tau: float = 500.0

    def __post_init__(self):
        if self.relative_error < 0:
            raise ValueError("relative_error must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def diffusion(self, omega_angular: float) -> float:
        """Diffusion coefficient for a drive of angular amplitude omega_angular."""
        return 2.0 * (self.relative_error * omega_angular) ** 2 / self.tau

    def sigma(self, omega_angular: float) -> float:
        return self.relative_error * omega_angular


@dataclass(frozen=True)
class HyperfineEnsemble:
    """Static detuning mixture: Gaussian peaks (MHz) with mixing weights.

    The defaults place one third of the ensemble on resonance and one third
    on each of the +-2.2 MHz nuclear-spin satellites, each peak 1 MHz wide
    (Gaussian standard deviation).
    """

    centers: tuple[float, ...] = (-2.2, 0.0, 2.2)
    weights: tuple[float, ...] = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    peak_width: float = 1.0

    def __post_init__(self):
        if len(self.centers) != len(self.weights) or not self.centers:
            raise ValueError("centers and weights must be equal-length, non-empty")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(self.weights)}")
        if self.peak_width < 0:
            raise ValueError("peak_width must be non-negative")

    @classmethod
    def from_lists(cls, centers: Sequence[float], weights: Sequence[float],
                   peak_width: float) -> "HyperfineEnsemble":
        """Build from relative weights, normalizing them to probabilities."""
        total = sum(weights)
        if total <= 0:
            raise ValueError("weights must have a positive sum")
        return cls(tuple(centers), tuple(w / total for w in weights), peak_width)

    @classmethod
    def resonant_only(cls, peak_width: float = 1.0) -> "HyperfineEnsemble":
        return cls((0.0,), (1.0,), peak_width)


def sample_detuning(ens: HyperfineEnsemble, rng: np.random.Generator) -> float:
    """Draw a detuning (MHz): pick a peak by weight, add Gaussian spread."""
    idx = rng.choice(len(ens.centers), p=np.asarray(ens.weights))
    return ens.centers[idx] + ens.peak_width * rng.standard_normal()
