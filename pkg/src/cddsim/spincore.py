"""Two-level state, Pauli-coefficient Hamiltonians, and the exact one-step propagator.

All Hamiltonian coefficients are angular frequencies (rad/us).  Configuration
layers accept ordinary frequencies in MHz and multiply by 2*pi at the
boundary, so a drive quoted at 9 MHz produces population oscillations with
period 1/9 us.

A Hamiltonian H = h0*I + hx*sx + hy*sy + hz*sz held constant over a step dt
has the exact propagator

    U = exp(-i h0 dt) * [cos(|a| dt) I - i sin(|a| dt) (a_hat . sigma)],

where a = (hx, hy, hz) and |a| is its Euclidean norm.  Using this closed form
keeps every step exactly unitary: state norms are preserved by construction,
never by renormalization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "SpinState",
    "PauliVector",
    "BlochVector",
    "state_along",
    "propagate_step",
    "to_bloch",
    "fidelity",
]


@dataclass(frozen=True)
class SpinState:
    """Pure two-level state with complex amplitudes (a0, a1) on |0>, |1>."""

    a0: complex
    a1: complex

    def norm(self) -> float:
        return math.sqrt(abs(self.a0) ** 2 + abs(self.a1) ** 2)


@dataclass(frozen=True)
class PauliVector:
    """Hamiltonian coefficients H = h0*I + hx*sx + hy*sy + hz*sz, in rad/us."""

    h0: float
    hx: float
    hy: float
    hz: float

    def __post_init__(self):
        for name in ("h0", "hx", "hy", "hz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"PauliVector.{name} must be finite")


@dataclass(frozen=True)
class BlochVector:
    """Expectation values (<sx>, <sy>, <sz>), unit length for pure states."""

    nx: float
    ny: float
    nz: float


_SQRT_HALF = math.sqrt(0.5)

_INIT_AMPLITUDES = {
    "x": (_SQRT_HALF + 0j, _SQRT_HALF + 0j),
    "y": (_SQRT_HALF + 0j, 1j * _SQRT_HALF),
    "z": (1.0 + 0j, 0j),
}


def state_along(axis: str) -> SpinState:
    """Unit state on the +x, +y, or +z Bloch axis."""
    try:
        a0, a1 = _INIT_AMPLITUDES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}") from None
    return SpinState(a0, a1)


def propagate_step(state: SpinState, h: PauliVector, dt: float) -> SpinState:
    """Evolve `state` for a time `dt` (us) under the constant Hamiltonian `h`.

    The closed-form matrix exponential above is applied directly; the result
    is unitary to machine precision for any finite coefficients.

    Raises ValueError on non-finite input or non-positive dt.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    if not (cmath.isfinite(state.a0) and cmath.isfinite(state.a1)):
        raise ValueError("state amplitudes must be finite")

    mag = math.sqrt(h.hx * h.hx + h.hy * h.hy + h.hz * h.hz)
    phi = mag * dt
    c = math.cos(phi)
    # sin(|a| dt)/|a| -> dt as |a| -> 0, so h = 0 gives the identity exactly.
    q = dt if mag == 0.0 else math.sin(phi) / mag

    phase = cmath.exp(-1j * h.h0 * dt)
    u00 = phase * (c - 1j * q * h.hz)
    u01 = phase * (-1j * q * h.hx - q * h.hy)
    u10 = phase * (-1j * q * h.hx + q * h.hy)
    u11 = phase * (c + 1j * q * h.hz)
    return SpinState(u00 * state.a0 + u01 * state.a1,
                     u10 * state.a0 + u11 * state.a1)


def to_bloch(state: SpinState) -> BlochVector:
    """Bloch vector (<sx>, <sy>, <sz>) of a normalized pure state."""
    cross = state.a0.conjugate() * state.a1
    return BlochVector(
        nx=2.0 * cross.real,
        ny=2.0 * cross.imag,
        nz=abs(state.a0) ** 2 - abs(state.a1) ** 2,
    )


def fidelity(a: SpinState, b: SpinState) -> float:
    """Overlap fidelity |<a|b>|^2 between two normalized pure states.

    Symmetric in its arguments; equals 1 iff the states coincide up to a
    global phase.
    """
    overlap = a.a0.conjugate() * b.a0 + a.a1.conjugate() * b.a1
    return min(1.0, abs(overlap) ** 2)
