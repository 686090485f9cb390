"""Trajectory propagation, ensemble averaging, undriven calibration curves,
and numerical checks of the rotating-frame reductions.

Noise model per trajectory: one OU stream for the spin bath (its value is the
angular transition-frequency shift; the sigma_z coefficient is half of it),
one OU stream for the drive-amplitude fluctuation (shared between the two
effective drives, the second scaled by omega2/omega1), and one static
hyperfine detuning drawn per trajectory.  Noise values are held constant
within each dt step; the deterministic modulation is evaluated at the step
midpoint.

Every trajectory owns a counter-based random stream keyed on
(master_seed, realization_index), so results are bit-reproducible for any
worker count and block schedule.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .drive import (
    AmpMod,
    DoubleDrive,
    DriveScheme,
    LabFrameParams,
    PhaseMod,
    SingleDrive,
    alpha_of,
    iq_values,
    omega2_mhz,
)
from .noise import (
    AmplitudeNoiseSpec,
    HyperfineEnsemble,
    ou_path,
    sample_detuning,
    stationary_sigma,
)
from .spincore import SpinState, state_along

__all__ = [
    "SimulationConfig",
    "DecoherenceCurve",
    "Trajectory",
    "simulate_trajectory",
    "ensemble_curve",
    "fid_curve",
    "hahn_echo_curve",
    "verify_rwa",
    "verify_second_frame",
]

TWO_PI = 2.0 * math.pi

# Trajectories are processed in fixed-size blocks regardless of worker count,
# and block results are combined in index order: reductions are deterministic.
BLOCK_SIZE = 100


@dataclass(frozen=True)
class SimulationConfig:
    """Resolved parameters of one Monte Carlo run.

    Frequencies are in MHz and times in us.  `bath_c` is the bath diffusion
    coefficient in the angular convention described in `noise`.  `dt = None`
    picks the default step for the operation (1/(40*omega1) when driven).

    drive_realization selects how the modulation enters the canonical frame:
    'canonical' uses the small-alpha form shared by all modulated schemes;
    'iq' uses the scheme's exact baseband quadratures (required to resolve
    the O(alpha^2) difference between phase and amplitude modulation).
    awg_hold_ns, when set, holds the quadratures at the stated sample period
    like a zero-order-hold waveform generator.
    """

    scheme: Optional[DriveScheme]
    duration: float
    n_realizations: int = 400
    master_seed: int = 12345
    init_axis: str = "y"
    dt: Optional[float] = None
    bath_tau: float = 10.0
    bath_c: float = 6.6667e-5
    amp_noise: AmplitudeNoiseSpec = field(default_factory=AmplitudeNoiseSpec)
    hyperfine: HyperfineEnsemble = field(default_factory=HyperfineEnsemble)
    drive_realization: str = "canonical"
    awg_hold_ns: Optional[float] = None
    phase_jitter_rad: float = 0.0

    def validate(self) -> None:
        if self.init_axis not in ("x", "y", "z"):
            raise ValueError(f"init_axis must be x, y or z, got {self.init_axis!r}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be at least 1")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")
        if self.bath_tau <= 0:
            raise ValueError("bath_tau must be positive")
        if self.bath_c < 0:
            raise ValueError("bath_c must be non-negative")
        if self.drive_realization not in ("canonical", "iq"):
            raise ValueError(
                f"drive_realization must be 'canonical' or 'iq', got "
                f"{self.drive_realization!r}")
        if self.awg_hold_ns is not None and self.awg_hold_ns <= 0:
            raise ValueError("awg_hold_ns must be positive when set")
        if self.phase_jitter_rad < 0:
            raise ValueError("phase_jitter_rad must be non-negative")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme is not None:
            cap = 1.0 / (20.0 * self.scheme.omega1)
            if self.resolved_dt() > cap * (1.0 + 1e-12):
                raise ValueError(
                    f"dt = {self.resolved_dt()} us is too coarse for the "
                    f"omega1 = {self.scheme.omega1} MHz modulation; need "
                    f"dt <= {cap} us")

    def resolved_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        if self.scheme is not None:
            return 1.0 / (40.0 * self.scheme.omega1)
        # Undriven runs only need to resolve the bath correlation time and
        # provide a reasonable sampling of the curve.
        return min(self.bath_tau / 20.0, self.duration / 500.0)

    def config_hash(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class DecoherenceCurve:
    """Ensemble-averaged fidelity versus time with its standard error."""

    times: np.ndarray
    fidelity: np.ndarray
    stderr: np.ndarray
    n_realizations: int
    config_hash: str


@dataclass(frozen=True)
class Trajectory:
    """Single-realization state history on the simulation grid."""

    times: np.ndarray
    amplitudes: np.ndarray  # shape (n_times, 2), complex
    detuning_mhz: float

    def state(self, i: int) -> SpinState:
        return SpinState(complex(self.amplitudes[i, 0]),
                         complex(self.amplitudes[i, 1]))

    def fidelity_series(self) -> np.ndarray:
        # Same operation order as the ensemble engine, so the series is
        # bit-identical to the corresponding ensemble row.
        w0c = np.conj(self.amplitudes[0, 0])
        w1c = np.conj(self.amplitudes[0, 1])
        overlap = w0c * self.amplitudes[:, 0] + w1c * self.amplitudes[:, 1]
        fid = np.minimum(1.0, overlap.real**2 + overlap.imag**2)
        fid[0] = 1.0
        return fid


def _generator(master_seed: int, index: int) -> np.random.Generator:
    key = np.array([master_seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _driven_noise(cfg: SimulationConfig, index: int, n_steps: int):
    """Per-trajectory draws, in a frozen order: detuning, initial OU values,
    then per-step unit normals (bath column 0, amplitude column 1), then the
    optional phase-jitter column."""
    gen = _generator(cfg.master_seed, index)
    det_mhz = sample_detuning(cfg.hyperfine, gen)
    omega1a = TWO_PI * cfg.scheme.omega1
    sigma_bath = stationary_sigma(cfg.bath_tau, cfg.bath_c)
    amp_c = cfg.amp_noise.diffusion(omega1a)
    sigma_amp = stationary_sigma(cfg.amp_noise.tau, amp_c)
    f0 = gen.standard_normal() * sigma_bath
    w0 = gen.standard_normal() * sigma_amp
    z = gen.standard_normal((n_steps, 2))
    dt = cfg.resolved_dt()
    f_path = ou_path(cfg.bath_tau, cfg.bath_c, dt, f0, z[:, 0])
    w_path = ou_path(cfg.amp_noise.tau, amp_c, dt, w0, z[:, 1])
    jitter = None
    if cfg.phase_jitter_rad > 0.0:
        jitter = gen.standard_normal(n_steps) * cfg.phase_jitter_rad
    return det_mhz, f_path, w_path, jitter


def _n_steps(cfg: SimulationConfig) -> int:
    return max(1, int(round(cfg.duration / cfg.resolved_dt())))


def _modulation_tables(cfg: SimulationConfig, t_mid: np.ndarray):
    """Per-step drive quadrature factors shared by all trajectories."""
    scheme = cfg.scheme
    if cfg.awg_hold_ns is not None:
        hold = cfg.awg_hold_ns * 1e-3
        t_eval = np.floor(t_mid / hold) * hold
    else:
        t_eval = t_mid
    if cfg.drive_realization == "iq":
        i_tab, q_tab = iq_values(scheme, t_eval)
        return np.asarray(i_tab, dtype=float), np.asarray(q_tab, dtype=float)
    # Canonical small-alpha frame: unit in-phase channel, sine quadrature.
    omega1a = TWO_PI * scheme.omega1
    q_tab = np.sin(omega1a * t_eval) if omega2_mhz(scheme) else np.zeros_like(t_eval)
    return None, q_tab


def _run_block_driven(cfg: SimulationConfig, lo: int, hi: int,
                      record_amplitudes: bool = False):
    scheme = cfg.scheme
    dt = cfg.resolved_dt()
    n_steps = _n_steps(cfg)
    omega1a = TWO_PI * scheme.omega1
    omega2a = TWO_PI * omega2_mhz(scheme)
    ratio = omega2_mhz(scheme) / scheme.omega1
    t_mid = (np.arange(n_steps) + 0.5) * dt
    i_tab, q_tab = _modulation_tables(cfg, t_mid)

    nb = hi - lo
    det = np.empty(nb)
    f_steps = np.empty((nb, n_steps))
    w_steps = np.empty((nb, n_steps))
    jit = np.zeros((nb, n_steps)) if cfg.phase_jitter_rad > 0.0 else None
    for j, index in enumerate(range(lo, hi)):
        det_mhz, f_path, w_path, jitter = _driven_noise(cfg, index, n_steps)
        det[j] = det_mhz
        f_steps[j] = f_path[:-1]
        w_steps[j] = w_path[:-1]
        if jitter is not None:
            jit[j] = jitter

    # sigma_z coefficient: half the angular transition shift (bath + static).
    hz_steps = 0.5 * f_steps + (math.pi * det)[:, None]
    hx_noise = 0.5 * w_steps

    a0_init, a1_init = state_along(cfg.init_axis).a0, state_along(cfg.init_axis).a1
    a0 = np.full(nb, a0_init, dtype=complex)
    a1 = np.full(nb, a1_init, dtype=complex)
    w0c, w1c = np.conj(a0_init), np.conj(a1_init)

    fid = np.empty((nb, n_steps + 1))
    fid[:, 0] = 1.0
    amps = None
    if record_amplitudes:
        amps = np.empty((nb, n_steps + 1, 2), dtype=complex)
        amps[:, 0, 0] = a0
        amps[:, 0, 1] = a1

    hx0 = 0.5 * omega1a
    use_iq = i_tab is not None
    for k in range(n_steps):
        if use_iq:
            amp_k = hx0 + hx_noise[:, k]
            hx = amp_k * i_tab[k]
            hy = amp_k * q_tab[k]
        else:
            hx = hx0 + hx_noise[:, k]
            hy = (omega2a + ratio * w_steps[:, k]) * q_tab[k]
        if jit is not None:
            cj = np.cos(jit[:, k])
            sj = np.sin(jit[:, k])
            hx, hy = hx * cj - hy * sj, hx * sj + hy * cj
        hz = hz_steps[:, k]

        mag = np.sqrt(hx * hx + hy * hy + hz * hz)
        phi = mag * dt
        c = np.cos(phi)
        q = dt * np.sinc(phi / np.pi)
        tx = q * hx
        ty = q * hy
        u00 = c - 1j * (q * hz)
        u01 = -1j * tx - ty
        u10 = -1j * tx + ty
        u11 = np.conj(u00)
        a0, a1 = u00 * a0 + u01 * a1, u10 * a0 + u11 * a1

        overlap = w0c * a0 + w1c * a1
        fid[:, k + 1] = np.minimum(1.0, overlap.real**2 + overlap.imag**2)
        if amps is not None:
            amps[:, k + 1, 0] = a0
            amps[:, k + 1, 1] = a1

    sum_f = fid.sum(axis=0)
    sum_f2 = np.square(fid).sum(axis=0)
    if record_amplitudes:
        return sum_f, sum_f2, amps, det
    return sum_f, sum_f2


def _run_block_fid(cfg: SimulationConfig, lo: int, hi: int):
    dt = cfg.resolved_dt()
    n_steps = _n_steps(cfg)
    times = np.arange(n_steps + 1) * dt
    sigma_bath = stationary_sigma(cfg.bath_tau, cfg.bath_c)
    nb = hi - lo
    fid = np.empty((nb, n_steps + 1))
    for j, index in enumerate(range(lo, hi)):
        gen = _generator(cfg.master_seed, index)
        det_mhz = sample_detuning(cfg.hyperfine, gen)
        f0 = gen.standard_normal() * sigma_bath
        f_path = ou_path(cfg.bath_tau, cfg.bath_c, dt, f0,
                         gen.standard_normal(n_steps))
        cum = np.empty(n_steps + 1)
        cum[0] = 0.0
        np.cumsum(0.5 * (f_path[1:] + f_path[:-1]) * dt, out=cum[1:])
        theta = 0.5 * cum + (math.pi * det_mhz) * times
        fid[j] = np.cos(theta) ** 2
    return fid.sum(axis=0), np.square(fid).sum(axis=0)


def _run_block_echo(cfg: SimulationConfig, lo: int, hi: int):
    dt = cfg.resolved_dt()
    n_steps = _n_steps(cfg)
    if n_steps % 2:
        n_steps += 1
    half = n_steps // 2
    sigma_bath = stationary_sigma(cfg.bath_tau, cfg.bath_c)
    nb = hi - lo
    fid = np.empty((nb, half + 1))
    idx = np.arange(half + 1)
    for j, index in enumerate(range(lo, hi)):
        gen = _generator(cfg.master_seed, index)
        sample_detuning(cfg.hyperfine, gen)  # static part refocuses exactly
        f0 = gen.standard_normal() * sigma_bath
        f_path = ou_path(cfg.bath_tau, cfg.bath_c, dt, f0,
                         gen.standard_normal(n_steps))
        cum = np.empty(n_steps + 1)
        cum[0] = 0.0
        np.cumsum(0.5 * (f_path[1:] + f_path[:-1]) * dt, out=cum[1:])
        # Phase flip at the midpoint of each total evolution time 2*j*dt.
        theta = 0.5 * (2.0 * cum[idx] - cum[2 * idx])
        fid[j] = np.cos(theta) ** 2
    return fid.sum(axis=0), np.square(fid).sum(axis=0)


_BLOCK_RUNNERS = {
    "driven": _run_block_driven,
    "fid": _run_block_fid,
    "echo": _run_block_echo,
}


def _block_task(args):
    kind, cfg, lo, hi = args
    return _BLOCK_RUNNERS[kind](cfg, lo, hi)


def _accumulate(kind: str, cfg: SimulationConfig, workers: int):
    blocks = [(kind, cfg, lo, min(lo + BLOCK_SIZE, cfg.n_realizations))
              for lo in range(0, cfg.n_realizations, BLOCK_SIZE)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_task, blocks))
    else:
        results = [_block_task(b) for b in blocks]
    sum_f = results[0][0].copy()
    sum_f2 = results[0][1].copy()
    for sf, sf2 in results[1:]:
        sum_f += sf
        sum_f2 += sf2
    return sum_f, sum_f2


def _curve_from_sums(times, sum_f, sum_f2, n, config_hash) -> DecoherenceCurve:
    mean = sum_f / n
    if n > 1:
        var = np.maximum(0.0, (sum_f2 - n * mean * mean) / (n - 1))
        stderr = np.sqrt(var / n)
    else:
        stderr = np.zeros_like(mean)
    return DecoherenceCurve(times=times, fidelity=mean, stderr=stderr,
                            n_realizations=n, config_hash=config_hash)


def simulate_trajectory(config: SimulationConfig, realization_index: int) -> Trajectory:
    """Propagate one noise realization, returning the full state history.

    Deterministic given (master_seed, realization_index): the result is
    bit-identical to the corresponding row of the ensemble run.
    """
    config.validate()
    if config.scheme is None:
        raise ValueError("simulate_trajectory requires a drive scheme")
    if not (0 <= realization_index < config.n_realizations):
        raise ValueError("realization_index out of range")
    dt = config.resolved_dt()
    n_steps = _n_steps(config)
    _, _, amps, det = _run_block_driven(config, realization_index,
                                        realization_index + 1,
                                        record_amplitudes=True)
    times = np.arange(n_steps + 1) * dt
    return Trajectory(times=times, amplitudes=amps[0], detuning_mhz=float(det[0]))


def ensemble_curve(config: SimulationConfig, workers: int = 1) -> DecoherenceCurve:
    """Mean fidelity to the initial state over n_realizations trajectories.

    The reduction is performed in fixed trajectory-index order, so the output
    is byte-stable for any worker count.
    """
    config.validate()
    if config.scheme is None:
        raise ValueError("ensemble_curve requires a drive scheme; use fid_curve "
                         "or hahn_echo_curve for undriven runs")
    times = np.arange(_n_steps(config) + 1) * config.resolved_dt()
    sum_f, sum_f2 = _accumulate("driven", config, workers)
    return _curve_from_sums(times, sum_f, sum_f2, config.n_realizations,
                            config.config_hash())


def fid_curve(config: SimulationConfig, workers: int = 1) -> DecoherenceCurve:
    """Free-induction decay of a superposition state, no drive.

    The Hamiltonian is diagonal throughout, so the trajectory reduces to an
    accumulated-phase integral of the bath stream plus the static detuning.
    """
    config.validate()
    if config.init_axis == "z":
        raise ValueError("free induction requires a superposition initial state")
    times = np.arange(_n_steps(config) + 1) * config.resolved_dt()
    sum_f, sum_f2 = _accumulate("fid", config, workers)
    return _curve_from_sums(times, sum_f, sum_f2, config.n_realizations,
                            config.config_hash())


def hahn_echo_curve(config: SimulationConfig, workers: int = 1) -> DecoherenceCurve:
    """Echo fidelity versus total time with an ideal, instantaneous refocusing
    flip at the midpoint.  Static detunings cancel exactly; only the bath
    stream contributes."""
    config.validate()
    dt = config.resolved_dt()
    n_steps = _n_steps(config)
    if n_steps % 2:
        n_steps += 1
    times = np.arange(n_steps // 2 + 1) * (2.0 * dt)
    sum_f, sum_f2 = _accumulate("echo", config, workers)
    return _curve_from_sums(times, sum_f, sum_f2, config.n_realizations,
                            config.config_hash())


# ---------------------------------------------------------------------------
# Frame-reduction verifiers
# ---------------------------------------------------------------------------


def _propagate_series(hx, hy, hz, dt, a0, a1):
    """Sequential piecewise-constant propagation; returns (n+1, 2) amplitudes."""
    mag = np.sqrt(hx * hx + hy * hy + hz * hz)
    phi = mag * dt
    c = np.cos(phi)
    q = dt * np.sinc(phi / np.pi)
    tx = q * hx
    ty = q * hy
    u00 = (c - 1j * q * hz).tolist()
    u01 = (-1j * tx - ty).tolist()
    u10 = (-1j * tx + ty).tolist()
    u11 = (c + 1j * q * hz).tolist()
    out0 = [a0]
    out1 = [a1]
    for k in range(len(u00)):
        a0, a1 = u00[k] * a0 + u01[k] * a1, u10[k] * a0 + u11[k] * a1
        out0.append(a0)
        out1.append(a1)
    return np.array(out0), np.array(out1)


def _bloch_arrays(a0, a1):
    cross = np.conj(a0) * a1
    return 2.0 * cross.real, 2.0 * cross.imag, np.abs(a0) ** 2 - np.abs(a1) ** 2


def _max_bloch_distance(pair_a, pair_b) -> float:
    ax, ay, az = _bloch_arrays(*pair_a)
    bx, by, bz = _bloch_arrays(*pair_b)
    return float(np.sqrt((ax - bx) ** 2 + (ay - by) ** 2 + (az - bz) ** 2).max())


def verify_rwa(params: LabFrameParams, window: float,
               dt_lab: Optional[float] = None) -> float:
    """Largest Bloch-vector distance, over `window` us, between noiseless
    lab-frame propagation and the rotating-frame reduction mapped back
    through the carrier rotation.

    The reduction keeps the scheme's exact quadratures and drops only the
    terms oscillating at twice the carrier, so the returned deviation
    isolates that truncation; it shrinks as omega0/omega1 grows.
    """
    if not (math.isfinite(window) and window > 0):
        raise ValueError(f"window must be positive, got {window}")
    if dt_lab is None:
        dt_lab = 1.0 / (200.0 * params.omega0)
    if dt_lab > 1.0 / (20.0 * params.omega0):
        raise ValueError(
            f"dt_lab = {dt_lab} us does not resolve the carrier; need "
            f"dt_lab <= {1.0 / (20.0 * params.omega0)} us")

    scheme = params.scheme
    omega0a = TWO_PI * params.omega0
    omega1a = TWO_PI * scheme.omega1
    n = int(math.ceil(window / dt_lab))
    t_mid = (np.arange(n) + 0.5) * dt_lab
    t_edge = np.arange(n + 1) * dt_lab

    i_tab, q_tab = iq_values(scheme, t_mid)
    lab_hx = omega1a * (i_tab * np.cos(omega0a * t_mid)
                        - q_tab * np.sin(omega0a * t_mid))
    zeros = np.zeros(n)
    psi0 = state_along("y")
    lab = _propagate_series(lab_hx, zeros, np.full(n, 0.5 * omega0a), dt_lab,
                            psi0.a0, psi0.a1)

    rot = _propagate_series(0.5 * omega1a * i_tab, 0.5 * omega1a * q_tab,
                            zeros, dt_lab, psi0.a0, psi0.a1)
    # Map the rotating-frame state back to the lab frame.
    carrier = np.exp(-0.5j * omega0a * t_edge)
    mapped = (rot[0] * carrier, rot[1] * np.conj(carrier))
    return _max_bloch_distance(lab, mapped)


def verify_second_frame(scheme: PhaseMod, d_omega1: float,
                        horizon: float, dt: Optional[float] = None) -> float:
    """Largest Bloch-vector distance, over `horizon` us, between the canonical
    frame evolution and the closed-form evolution of its time-averaged dressed
    Hamiltonian (drive-axis splitting plus residual amplitude error), mapped
    back through the drive rotation.

    With the modulation omega2*sin(omega1 t)*sy, the dressed splitting points
    along -z; the dropped terms oscillate at twice the drive frequency, so
    the deviation is bounded and shrinks with alpha.
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValueError(f"horizon must be positive, got {horizon}")
    omega1a = TWO_PI * scheme.omega1
    omega2a = TWO_PI * omega2_mhz(scheme)
    if dt is None:
        dt = 1.0 / (1024.0 * scheme.omega1)
    n = int(math.ceil(horizon / dt))
    t_mid = (np.arange(n) + 0.5) * dt
    t_edge = np.arange(n + 1) * dt

    psi0 = state_along("y")
    hx = np.full(n, 0.5 * (omega1a + d_omega1))
    ratio = omega2_mhz(scheme) / scheme.omega1
    hy = (omega2a + ratio * d_omega1) * np.sin(omega1a * t_mid)
    full = _propagate_series(hx, hy, np.zeros(n), dt, psi0.a0, psi0.a1)

    # Constant dressed Hamiltonian (bx, 0, bz), evolved in closed form.
    bx = 0.5 * d_omega1
    bz = -0.5 * omega2a
    mag = math.hypot(bx, bz)
    ang = mag * t_edge
    c = np.cos(ang)
    if mag == 0.0:
        nx, nz = 0.0, 0.0
        s = np.zeros_like(ang)
    else:
        nx, nz = bx / mag, bz / mag
        s = np.sin(ang)
    d0 = (c - 1j * s * nz) * psi0.a0 + (-1j * s * nx) * psi0.a1
    d1 = (-1j * s * nx) * psi0.a0 + (c + 1j * s * nz) * psi0.a1
    # Undo the dressed-frame rotation about x at the nominal drive rate.
    th = 0.5 * omega1a * t_edge
    ct, st = np.cos(th), np.sin(th)
    approx = (ct * d0 - 1j * st * d1, -1j * st * d0 + ct * d1)
    return _max_bloch_distance(full, approx)
